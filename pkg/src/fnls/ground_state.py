"""Ground state of ``(-Delta)^s Q + Q - |Q|^(p-1) Q = 0`` by Petviashvili iteration."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .params import PhysParams, energy, kinetic, mass, potential
from .spectral import Grid, fft, ifft, is_radial, norm_l2, warn_if_boundary_amplitude

__all__ = [
    "GroundState",
    "NoConvergence",
    "Collapse",
    "CertificationFailed",
    "solve_ground_state",
    "gn_constant",
    "gn_ratio",
    "pohozaev_report",
]

log = logging.getLogger(__name__)


class NoConvergence(RuntimeError):
    pass


class Collapse(RuntimeError):
    pass


class CertificationFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class GroundState:
    profile: np.ndarray
    grid: Grid
    params: PhysParams
    mass: float
    kinetic: float
    potential: float
    energy: float
    gn_constant: float
    iterations: int
    residual: float
    stabilizer: float

    def __post_init__(self):
        self.profile.flags.writeable = False

    def multiple(self, c: float) -> np.ndarray:
        return c * self.profile.astype(complex)


def _residual(Q: np.ndarray, denom: np.ndarray, p: float) -> float:
    r = ifft(denom * fft(Q)).real - np.abs(Q) ** (p - 1) * Q
    return float(np.linalg.norm(r) / np.linalg.norm(Q))


def gn_constant(ground: GroundState, params: PhysParams) -> float:
    """Sharp Gagliardo-Nirenberg constant ``||Q||_{p+1}^{p+1} / (||Q||_2^a ||Q||_{Hdot^s}^b)``."""
    pc = params.p_c
    l2 = math.sqrt(ground.mass)
    hs = math.sqrt(ground.kinetic)
    return ground.potential / (l2 ** (params.power + 1 - pc) * hs**pc)


def gn_ratio(u: np.ndarray, grid: Grid, params: PhysParams, constant: float) -> float:
    """``||u||_{p+1}^{p+1}`` over the Gagliardo-Nirenberg right-hand side; at most 1 for the sharp constant."""
    pc = params.p_c
    l2 = math.sqrt(mass(u, grid))
    hs = math.sqrt(kinetic(u, grid, params))
    return potential(u, grid, params) / (constant * l2 ** (params.power + 1 - pc) * hs**pc)


def _gn_closed_form(ground: GroundState, params: PhysParams) -> float:
    N, s, p = params.dim, params.order, params.power
    pc = params.p_c
    l2 = math.sqrt(ground.mass)
    hs = math.sqrt(ground.kinetic)
    return 2 * s * (p + 1) / (N * (p - 1)) / (l2 ** (p + 1 - pc) * hs ** (pc - 2))


def pohozaev_report(ground: GroundState, params: PhysParams) -> dict[str, tuple[float, float, float]]:
    """Relative residuals of the ground-state identities.

    Returns ``{name: (computed, predicted, |predicted/computed - 1|)}``.  ``iii_printed`` checks
    M^a E = (N(p-1)-4s)/(4s-(N-2s)(p-1)) ||Q||_2^(2s/s_c) as commonly stated;
    ``iii_derived`` carries the extra 1/2 implied by combining ``ii`` and ``iv``.
    """
    N, s, p = params.dim, params.order, params.power
    K, P, Mq, E = ground.kinetic, ground.potential, ground.mass, ground.energy
    a = params.mass_exponent
    denom = 4 * s - (N - 2 * s) * (p - 1)
    l2pow = Mq ** (s / params.s_c)
    rows = {
        "i_kinetic": (P, 2 * s * (p + 1) / (N * (p - 1)) * K),
        "i_mass": (P, 2 * s * (p + 1) / (2 * s * (p + 1) - N * (p - 1)) * Mq),
        "ii": (E, (N * (p - 1) - 4 * s) / (2 * N * (p - 1)) * K),
        "iii_printed": (E * Mq**a, (N * (p - 1) - 4 * s) / denom * l2pow),
        "iii_derived": (E * Mq**a, (N * (p - 1) - 4 * s) / (2 * denom) * l2pow),
        "iv": (K * Mq**a, N * (p - 1) / denom * l2pow),
        "v": (gn_constant(ground, params), _gn_closed_form(ground, params)),
        "wave_operator": (2 * E * Mq**a, (N * (p - 1) - 4 * s) / (N * (p - 1)) * Mq**a * K),
    }
    return {k: (lhs, rhs, abs(rhs - lhs) / abs(lhs)) for k, (lhs, rhs) in rows.items()}


CERTIFIED = ("i_kinetic", "i_mass", "ii", "iv", "v")


def solve_ground_state(
    params: PhysParams,
    grid: Grid,
    tol: float = 1e-10,
    max_iter: int = 2000,
    cert_tol: float = 1e-3,
    seed_width: float = 1.0,
    seed_amplitude: float = 1.0,
) -> GroundState:
    """Petviashvili iteration from a Gaussian seed.

    Each step maps ``Q -> F^-1[S^g F[|Q|^(p-1)Q] / (1 + |k|^(2s))]`` with
    ``g = p/(p-1)`` and the stabilizer
    ``S = sum (1+|k|^2s)|F Q|^2 / sum conj(F Q) F[|Q|^(p-1)Q]``.
    Stops once both the relative L2 change and the relative equation
    residual drop below ``tol``.

    Raises
    ------
    NoConvergence
        ``max_iter`` reached.
    Collapse
        The iterate vanished or became non-finite.
    CertificationFailed
        Pohozaev identities, positivity or symmetry fail.
    """
    if params.dim != grid.dim:
        raise ValueError("grid and parameter dimensions differ")
    if not 1e-12 < tol < 1e-4:
        raise ValueError("tol must lie in (1e-12, 1e-4)")
    p = params.power
    gamma = p / (p - 1.0)
    denom = 1.0 + grid.symbol(params.order)
    Q = (seed_amplitude * np.exp(-(grid.r**2) / seed_width**2)) * np.ones(grid.shape)
    seed_norm = np.linalg.norm(Q)
    stab = math.nan
    change = math.inf
    for it in range(1, max_iter + 1):
        Qh = fft(Q)
        Nh = fft(np.abs(Q) ** (p - 1) * Q)
        num = float(np.sum(denom * np.abs(Qh) ** 2))
        den = float(np.sum(np.conj(Qh) * Nh).real)
        if not (den > 0 and math.isfinite(num)):
            raise Collapse(f"iteration {it}: stabilizer undefined (seed/box mismatch)")
        stab = num / den
        Qn = ifft(stab**gamma * Nh / denom).real
        nrm = np.linalg.norm(Qn)
        if not math.isfinite(nrm) or nrm < 1e-12 * seed_norm:
            raise Collapse(f"iteration {it}: iterate norm {nrm:.3e} collapsed")
        change = float(np.linalg.norm(Qn - Q) / nrm)
        Q = Qn
        if change < tol and _residual(Q, denom, p) < tol:
            break
    else:
        raise NoConvergence(f"no convergence after {max_iter} iterations (last change {change:.3e})")

    residual = _residual(Q, denom, p)
    log.info("ground state: %d iterations, residual %.2e, stabilizer %.15f", it, residual, stab)
    warn_if_boundary_amplitude(Q, grid)
    Qc = Q.astype(complex)
    K = kinetic(Qc, grid, params)
    P = potential(Qc, grid, params)
    gs = GroundState(
        profile=Q,
        grid=grid,
        params=params,
        mass=mass(Qc, grid),
        kinetic=K,
        potential=P,
        energy=energy(Qc, grid, params),
        gn_constant=0.0,
        iterations=it,
        residual=residual,
        stabilizer=stab,
    )
    object.__setattr__(gs, "gn_constant", gn_constant(gs, params))
    _certify(gs, params, cert_tol)
    return gs


def _certify(gs: GroundState, params: PhysParams, cert_tol: float) -> None:
    Q = gs.profile
    if Q.min() < -1e-10 * Q.max():
        raise CertificationFailed(f"profile not positive: min {Q.min():.3e}")
    if not is_radial(Q):
        raise CertificationFailed("profile not symmetric under grid reflections")
    report = pohozaev_report(gs, params)
    bad = {k: report[k][2] for k in CERTIFIED if report[k][2] > cert_tol}
    if bad:
        raise CertificationFailed(f"identity residuals above {cert_tol:g}: {bad}")
