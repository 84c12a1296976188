"""Critical exponents, admissible pairs, conserved quantities and the
scattering/blowup threshold classifier for the focusing fractional NLS

    i u_t - (-Delta)^s u + |u|^(p-1) u = 0   on R^N.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .spectral import Grid, check_finite, is_radial, norm_lp, seminorm_hs

__all__ = [
    "PhysParams",
    "critical_exponents",
    "GaussianData",
    "scaling_map",
    "AdmissiblePair",
    "diagonal_pair",
    "is_admissible",
    "mass",
    "energy",
    "kinetic",
    "potential",
    "invariant_products",
    "Verdict",
    "ThresholdReport",
    "classify",
    "InconsistentGroundState",
    "invariant_set_f",
    "invariant_set_extrema",
    "CoercivityReport",
    "coercivity_gap",
]


@dataclass(frozen=True)
class PhysParams:
    """Dimension N, fractional order s in (0, 1) and nonlinearity power p > 1."""

    dim: int
    order: float
    power: float

    def __post_init__(self):
        if not (isinstance(self.dim, (int, np.integer)) and self.dim >= 1):
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        if not 0.0 < self.order < 1.0:
            raise ValueError(f"order s must lie in (0, 1), got {self.order}")
        if not self.power > 1.0:
            raise ValueError(f"power p must exceed 1, got {self.power}")

    @property
    def lower_power(self) -> float:
        """Mass-critical power 1 + 4s/N."""
        return 1 + 4 * self.order / self.dim

    @property
    def upper_power(self) -> float:
        """Energy-critical power 1 + 4s/(N-2s); infinite when N <= 2s."""
        N, s = self.dim, self.order
        return math.inf if N <= 2 * s else 1 + 4 * s / (N - 2 * s)

    @property
    def in_window(self) -> bool:
        return self.lower_power < self.power < self.upper_power

    @property
    def s_c(self) -> float:
        """N/2 - 2s/(p-1); exact when the parameters are ``Fraction``s."""
        q = self.power - 1
        return (self.dim * q - 4 * self.order) / (2 * q)

    @property
    def p_c(self) -> float:
        return self.dim * (self.power - 1) / (2 * self.order)

    @property
    def mass_exponent(self) -> float:
        """(s - s_c)/s_c, the power of the mass in the scale-invariant products."""
        sc = self.s_c
        if sc <= 0:
            raise ValueError("L2-critical or subcritical: products undefined")
        return (self.order - sc) / sc

    @property
    def radial_range(self) -> bool:
        """s >= N/(2N-1), the range where radial Strichartz estimates need no loss."""
        return self.order >= self.dim / (2.0 * self.dim - 1.0)


def critical_exponents(params: PhysParams) -> tuple[float, float]:
    """Return ``(s_c, p_c)``."""
    return params.s_c, params.p_c


@dataclass(frozen=True)
class GaussianData:
    """Closed-form initial data ``A exp(-|x|^2/w^2 + i b |x|^2)``."""

    amplitude: float = 1.0
    width: float = 1.0
    chirp: float = 0.0

    def __call__(self, r):
        return self.amplitude * np.exp(-(r**2) / self.width**2 + 1j * self.chirp * r**2)

    def sample(self, grid: Grid) -> np.ndarray:
        return grid.sample(self)


def scaling_map(data: GaussianData, lam: float, params: PhysParams) -> GaussianData:
    """Data of ``u^lam(t, x) = lam^(2s/(p-1)) u(lam^(2s) t, lam x)`` at t = 0."""
    if not lam > 0:
        raise ValueError("scaling factor must be positive")
    a = 2.0 * params.order / (params.power - 1.0)
    return GaussianData(
        amplitude=data.amplitude * lam**a,
        width=data.width / lam,
        chirp=data.chirp * lam**2,
    )


@dataclass(frozen=True)
class AdmissiblePair:
    q: float
    r: float
    level: float


def _inv(q: float) -> float:
    return 0.0 if math.isinf(q) else 1.0 / q


def diagonal_pair(params: PhysParams) -> AdmissiblePair:
    """The s_c-level pair q = r = (p-1)(N+2s)/(2s)."""
    N, s, p = params.dim, params.order, params.power
    qc = (p - 1.0) * (N + 2.0 * s) / (2.0 * s)
    return AdmissiblePair(qc, qc, params.s_c)


def is_admissible(q: float, r: float, theta: float, params: PhysParams, atol: float = 1e-9) -> bool:
    """Gap and range conditions for a theta-level admissible pair.

    ``q = inf`` is handled through ``1/q = 0``.
    """
    N, s = params.dim, params.order
    if q < 2 or r < 2:
        return False
    iq, ir = _inv(q), _inv(r)
    if abs(2 * s * iq + N * ir - (N / 2.0 - theta)) > atol:
        return False
    q_star = (4.0 * N + 2.0) / (2.0 * N - 1.0)
    bound = (2.0 * N - 1.0) / 2.0 * (0.5 - ir)
    if q >= q_star:
        return iq <= bound + atol
    return iq < bound


def mass(u: np.ndarray, grid: Grid) -> float:
    return grid.cell_volume * float(np.sum(np.abs(u) ** 2))


def kinetic(u: np.ndarray, grid: Grid, params: PhysParams, uh=None) -> float:
    """Squared Hdot^s seminorm."""
    return seminorm_hs(u, grid, params.order, uh) ** 2


def potential(u: np.ndarray, grid: Grid, params: PhysParams) -> float:
    """``||u||_{p+1}^{p+1}``."""
    return grid.cell_volume * float(np.sum(np.abs(u) ** (params.power + 1.0)))


def energy(u: np.ndarray, grid: Grid, params: PhysParams, uh=None) -> float:
    check_finite(u)
    return 0.5 * kinetic(u, grid, params, uh) - potential(u, grid, params) / (params.power + 1.0)


def invariant_products(u: np.ndarray, grid: Grid, params: PhysParams) -> tuple[float, float]:
    """Scale-invariant products ``(M^a E, M^a ||u||_{Hdot^s}^2)`` with a = (s-s_c)/s_c."""
    a = params.mass_exponent
    m = mass(u, grid)
    weight = m**a if m > 0 else 0.0
    return weight * energy(u, grid, params), weight * kinetic(u, grid, params)


class Verdict(str, enum.Enum):
    SCATTER = "ScatterPredicted"
    BLOWUP = "BlowupPredicted"
    BOUNDARY = "Boundary"
    UNDETERMINED = "Undetermined"


class InconsistentGroundState(ValueError):
    pass


@dataclass(frozen=True)
class ThresholdReport:
    product_energy: float
    product_kinetic: float
    threshold_energy: float
    threshold_kinetic: float
    radial_data: bool
    radial_range: bool
    dim_at_least_2: bool
    window: bool
    verdict: Verdict
    note: str = ""
    closed_form_energy: float = math.nan
    closed_form_kinetic: float = math.nan

    @property
    def hypothesis_flags(self) -> dict[str, bool]:
        return {
            "radial_data": self.radial_data,
            "radial_range": self.radial_range,
            "dim_at_least_2": self.dim_at_least_2,
            "window": self.window,
        }

    FIELDS = (
        "product_energy",
        "product_kinetic",
        "threshold_energy",
        "threshold_kinetic",
        "radial_data",
        "radial_range",
        "dim_at_least_2",
        "window",
        "verdict",
        "note",
    )


def threshold_closed_forms(ground, params: PhysParams) -> tuple[float, float]:
    """Thresholds from the Pohozaev relations in terms of ||Q||_2 only.

    The energy threshold uses the product of the energy and kinetic
    identities, (N(p-1)-4s)/(2(4s-(N-2s)(p-1))) ||Q||_2^(2s/s_c).
    """
    N, s, p = params.dim, params.order, params.power
    denom = 4 * s - (N - 2 * s) * (p - 1)
    l2pow = ground.mass ** (s / params.s_c)
    tk = N * (p - 1) / denom * l2pow
    te = (N * (p - 1) - 4 * s) / (2 * denom) * l2pow
    return te, tk


def thresholds(ground, params: PhysParams) -> tuple[float, float]:
    a = params.mass_exponent
    w = ground.mass**a
    return w * ground.energy, w * ground.kinetic


def classify(
    u: np.ndarray,
    grid: Grid,
    params: PhysParams,
    ground,
    rtol: float = 1e-6,
    consistency_tol: float = 1e-3,
    radial: bool | None = None,
) -> ThresholdReport:
    """Compare the invariant products of ``u`` with those of the ground state.

    ``radial`` overrides the grid-symmetry test of the data.
    """
    if params.s_c <= 0:
        raise ValueError("L2-critical or subcritical: products undefined")
    pe, pk = invariant_products(u, grid, params)
    te, tk = thresholds(ground, params)
    cte, ctk = threshold_closed_forms(ground, params)
    if abs(tk / ctk - 1.0) > consistency_tol:
        raise InconsistentGroundState(
            f"inconsistent ground state: kinetic threshold {tk:.10g} vs closed form {ctk:.10g}"
        )
    flags = dict(
        radial_data=bool(is_radial(u) if radial is None else radial),
        radial_range=params.radial_range,
        dim_at_least_2=params.dim >= 2,
        window=params.in_window,
    )
    de = (pe - te) / abs(te)
    dk = (pk - tk) / abs(tk)
    note = ""
    if abs(de) <= rtol or abs(dk) <= rtol:
        verdict = Verdict.BOUNDARY
    elif not flags["window"]:
        verdict, note = Verdict.UNDETERMINED, "outside supercritical window"
    elif de < 0 and dk < 0:
        if all(flags.values()):
            verdict = Verdict.SCATTER
        else:
            verdict, note = Verdict.UNDETERMINED, "outside theorem hypotheses"
    elif de < 0 and dk > 0:
        verdict = Verdict.BLOWUP
    else:
        verdict, note = Verdict.UNDETERMINED, "energy product above threshold"
    return ThresholdReport(pe, pk, te, tk, verdict=verdict, note=note,
                           closed_form_energy=cte, closed_form_kinetic=ctk, **flags)


def invariant_set_f(y, params: PhysParams, gn_constant: float):
    """``f(y) = y^2/2 - C_GN y^(p_c)/(p+1)``; bounds ``M^a E`` from below at y = M^(a/2) ||D^s u||."""
    y = np.asarray(y, dtype=float)
    return 0.5 * y**2 - gn_constant * y**params.p_c / (params.power + 1.0)


def invariant_set_f_prime(y, params: PhysParams, gn_constant: float):
    y = np.asarray(y, dtype=float)
    return y * (1.0 - gn_constant * params.p_c / (params.power + 1.0) * y ** (params.p_c - 2.0))


def invariant_set_extrema(ground, params: PhysParams) -> tuple[float, float, float]:
    """``(y0, y1, f(y1))``: the local minimum at 0 and the maximum of ``f``.

    ``y1`` is the nonzero root of ``f'`` for the computed ``C_GN``; it coincides
    with ``M[Q]^(a/2) ||D^s Q||`` up to the ground state's Pohozaev residual.
    """
    pc = params.p_c
    y1 = ((params.power + 1.0) / (ground.gn_constant * pc)) ** (1.0 / (pc - 2.0))
    return 0.0, y1, float(invariant_set_f(y1, params, ground.gn_constant))


class CoercivityReport(NamedTuple):
    gap: float
    ratio: float
    c_delta: float


def coercivity_gap(u: np.ndarray, grid: Grid, params: PhysParams, ground) -> CoercivityReport:
    """``||D^s u||^2 - N(p-1)/(2s(p+1)) ||u||_{p+1}^{p+1}`` with its guaranteed lower constant.

    ``ratio`` is y = M^(a/2)||D^s u|| / (M_Q^(a/2)||D^s Q||); inside the invariant set
    the gap is at least ``c_delta * ||D^s u||^2`` with ``c_delta = G(y)/y^2 = 1 - y^(p_c-2)``.
    """
    N, s, p = params.dim, params.order, params.power
    k = kinetic(u, grid, params)
    gap = k - N * (p - 1) / (2 * s * (p + 1)) * potential(u, grid, params)
    if k == 0:
        return CoercivityReport(0.0, 0.0, 1.0)
    a = params.mass_exponent
    y = math.sqrt(mass(u, grid) ** a * k) / invariant_set_extrema(ground, params)[1]
    if y >= 1.0:
        warnings.warn("field outside the invariant set; no coercivity guaranteed", RuntimeWarning, stacklevel=2)
    return CoercivityReport(gap, y, 1.0 - y ** (params.p_c - 2.0))
