"""Monitored quantities along a trajectory.

Covers conservation drift, the resolvent field ``u_m = c_s (-Delta + m)^-1 u``
and its kinetic-energy identity, the localized virial with its rate identity
and lower bound, the diagonal Strichartz accumulator, and outcome detectors.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import roots_jacobi

from .params import PhysParams, coercivity_gap, diagonal_pair, energy, kinetic, mass, potential, thresholds
from .spectral import Grid, fft, ifft, norm_lp, seminorm_hs, spectral_gradient

__all__ = [
    "m_quadrature",
    "resolvent_field",
    "resolvent_identity_check",
    "Cutoff",
    "VirialConfig",
    "localized_virial",
    "VirialRate",
    "virial_rate",
    "strichartz_accumulate",
    "spectral_tail_fraction",
    "DiagnosticsRecord",
    "DetectorThresholds",
    "Monitor",
    "detect_outcome",
    "Drift",
    "conservation_drift",
    "SCATTERING",
    "BLOWUP",
    "UNDETERMINED",
]

SCATTERING = "consistent-with-scattering"
BLOWUP = "blowup-indicated"
UNDETERMINED = "undetermined"


@lru_cache(maxsize=32)
def m_quadrature(nodes: int, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights with ``int_0^inf m^s f(m) dm ~ sum(w * f(m))``.

    Uses ``m = tan^2(pi t/2)``; after the substitution the integrand behaves
    like ``t^(2s) (1-t)^(1-2s)`` times a smooth factor, so Gauss-Jacobi in t
    with those exponents converges spectrally.
    """
    x, w = roots_jacobi(nodes, 1.0 - 2.0 * s, 2.0 * s)
    t = 0.5 * (x + 1.0)
    base = (2.0 * (1.0 - t)) ** (1.0 - 2.0 * s) * (2.0 * t) ** (2.0 * s)
    tn = np.tan(0.5 * np.pi * t)
    m = tn**2
    dm = np.pi * tn * (1.0 + tn**2)
    weights = 0.5 * w / base * dm * m**s
    m.flags.writeable = False
    weights.flags.writeable = False
    return m, weights


def _c_s(s: float) -> float:
    return math.sqrt(math.sin(math.pi * s) / math.pi)


def resolvent_field(u: np.ndarray, grid: Grid, m: float, params: PhysParams) -> np.ndarray:
    """``c_s F^-1[u_hat / (|k|^2 + m)]`` with ``c_s = sqrt(sin(pi s)/pi)``."""
    if not m > 0:
        raise ValueError("m must be positive")
    return ifft(_c_s(params.order) * fft(u) / (grid.k2 + m))


def resolvent_identity_check(
    u: np.ndarray, grid: Grid, params: PhysParams, nodes: int = 200
) -> tuple[float, float, float]:
    """Compare ``int m^s ||grad u_m||^2 dm`` against ``s ||D^s u||^2``.

    The left side is diagonal in Fourier space, so each node costs no
    transform.  Returns ``(lhs, rhs, relerr)``.
    """
    s = params.order
    uh = fft(u)
    spec = np.abs(uh) ** 2 * grid.k2 * grid.cell_volume / grid.size
    m, w = m_quadrature(nodes, s)
    c2 = _c_s(s) ** 2
    lhs = 0.0
    for mj, wj in zip(m, w):
        lhs += wj * c2 * float(np.sum(spec / (grid.k2 + mj) ** 2))
    rhs = s * seminorm_hs(u, grid, s, uh) ** 2
    if rhs == 0:
        return lhs, rhs, 0.0 if lhs == 0 else math.inf
    return lhs, rhs, abs(lhs - rhs) / rhs


def _bridge() -> Polynomial:
    # phi'(1 + t) on t in [0, 1]: value/slope/curvature 2, 2, 0 at t=0 and 0, 0, 0 at t=1
    rows, rhs = [], []
    for t, vals in ((0.0, (2.0, 2.0, 0.0)), (1.0, (0.0, 0.0, 0.0))):
        for d, v in enumerate(vals):
            rows.append([math.perm(j, d) * t ** (j - d) if j >= d else 0.0 for j in range(6)])
            rhs.append(v)
    return Polynomial(np.linalg.solve(np.array(rows), rhs))


@dataclass(frozen=True)
class Cutoff:
    """Radial weight with ``phi = |x|^2`` for ``|x| <= 1`` and ``grad phi = 0`` for ``|x| >= 2``.

    The bridge is a quintic in ``phi'`` making phi C^3 (so the bilaplacian is
    bounded), with both Hessian eigenvalues ``phi''`` and ``phi'/r`` at most 2.
    Beyond ``|x| = 2`` phi is the constant ``phi(2) = 2.2``; only derivatives of
    phi enter the virial and its rate.
    """

    coefficients: tuple[float, ...] = field(default_factory=lambda: tuple(_bridge().coef))

    @property
    def dphi(self) -> Polynomial:
        """``phi'`` on the bridge as a polynomial in ``r - 1``."""
        return Polynomial(self.coefficients)

    def derivatives(self, r: np.ndarray) -> tuple[np.ndarray, ...]:
        """``(phi'/r, phi'', phi''', phi'''')`` at radius ``r``."""
        r = np.asarray(r, dtype=float)
        t = np.clip(r - 1.0, 0.0, 1.0)
        inner, bridge = r <= 1.0, (r > 1.0) & (r < 2.0)
        g = [self.dphi.deriv(d)(t) if d else self.dphi(t) for d in range(4)]
        safe_r = np.where(r > 0, r, 1.0)
        d1r = np.where(inner, 2.0, np.where(bridge, g[0] / safe_r, 0.0))
        d2 = np.where(inner, 2.0, np.where(bridge, g[1], 0.0))
        d3 = np.where(bridge, g[2], 0.0)
        d4 = np.where(bridge, g[3], 0.0)
        return d1r, d2, d3, d4

    def laplacian(self, r: np.ndarray, dim: int) -> np.ndarray:
        d1r, d2, _, _ = self.derivatives(r)
        return d2 + (dim - 1) * d1r

    def bilaplacian(self, r: np.ndarray, dim: int) -> np.ndarray:
        d1r, d2, d3, d4 = self.derivatives(r)
        r = np.asarray(r, dtype=float)
        safe_r = np.where(r > 0, r, 1.0)
        # with h = phi'' + (N-1) phi'/r:  Delta h = h'' + (N-1) h'/r
        h1 = d3 + (dim - 1) * (d2 - d1r) / safe_r
        h2 = d4 + (dim - 1) * (d3 / safe_r - 2.0 * (d2 - d1r) / safe_r**2)
        out = h2 + (dim - 1) * h1 / safe_r
        return np.where((r > 1.0) & (r < 2.0), out, 0.0)


@dataclass(frozen=True)
class VirialConfig:
    """Localized virial weight ``phi_R(x) = R^2 phi(x/R)`` and m-quadrature size."""

    radius: float
    nodes: int = 200
    cutoff: Cutoff = field(default_factory=Cutoff)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("virial radius must be positive")

    @classmethod
    def for_grid(cls, grid: Grid, nodes: int = 200) -> "VirialConfig":
        return cls(grid.half_length / 3.0, nodes)


class _Weights(NamedTuple):
    grad_over_r: np.ndarray  # phi_R'/r
    hess_radial: np.ndarray  # phi_R''
    lap: np.ndarray  # Delta phi_R
    bilap: np.ndarray  # Delta^2 phi_R
    outside: np.ndarray  # |x| > R


_weights_cache: dict = {}


def _weights(grid: Grid, config: VirialConfig) -> _Weights:
    key = (grid, config.radius, config.cutoff)
    if key not in _weights_cache:
        R = config.radius
        rho = grid.r / R
        d1r, d2, _, _ = config.cutoff.derivatives(rho)
        w = _Weights(
            np.broadcast_to(d1r, grid.shape),
            np.broadcast_to(d2, grid.shape),
            np.broadcast_to(config.cutoff.laplacian(rho, grid.dim), grid.shape),
            np.broadcast_to(config.cutoff.bilaplacian(rho, grid.dim) / R**2, grid.shape),
            np.broadcast_to(rho > 1.0, grid.shape),
        )
        _weights_cache[key] = w
    return _weights_cache[key]


def localized_virial(u: np.ndarray, grid: Grid, config: VirialConfig, uh: np.ndarray | None = None) -> float:
    """``2 Im int conj(u) grad(phi_R) . grad(u) dx`` with a spectral gradient."""
    w = _weights(grid, config)
    grads = spectral_gradient(u, grid, uh)
    radial = sum(x * g for x, g in zip(grid.coords, grads))
    return 2.0 * grid.integrate(np.imag(np.conj(u) * w.grad_over_r * radial))


class VirialRate(NamedTuple):
    """Rate identity for the localized virial and its lower bound.

    ``main`` is ``8 s ||D^s u||^2 - 4N(p-1)/(p+1) ||u||_{p+1}^{p+1}``, the rate
    for the untruncated weight ``|x|^2``; ``corrections = main - lower_bound``
    collects the exterior, annulus and bilaplacian terms, evaluated exactly,
    plus the m-quadrature defect of the kinetic term.
    """

    rate_identity: float
    lower_bound: float
    main: float
    corrections: float


def virial_rate(u: np.ndarray, grid: Grid, params: PhysParams, config: VirialConfig) -> VirialRate:
    N, s, p = params.dim, params.order, params.power
    wts = _weights(grid, config)
    m, qw = m_quadrature(config.nodes, s)
    cs = _c_s(s)
    dV = grid.cell_volume
    uh = fft(u)
    zero = np.zeros(grid.shape, dtype=bool)
    zero[(0,) * N] = True
    mean = uh[(0,) * N] / grid.size
    wh = np.where(zero, 0.0, uh)
    coords = grid.coords
    r = grid.r
    safe_r = np.where(r > 0, r, 1.0)

    grad_sq = np.zeros(grid.shape)
    radial_sq = np.zeros(grid.shape)
    resolvent_sq = np.zeros(grid.shape)
    for mj, qj in zip(m, qw):
        vh = cs * wh / (grid.k2 + mj)
        grads = [ifft(1j * k * vh) for k in grid.dkvecs]
        radial = sum(x * g for x, g in zip(coords, grads)) / safe_r
        grad_sq += qj * sum(np.abs(g) ** 2 for g in grads)
        radial_sq += qj * np.abs(radial) ** 2
        resolvent_sq += qj * np.abs(ifft(vh)) ** 2

    # conj(g) Hess(phi_R) g = (phi'/r) |g|^2 + (phi'' - phi'/r) |x.g/r|^2
    hess_term = 4.0 * dV * float(np.sum(wts.grad_over_r * grad_sq + (wts.hess_radial - wts.grad_over_r) * radial_sq))
    # u_m = c_s mean/m + w_m: the mean-mean part integrates Delta^2 phi_R to zero, the
    # cross part is m-integrated in closed form via int m^(s-1)/(m+a) = pi a^(s-1)/sin(pi s)
    cross_h = np.where(zero, 0.0, wh * np.where(zero, 1.0, grid.k2) ** (s - 1.0))
    cross = 2.0 * dV * float(np.sum(wts.bilap * np.real(np.conj(mean) * ifft(cross_h))))
    bilap_term = dV * float(np.sum(wts.bilap * resolvent_sq)) + cross
    up1 = np.abs(u) ** (p + 1.0)
    nonlinear = 2.0 * (p - 1.0) / (p + 1.0) * dV * float(np.sum(wts.lap * up1))
    rate = hess_term - bilap_term - nonlinear

    A = 4.0 * N * (p - 1.0) / (p + 1.0)
    K = seminorm_hs(u, grid, s, uh) ** 2
    P = dV * float(np.sum(up1))
    main = 8.0 * s * K - A * P
    out = wts.outside
    lam_min = np.minimum(wts.hess_radial, wts.grad_over_r) if N > 1 else wts.hess_radial
    k_ext = dV * float(np.sum(grad_sq[out]))
    k_lam = dV * float(np.sum((lam_min * grad_sq)[out]))
    p_ext = dV * float(np.sum(up1[out]))
    nl_ann = 2.0 * (p - 1.0) / (p + 1.0) * dV * float(np.sum((wts.lap * up1)[out]))
    # the quadrature form of s||D^s u||^2 keeps the bound exact; its defect joins the corrections
    k_quad = dV * float(np.sum(grad_sq))
    lower = 8.0 * k_quad - A * P - 8.0 * k_ext + 4.0 * k_lam + A * p_ext - nl_ann - bilap_term
    return VirialRate(rate, lower, main, main - lower)


def strichartz_accumulate(
    accum_prev: float,
    u: np.ndarray,
    grid: Grid,
    dt: float,
    params: PhysParams,
    norm_prev: float | None = None,
) -> tuple[float, float]:
    """Advance ``(int_0^t ||u||_{r_c}^{q_c} dt)^(1/q_c)`` by one interval.

    Uses the trapezoid rule when the previous sample's norm is given, the
    right-endpoint rule otherwise.  Returns ``(accum, ||u||_{r_c})``.
    """
    pair = diagonal_pair(params)
    q = pair.q
    nrm = norm_lp(u, grid, pair.r)
    inc = 0.5 * (norm_prev**q + nrm**q) if norm_prev is not None else nrm**q
    return (accum_prev**q + abs(dt) * inc) ** (1.0 / q), nrm


def spectral_tail_fraction(uh: np.ndarray, grid: Grid, params: PhysParams) -> float:
    """Share of ``||D^s u||^2`` carried by modes with ``max|k_j|`` in the outer third."""
    w = grid.symbol(params.order) * np.abs(uh) ** 2
    total = float(np.sum(w))
    if total == 0:
        return 0.0
    kmax = np.pi / grid.spacing
    tail = np.zeros(grid.shape, dtype=bool)
    for k in grid.kvecs:
        tail = tail | (np.abs(k) > 2.0 / 3.0 * kmax)
    return float(np.sum(w[tail])) / total


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    mass: float
    energy: float
    hs_seminorm_sq: float
    lp1_norm: float
    virial: float
    virial_rate_fd: float
    virial_rate_id: float
    virial_lower_bound: float
    strichartz_accum: float
    coercivity_gap: float
    c_delta: float
    spectral_tail: float
    flags: str = ""

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @property
    def flag_set(self) -> set[str]:
        return set(self.flags.split("|")) - {""}


@dataclass(frozen=True)
class DetectorThresholds:
    lp1_decay: float = 0.5
    strichartz_window: float = 0.1
    strichartz_increment: float = 1e-3
    hs_growth: float = 25.0
    spectral_tail: float = 0.1


class Monitor:
    """Callback for :func:`fnls.evolution.evolve` building the diagnostics history.

    The virial rate identity is evaluated every ``rate_every`` samples (it
    costs ``(N+1) * nodes`` transforms); other records carry NaN there.  The
    centered finite-difference rate of record ``i`` is filled in when record
    ``i+1`` arrives.  ``sink`` receives each record once it is final.  The
    run halts once ``||D^s u||^2`` exceeds ``hs_growth`` times its initial
    value; a heavy spectral tail only raises a flag.
    """

    def __init__(
        self,
        grid: Grid,
        params: PhysParams,
        ground=None,
        virial: VirialConfig | None = None,
        thresholds: DetectorThresholds = DetectorThresholds(),
        rate_every: int = 1,
        sink: Callable[[DiagnosticsRecord], None] | None = None,
    ):
        self.grid, self.params, self.ground = grid, params, ground
        self.virial = virial or VirialConfig.for_grid(grid)
        self.thresholds = thresholds
        self.rate_every = max(1, int(rate_every))
        self.sink = sink
        self.history: list[DiagnosticsRecord] = []
        self._norm_prev: float | None = None

    def __call__(self, state) -> bool:
        g, pp = self.grid, self.params
        u = state.field
        uh = fft(u)
        K = kinetic(u, g, pp, uh)
        P = potential(u, g, pp)
        n = len(self.history)
        if n == 0:
            accum, self._norm_prev = strichartz_accumulate(0.0, u, g, 0.0, pp)
        else:
            dt = state.time - self.history[-1].time
            accum, self._norm_prev = strichartz_accumulate(
                self.history[-1].strichartz_accum, u, g, dt, pp, self._norm_prev
            )
        if n % self.rate_every == 0:
            vr = virial_rate(u, g, pp, self.virial)
            rate_id, lower = vr.rate_identity, vr.lower_bound
        else:
            rate_id = lower = math.nan
        if self.ground is not None and pp.s_c > 0:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                cg = coercivity_gap(u, g, pp, self.ground)
            gap, c_delta = cg.gap, cg.c_delta
        else:
            gap = K - pp.dim * (pp.power - 1) / (2 * pp.order * (pp.power + 1)) * P
            c_delta = math.nan
        tail = spectral_tail_fraction(uh, g, pp)
        flags = []
        k0 = self.history[0].hs_seminorm_sq if n else K
        halt = False
        if k0 > 0 and K > self.thresholds.hs_growth * k0:
            flags.append("hs-growth")
            halt = True
        if tail > self.thresholds.spectral_tail:
            flags.append("spectral-tail")
        rec = DiagnosticsRecord(
            time=state.time,
            mass=mass(u, g),
            energy=0.5 * K - P / (pp.power + 1.0),
            hs_seminorm_sq=K,
            lp1_norm=P,
            virial=localized_virial(u, g, self.virial, uh),
            virial_rate_fd=math.nan,
            virial_rate_id=rate_id,
            virial_lower_bound=lower,
            strichartz_accum=accum,
            coercivity_gap=gap,
            c_delta=c_delta,
            spectral_tail=tail,
            flags="|".join(flags),
        )
        if n >= 2:
            a, b = self.history[-2], self.history[-1]
            fd = (rec.virial - a.virial) / (rec.time - a.time)
            self.history[-1] = replace(b, virial_rate_fd=fd)
        if n >= 1 and self.sink is not None:
            self.sink(self.history[-1])
        self.history.append(rec)
        return halt

    def finalize(self) -> None:
        """Emit the last record to the sink."""
        if self.history and self.sink is not None:
            self.sink(self.history[-1])


def detect_outcome(
    history: list[DiagnosticsRecord],
    params: PhysParams,
    ground,
    limits: DetectorThresholds = DetectorThresholds(),
    overflow: bool = False,
) -> set[str]:
    """Classify a finished run from its record history.

    Returns a set holding exactly one of :data:`SCATTERING`, :data:`BLOWUP`
    or :data:`UNDETERMINED`; blowup sets also name the triggers.
    """
    th = limits
    if overflow:
        return {BLOWUP, "overflow"}
    if len(history) < 10:
        return {UNDETERMINED}
    k0 = history[0].hs_seminorm_sq
    triggers = set()
    for rec in history:
        if k0 > 0 and rec.hs_seminorm_sq > th.hs_growth * k0:
            triggers.add("hs-growth")
        if rec.spectral_tail > th.spectral_tail:
            triggers.add("spectral-tail")
    if triggers:
        return {BLOWUP} | triggers

    lp1 = np.array([r.lp1_norm for r in history])
    if lp1.max() == 0:
        return {UNDETERMINED}
    decayed = lp1[-1] <= (1.0 - th.lp1_decay) * lp1.max()
    T = history[-1].time
    acc_T = history[-1].strichartz_accum
    t0 = (1.0 - th.strichartz_window) * T
    acc_w = np.interp(t0, [r.time for r in history], [r.strichartz_accum for r in history])
    settled = acc_T > 0 and (acc_T - acc_w) < th.strichartz_increment * acc_T
    below = True
    if ground is not None and params.s_c > 0:
        a = params.mass_exponent
        tk = thresholds(ground, params)[1]
        below = all(r.mass**a * r.hs_seminorm_sq < tk for r in history)
    if decayed and settled and below:
        return {SCATTERING}
    return {UNDETERMINED}


class Drift(NamedTuple):
    mass_drift: float
    energy_drift: float
    sponge_active: bool
    mass_loss: float
    mass_nonincreasing: bool


def conservation_drift(history: list[DiagnosticsRecord], sponge: bool = False) -> Drift:
    """Largest relative deviation of mass and energy from their initial values.

    With the sponge on, mass loss is reported separately along with whether
    the mass sequence is non-increasing.
    """
    if len(history) < 2:
        raise ValueError("need at least two samples")
    m = np.array([r.mass for r in history])
    e = np.array([r.energy for r in history])
    md = float(np.max(np.abs(m - m[0])) / m[0]) if m[0] else 0.0
    ed = float(np.max(np.abs(e - e[0])) / abs(e[0])) if e[0] else float(np.max(np.abs(e)))
    loss = float((m[0] - m[-1]) / m[0]) if m[0] else 0.0
    mono = bool(np.all(np.diff(m) <= 1e-14 * m[0]))
    return Drift(md, ed, sponge, loss, mono)
