"""Built-in analytic identity suite, runnable without any configuration."""
from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .diagnostics import m_quadrature
from .params import PhysParams, diagonal_pair, is_admissible
from .spectral import fft, fractional_laplacian, make_grid


class CheckResult(NamedTuple):
    name: str
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.error <= self.tolerance


def resolvent_single_mode(nodes: int = 200) -> float:
    """Worst relative error of the m-quadrature of ``c_s^2 |k|^2 m^s/(|k|^2+m)^2``
    against ``s |k|^(2s)`` over a spread of orders and wavenumbers."""
    worst = 0.0
    for s in (0.3, 0.5, 0.75, 0.9):
        m, w = m_quadrature(nodes, s)
        c2 = math.sin(math.pi * s) / math.pi
        for k in (0.05, 0.3, 1.0, 4.0, 20.0):
            a = k * k
            val = float(np.sum(w * c2 * a / (a + m) ** 2))
            worst = max(worst, abs(val / (s * a**s) - 1.0))
    return worst


def multiplier_eigenmode() -> float:
    worst = 0.0
    for dim, M in ((1, 64), (2, 32), (3, 16)):
        g = make_grid(dim, M, 3.0)
        idx = [3, -5, 2][:dim]
        k = [g.wavenumbers[i] for i in idx]
        phase = sum(kj * xj for kj, xj in zip(k, g.coords))
        f = np.exp(1j * phase) * np.ones(g.shape)
        for s in (0.3, 0.75):
            expect = sum(kj**2 for kj in k) ** s * f
            out = fractional_laplacian(f, g, s)
            worst = max(worst, float(np.max(np.abs(out - expect)) / np.max(np.abs(expect))))
    return worst


def parseval() -> float:
    rng = np.random.default_rng(0)
    g = make_grid(2, 64, 5.0)
    f = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    phys = g.cell_volume * np.sum(np.abs(f) ** 2)
    spec = g.cell_volume / g.size * np.sum(np.abs(fft(f)) ** 2)
    return float(abs(phys - spec) / phys)


def window_sample(n: int = 50, seed: int = 0) -> list[PhysParams]:
    """Deterministic (N, s, p) sample of the supercritical window with s >= N/(2N-1)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        N = int(rng.choice((2, 3)))
        lo = N / (2 * N - 1)
        s = float(rng.uniform(lo, 0.999))
        pp_lo, pp_hi = 1 + 4 * s / N, 1 + 4 * s / (N - 2 * s)
        p = float(rng.uniform(pp_lo, min(pp_hi, pp_lo + 20.0)))
        params = PhysParams(N, s, p)
        if params.in_window:
            out.append(params)
    return out


def diagonal_admissibility(n: int = 50) -> float:
    """Number of sampled parameter sets whose diagonal pair fails admissibility."""
    fails = 0
    for params in window_sample(n):
        pair = diagonal_pair(params)
        if not is_admissible(pair.q, pair.r, pair.level, params):
            fails += 1
    return float(fails)


def window_boundaries() -> float:
    """Largest deviation of s_c from 0 and s at the window edges, in exact arithmetic."""
    worst = Fraction(0)
    for N in (2, 3):
        for s in (Fraction(2, 3), Fraction(3, 4), Fraction(9, 10)):
            lower = PhysParams(N, s, 1 + 4 * s / N)
            upper = PhysParams(N, s, 1 + 4 * s / (N - 2 * s))
            worst = max(worst, abs(lower.s_c), abs(upper.s_c - s))
    return float(worst)


def run_checks() -> list[CheckResult]:
    return [
        CheckResult("resolvent_single_mode", resolvent_single_mode(), 1e-6),
        CheckResult("multiplier_eigenmode", multiplier_eigenmode(), 1e-12),
        CheckResult("parseval", parseval(), 1e-12),
        CheckResult("diagonal_pair_admissible_failures", diagonal_admissibility(), 0.0),
        CheckResult("window_boundary_identities", window_boundaries(), 0.0),
    ]
