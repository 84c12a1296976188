"""Periodic Cartesian grids, FFT helpers, the fractional Laplacian and norms.

Whole space is approximated by the torus ``[-L, L)^N``.  Fields are plain
complex ``numpy`` arrays of shape ``(M,) * N`` (row-major), always paired
with the :class:`Grid` they live on.

FFT convention: forward transform unnormalized, inverse divided by ``M**N``.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

log = logging.getLogger(__name__)

__all__ = [
    "Grid",
    "make_grid",
    "fft",
    "ifft",
    "fractional_laplacian",
    "norm_l2",
    "norm_lp",
    "seminorm_hs",
    "spectral_gradient",
    "check_finite",
    "is_radial",
    "boundary_ratio",
    "warn_if_boundary_amplitude",
]


def _workers() -> int:
    n = os.environ.get("FNLS_THREADS")
    return max(1, int(n)) if n else 1


def fft(u: np.ndarray) -> np.ndarray:
    return sfft.fftn(u, workers=_workers())


def ifft(uh: np.ndarray) -> np.ndarray:
    return sfft.ifftn(uh, workers=_workers())


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L, L)^N``.

    Parameters
    ----------
    dim : int
        Spatial dimension N (1, 2 or 3).
    points_per_dim : int
        Points per axis M, a power of two.
    half_length : float
        Half box length L.
    """

    dim: int
    points_per_dim: int
    half_length: float
    spacing: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "spacing", 2.0 * self.half_length / self.points_per_dim)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_dim,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_dim**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @cached_property
    def x1d(self) -> np.ndarray:
        M = self.points_per_dim
        return self.spacing * (np.arange(M) - M // 2)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Per-axis wavenumbers ``pi/L * {-M/2, ..., M/2-1}`` in FFT order."""
        M = self.points_per_dim
        return (np.pi / self.half_length) * np.fft.fftfreq(M, d=1.0 / M)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.x1d] * self.dim), indexing="ij", sparse=True))

    @cached_property
    def kvecs(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.wavenumbers] * self.dim), indexing="ij", sparse=True))

    @cached_property
    def dkvecs(self) -> tuple[np.ndarray, ...]:
        """Wavenumbers for odd derivatives: the Nyquist entry is zeroed so real fields keep real gradients."""
        k = self.wavenumbers.copy()
        k[self.points_per_dim // 2] = 0.0
        return tuple(np.meshgrid(*([k] * self.dim), indexing="ij", sparse=True))

    @cached_property
    def r(self) -> np.ndarray:
        return np.sqrt(sum(c**2 for c in self.coords))

    @cached_property
    def k2(self) -> np.ndarray:
        return sum(k**2 for k in self.kvecs)

    @cached_property
    def kabs(self) -> np.ndarray:
        return np.sqrt(self.k2)

    def symbol(self, order: float) -> np.ndarray:
        """``|k|^(2*order)`` with the zero mode set to 0."""
        out = np.zeros(self.shape)
        nz = self.k2 > 0
        out[nz] = self.k2[nz] ** order
        return out

    def integrate(self, density: np.ndarray) -> float:
        return float(np.sum(density).real * self.cell_volume)

    def sample(self, func) -> np.ndarray:
        """Evaluate a radial profile ``func(r)`` on the grid."""
        return np.asarray(func(self.r), dtype=complex)


def make_grid(dim: int, points_per_dim: int, half_length: float) -> Grid:
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    M = int(points_per_dim)
    if M != points_per_dim or M < 16 or M & (M - 1):
        raise ValueError(f"points_per_dim must be a power of two >= 16, got {points_per_dim}")
    if not half_length > 0:
        raise ValueError(f"half_length must be positive, got {half_length}")
    return Grid(dim, M, float(half_length))


def check_finite(u: np.ndarray, what: str = "field") -> None:
    if not np.all(np.isfinite(u)):
        raise ValueError(f"{what} contains NaN or Inf")


def fractional_laplacian(u: np.ndarray, grid: Grid, order: float) -> np.ndarray:
    """Apply ``(-Delta)^order`` as the Fourier multiplier ``|k|^(2*order)``."""
    if not order > 0:
        raise ValueError("order must be positive")
    check_finite(u)
    return ifft(grid.symbol(order) * fft(u))


def spectral_gradient(u: np.ndarray, grid: Grid, uh: np.ndarray | None = None) -> list[np.ndarray]:
    if uh is None:
        uh = fft(u)
    return [ifft(1j * k * uh) for k in grid.dkvecs]


def norm_l2(u: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(grid.cell_volume * np.sum(np.abs(u) ** 2)))


def norm_lp(u: np.ndarray, grid: Grid, q: float) -> float:
    if q < 1:
        raise ValueError("q must be >= 1")
    return float((grid.cell_volume * np.sum(np.abs(u) ** q)) ** (1.0 / q))


def seminorm_hs(u: np.ndarray, grid: Grid, order: float, uh: np.ndarray | None = None) -> float:
    """Homogeneous ``H^order`` seminorm ``|| |k|^order u_hat ||`` via Parseval."""
    if order < 0:
        raise ValueError("order must be >= 0")
    if uh is None:
        uh = fft(u)
    w = grid.symbol(order) if order > 0 else (grid.k2 > 0).astype(float)
    return float(np.sqrt(grid.cell_volume / grid.size * np.sum(w * np.abs(uh) ** 2)))


def _hyperoctahedral_images(a: np.ndarray):
    """All images of ``a`` under axis permutations and reflections x -> -x."""
    from itertools import permutations, product

    M = a.shape[0]
    # reflection about x=0 keeps index 0 (x=-L) fixed modulo the period
    flip_idx = (M - np.arange(M)) % M
    for perm in permutations(range(a.ndim)):
        b = np.transpose(a, perm)
        for signs in product((False, True), repeat=a.ndim):
            c = b
            for ax, s in enumerate(signs):
                if s:
                    c = np.take(c, flip_idx, axis=ax)
            yield c


def is_radial(u: np.ndarray, rtol: float = 1e-10) -> bool:
    """Symmetry check of ``|u|`` under the grid's reflection/permutation group.

    On a Cartesian grid this is the attainable form of radial symmetry:
    points at equal ``|x|`` related by a lattice symmetry must agree.
    """
    a = np.abs(u)
    scale = a.max()
    if scale == 0:
        return True
    return all(np.max(np.abs(img - a)) <= rtol * scale for img in _hyperoctahedral_images(a))


def boundary_ratio(u: np.ndarray, grid: Grid, fraction: float = 0.05) -> float:
    """Max ``|u|`` within ``fraction*L`` of the box edge, relative to max ``|u|``."""
    a = np.abs(u)
    peak = a.max()
    if peak == 0:
        return 0.0
    edge = np.zeros(grid.shape, dtype=bool)
    lim = (1.0 - fraction) * grid.half_length
    for c in grid.coords:
        edge = edge | (np.abs(c) >= lim)
    return float(a[edge].max() / peak)


def warn_if_boundary_amplitude(u: np.ndarray, grid: Grid, threshold: float = 1e-8) -> float:
    ratio = boundary_ratio(u, grid)
    if ratio > threshold:
        log.warning(
            "boundary-adjacent amplitude %.2e of max exceeds %.0e; periodic box may be too small",
            ratio,
            threshold,
        )
    return ratio
