"""Grids, the fractional Laplacian multiplier and discrete norms."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fnls.spectral import (
    fft,
    fractional_laplacian,
    ifft,
    is_radial,
    make_grid,
    norm_l2,
    norm_lp,
    seminorm_hs,
    spectral_gradient,
)


def test_grid_1d_spacing_and_wavenumbers():
    g = make_grid(1, 16, 8.0)
    assert g.spacing == 1.0
    assert np.allclose(np.sort(g.wavenumbers), np.pi / 8 * np.arange(-8, 8))
    assert g.x1d[0] == -8.0


def test_grid_default_spacing():
    assert make_grid(2, 256, 20.0).spacing == 0.15625


def test_grid_3d_size():
    g = make_grid(3, 16, 4.0)
    assert g.size == 4096 and g.shape == (16, 16, 16)


@pytest.mark.parametrize("args", [(4, 16, 1.0), (2, 100, 1.0), (2, 8, 1.0), (2, 16, 0.0), (1, 32, -2.0)])
def test_grid_rejects_bad_arguments(args):
    with pytest.raises(ValueError):
        make_grid(*args)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_plane_wave_is_eigenmode(dim):
    g = make_grid(dim, 16, np.pi)
    k = np.array([3, -2, 1][:dim], dtype=float)
    phase = sum(kj * c for kj, c in zip(k, g.coords))
    f = np.exp(1j * phase)
    s = 0.75
    out = fractional_laplacian(f, g, s)
    assert np.max(np.abs(out - np.linalg.norm(k) ** (2 * s) * f)) < 1e-12 * np.linalg.norm(k) ** (2 * s)


def test_constant_maps_to_zero():
    g = make_grid(2, 32, 3.0)
    assert np.max(np.abs(fractional_laplacian(np.full(g.shape, 2.5 + 0j), g, 0.3))) < 1e-14


def test_rejects_nonfinite_input():
    g = make_grid(1, 16, 1.0)
    f = np.ones(g.shape, dtype=complex)
    f[3] = np.nan
    with pytest.raises(ValueError):
        fractional_laplacian(f, g, 0.5)


def test_half_laplacian_of_gaussian_at_origin_matches_quadrature():
    # oracle: inverse transform of |xi| * (unitary transform of e^{-x^2}) at x = 0
    val, _ = quad(lambda xi: abs(xi) * np.exp(-xi**2 / 4) * np.sqrt(0.5), -np.inf, np.inf, epsabs=1e-14)
    oracle = val / np.sqrt(2 * np.pi)
    # the result decays like 1/x^2, so periodic images cost ~ zeta(2)/(sqrt(pi) L^2); L = 2048 keeps that near 1e-7
    g = make_grid(1, 2**17, 2048.0)
    out = fractional_laplacian(g.sample(lambda r: np.exp(-r**2)), g, 0.5)
    assert abs(out[g.points_per_dim // 2].real - oracle) < 1e-6 * abs(oracle)


def test_gaussian_mass():
    g = make_grid(1, 256, 8.0)
    assert abs(norm_l2(g.sample(lambda r: np.exp(-r**2)), g) ** 2 - np.sqrt(np.pi / 2)) < 1e-10


def test_seminorm_of_plane_wave():
    g = make_grid(2, 32, np.pi)
    f = np.exp(1j * (2 * g.coords[0] + g.coords[1]))
    kmag = np.sqrt(5.0)
    for sigma in (0.3, 0.75, 1.0):
        assert np.isclose(seminorm_hs(f, g, sigma), kmag**sigma * norm_l2(f, g), rtol=1e-12)


def test_seminorm_order_zero_drops_mean():
    g = make_grid(2, 64, 5.0)
    f = g.sample(lambda r: np.exp(-r**2))
    mean_free = f - f.mean()
    assert np.isclose(seminorm_hs(mean_free, g, 0), norm_l2(mean_free, g), rtol=1e-12)
    assert seminorm_hs(f + 1.0, g, 0) == pytest.approx(seminorm_hs(f, g, 0), rel=1e-12)


def test_gradient_of_plane_wave():
    g = make_grid(2, 16, np.pi)
    f = np.broadcast_to(np.exp(1j * 3 * g.coords[1]), g.shape)
    dx, dy = spectral_gradient(f, g)
    assert np.max(np.abs(dx)) < 1e-12
    assert np.max(np.abs(dy - 3j * f)) < 1e-12


def test_lp_norm_of_constant():
    g = make_grid(1, 32, 2.0)
    assert norm_lp(np.full(g.shape, 3.0), g, 4) == pytest.approx(3.0 * 4.0 ** 0.25)


def test_radial_check():
    g = make_grid(2, 64, 6.0)
    assert is_radial(g.sample(lambda r: np.exp(-r**2)))
    assert is_radial(np.zeros(g.shape))
    off = np.exp(-((g.coords[0] - 0.5) ** 2 + g.coords[1] ** 2))
    assert not is_radial(off)
    aniso = np.exp(-(g.coords[0] ** 2 + 2 * g.coords[1] ** 2))
    assert not is_radial(aniso)


fields = st.integers(min_value=0, max_value=2**31 - 1).map(
    lambda seed: np.random.default_rng(seed).standard_normal((32, 32))
    + 1j * np.random.default_rng(seed + 1).standard_normal((32, 32))
)


@settings(max_examples=30, deadline=None)
@given(fields)
def test_fft_round_trip(u):
    assert np.max(np.abs(ifft(fft(u)) - u)) < 1e-12 * np.max(np.abs(u))


@settings(max_examples=30, deadline=None)
@given(fields)
def test_parseval(u):
    g = make_grid(2, 32, 4.0)
    spectral = np.sqrt(g.cell_volume / g.size * np.sum(np.abs(fft(u)) ** 2))
    assert np.isclose(spectral, norm_l2(u, g), rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(fields, st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_multiplier_semigroup(u, a, b):
    g = make_grid(2, 32, 4.0)
    u = u - u.mean()
    lhs = fractional_laplacian(fractional_laplacian(u, g, a), g, b)
    rhs = fractional_laplacian(u, g, a + b)
    assert np.max(np.abs(lhs - rhs)) < 1e-10 * np.max(np.abs(rhs))


@settings(max_examples=30, deadline=None)
@given(fields, st.floats(0.05, 0.95))
def test_laplacian_is_symmetric(u, s):
    g = make_grid(2, 32, 4.0)
    v = np.roll(u, 5, axis=0).conj()
    lhs = g.integrate(np.conj(v) * fractional_laplacian(u, g, s))
    rhs = g.integrate(np.conj(fractional_laplacian(v, g, s)) * u)
    assert np.isclose(lhs, rhs, rtol=1e-10, atol=1e-10)
