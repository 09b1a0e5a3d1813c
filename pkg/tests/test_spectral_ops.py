import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import poisson_generator, poisson_kernel
from levy_schrodinger import _kernels
from levy_schrodinger.grid import Grid, GridFunction, sample
from levy_schrodinger.levy_core import GeneratingTriplet, cauchy_measure, cauchy_triplet, gaussian_triplet, spectral_symbol
from levy_schrodinger.spectral_ops import (apply_generator_quadrature, apply_generator_spectral,
                                           delta, delta2, jump_cross_integral,
                                           product_rule_residual)
from levy_schrodinger.dirichlet import bump


@pytest.mark.parametrize("backend", ["numba", "numpy"])
def test_quadrature_matches_poisson_kernel(cauchy, backend):
    g = Grid.symmetric(40.0, 4096)
    out = apply_generator_quadrature(sample(g, poisson_kernel), cauchy, backend=backend)
    assert np.max(np.abs(out.values - poisson_generator(g.x))) < 1e-8


def test_quadrature_scales_with_measure():
    g = Grid.symmetric(40.0, 2048)
    f = sample(g, poisson_kernel)
    t2 = GeneratingTriplet(levy=cauchy_measure(2.0))
    out = apply_generator_quadrature(f, t2).values
    assert np.max(np.abs(out - 2.0 * poisson_generator(g.x))) < 1e-7


def test_gaussian_generator_is_half_second_derivative():
    g = Grid.symmetric(10.0, 1024)
    f = sample(g, lambda x: np.exp(-x * x))
    out = apply_generator_quadrature(f, gaussian_triplet(2.0)).values
    assert np.allclose(out, (4 * g.x**2 - 2) * np.exp(-g.x**2), atol=1e-8)


def test_spectral_and_quadrature_agree_on_fast_decay(cauchy):
    g = Grid.symmetric(80.0, 8192)
    f = sample(g, lambda x: np.exp(-x * x))
    q = apply_generator_quadrature(f, cauchy).values
    s = apply_generator_spectral(f, spectral_symbol(cauchy)).values
    # the periodic result has zero mean; the 1/x^2 tail of L0 f beyond the box
    # shows up as a constant offset, so compare after removing it
    d = q - s
    w = np.abs(g.x) <= 10
    assert np.max(np.abs(d[w] - np.mean(d[w]))) < 1e-6
    assert abs(np.mean(d)) < 1e-3


def test_spectral_warns_on_boundary_mass(cauchy):
    g = Grid.symmetric(5.0, 256)
    f = sample(g, poisson_kernel)
    with pytest.warns(RuntimeWarning, match="boundary"):
        apply_generator_spectral(f, spectral_symbol(cauchy))


def test_product_rule_student3(cauchy, s3_ground):
    rng = np.random.default_rng(4)
    g = s3_ground.grid
    for _ in range(3):
        f = GridFunction(g, bump(rng.uniform(-3, 3), rng.uniform(0.5, 2))(g.x))
        assert product_rule_residual(s3_ground.phi, f, cauchy) < 1e-6


def test_product_rule_zero_function(cauchy, s3_ground):
    f = GridFunction(s3_ground.grid, np.zeros(s3_ground.grid.n))
    assert product_rule_residual(s3_ground.phi, f, cauchy) == 0.0


def test_cross_integral_gaussian_part():
    g = Grid.symmetric(10.0, 1024)
    phi = sample(g, lambda x: np.exp(-x * x / 2))
    f = GridFunction(g, bump(0.0, 2.0)(g.x))
    got = jump_cross_integral(phi, f, gaussian_triplet(1.0)).values
    dphi = -g.x * phi.values
    df = np.gradient(f.values, g.h)
    assert np.max(np.abs(got - dphi * df)) < 1e-3


# -- discrete identities -------------------------------------------------------------

_G = Grid.symmetric(10.0, 1024)
_F = GridFunction(_G, np.exp(-_G.x**2) * (1 + 0.3 * _G.x))
_P = GridFunction(_G, 1.0 / (1.0 + _G.x**2))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=-40, max_value=40).filter(lambda k: k != 0))
def test_delta_product_identity(k):
    # d(fg) = f dg + g df + df dg
    lhs = delta(_F * _P, k).values
    df, dp = delta(_F, k).values, delta(_P, k).values
    rhs = _F.values * dp + _P.values * df + df * dp
    assert np.max(np.abs(lhs - rhs)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=-80, max_value=80).filter(lambda k: k != 0))
def test_delta2_product_identity(k):
    # d2(fg) = f d2g + g d2f + df dg
    lhs = delta2(_F * _P, k).values
    rhs = (_F.values * delta2(_P, k).values + _P.values * delta2(_F, k).values
           + delta(_F, k).values * delta(_P, k).values)
    assert np.max(np.abs(lhs - rhs)) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(0.3, 2.0), st.floats(-2, 2))
def test_generator_is_linear(c, w, s):
    g = Grid.symmetric(20.0, 512)
    t = cauchy_triplet()
    f1 = GridFunction(g, bump(c, w)(g.x))
    f2 = GridFunction(g, bump(-c, 1.0)(g.x))
    lhs = apply_generator_quadrature(f1 + f2 * s, t).values
    rhs = apply_generator_quadrature(f1, t).values + s * apply_generator_quadrature(f2, t).values
    assert np.max(np.abs(lhs - rhs)) < 1e-10 * (1 + abs(s))


# -- backend twins ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def arrays():
    rng = np.random.default_rng(0)
    K, n = 64, 200
    u = rng.normal(size=n + 2 * K)
    c = 1.0 / np.arange(1, K + 1) ** 2
    return u, c, K, n


def test_second_difference_backends(arrays):
    u, c, K, n = arrays
    a = _kernels.second_difference_sum(u, c, K, n, backend="numba")
    b = _kernels.second_difference_sum(u, c, K, n, backend="numpy")
    assert np.allclose(a, b, rtol=1e-11, atol=1e-11)


def test_cross_difference_backends(arrays):
    u, c, K, n = arrays
    p = np.cos(np.arange(u.size) * 0.1)
    a = _kernels.cross_difference_sum(p, u, c, K, n, backend="numba")
    b = _kernels.cross_difference_sum(p, u, c, K, n, backend="numpy")
    assert np.allclose(a, b, rtol=1e-10, atol=1e-10)


def test_pair_form_backends_and_symmetry(arrays):
    _, c, K, n = arrays
    rng = np.random.default_rng(1)
    L = n + 2 * K
    f, g = np.zeros(L), np.zeros(L)
    f[K + 20: K + 60] = rng.normal(size=40)
    g[K + 40: K + 90] = rng.normal(size=50)
    w = 1.0 + 0.5 * np.sin(np.arange(L) * 0.05)
    lo, hi = K + 20, K + 90
    a = _kernels.pair_form_sum(f, g, w, c, lo, hi, backend="numba")
    b = _kernels.pair_form_sum(f, g, w, c, lo, hi, backend="numpy")
    assert a == pytest.approx(b, rel=1e-11)
    assert _kernels.pair_form_sum(g, f, w, c, lo, hi, backend="numba") == a
