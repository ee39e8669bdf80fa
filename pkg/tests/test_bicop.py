import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

import oracles
from conftest import FAMILIES, random_copula
from hetcop import bicop


def test_independence_closed_forms():
    c = bicop.Independence()
    u = np.array([0.1, 0.5, 0.9])
    v = np.array([0.3, 0.3, 0.7])
    assert_allclose(c.pdf(u, v), 1.0)
    assert_allclose(c.cdf(u, v), u * v)
    assert_allclose(c.h1(v, u), v)
    assert_allclose(c.h2(u, v), u)
    assert_allclose(c.h1inv(v, u), v)


def test_t_density_matches_scipy():
    u = np.array([0.05, 0.3, 0.5, 0.77, 0.99])
    v = np.array([0.2, 0.9, 0.5, 0.71, 0.02])
    for rho, nu in [(0.3, 4.0), (0.8, 12.0), (0.0, 2.5)]:
        assert_allclose(bicop.StudentT(rho, nu).pdf(u, v), oracles.t_copula_density(u, v, rho, nu), rtol=1e-8)


def test_gumbel_density_matches_closed_form():
    u = np.array([0.05, 0.3, 0.5, 0.77, 0.99])
    v = np.array([0.2, 0.9, 0.5, 0.71, 0.02])
    for tau in (0.1, 0.5, 0.8):
        assert_allclose(bicop.Gumbel(tau).pdf(u, v), oracles.gumbel_density(u, v, 1 / (1 - tau)), rtol=1e-10)
        assert_allclose(bicop.ConvexGumbel(tau, 0.3).pdf(u, v),
                        oracles.convex_gumbel_density(u, v, tau, 0.3), rtol=1e-10)


def test_mixture_density_formula():
    u = np.array([0.05, 0.3, 0.5, 0.77, 0.99])
    v = np.array([0.2, 0.9, 0.5, 0.71, 0.02])
    c = bicop.mixture_t(0.3, 0.6, 5.0, 0.4, 9.0)
    assert_allclose(c.pdf(u, v), oracles.mixture_t_density(u, v, 0.3, 0.6, 5.0, 0.4, 9.0), rtol=1e-8)


@pytest.mark.parametrize("family", FAMILIES)
def test_cdf_matches_double_integral(family, rng):
    c = random_copula(family, rng)
    for u, v in [(0.3, 0.6), (0.8, 0.15), (0.5, 0.5)]:
        assert_allclose(c.cdf(u, v), oracles.integrate_density(c.pdf, u, v), atol=1e-8)


@pytest.mark.parametrize("family", FAMILIES)
def test_cdf_boundaries(family, rng):
    c = random_copula(family, rng)
    x = np.array([0.0, 0.2, 0.7, 1.0])
    assert_allclose(c.cdf(x, np.ones(4)), x, atol=1e-12)
    assert_allclose(c.cdf(np.ones(4), x), x, atol=1e-12)
    assert_allclose(c.cdf(np.zeros(4), x), 0.0, atol=1e-12)


@pytest.mark.parametrize("family", FAMILIES)
def test_density_integrates_to_one(family, rng):
    for _ in range(20):
        c = random_copula(family, rng)
        assert abs(oracles.integrate_density(c.pdf) - 1.0) < 1e-4


@pytest.mark.parametrize("family", FAMILIES)
def test_h_functions_are_cdf_derivatives(family, rng):
    c = random_copula(family, rng)
    u = rng.uniform(0.05, 0.95, 30)
    v = rng.uniform(0.05, 0.95, 30)
    d = 1e-5
    fd1 = (c.cdf(u + d, v) - c.cdf(u - d, v)) / (2 * d)
    fd2 = (c.cdf(u, v + d) - c.cdf(u, v - d)) / (2 * d)
    assert_allclose(c.h1(v, u), fd1, atol=1e-5)
    assert_allclose(c.h2(u, v), fd2, atol=1e-5)


@pytest.mark.parametrize("family", FAMILIES)
def test_h_inverse_roundtrip(family, rng):
    c = random_copula(family, rng)
    q = rng.uniform(size=200)
    u = rng.uniform(size=200)
    assert_allclose(c.h1(c.h1inv(q, u), u), q, atol=1e-8)
    assert_allclose(c.h2(c.h2inv(q, u), u), q, atol=1e-8)


def test_h_inverse_extreme_quantiles():
    c = bicop.mixture_t(0.5, 0.9, 3.0, 0.9, 3.0)
    q = np.array([1e-9, 1e-6, 0.5, 1 - 1e-6])
    u = np.array([0.5, 1e-4, 1 - 1e-8, 0.3])
    x = c.h1inv(q, u)
    assert np.all((x > 0) & (x < 1))
    assert_allclose(c.h1(x, u), q, atol=1e-8)


def test_h_inverse_below_clamp_returns_edge():
    # the exact root lies below the 1e-10 clamp: the edge value is returned
    c = bicop.mixture_t(0.5, 0.9, 3.0, 0.9, 3.0)
    assert c.h1inv(1e-12, 1e-8) == pytest.approx(bicop.EPS)


def test_evaluate_matches_separate_calls(rng):
    c = random_copula("mixture_cg", rng)
    u, v = rng.uniform(size=(2, 50))
    lp, a, b = c.evaluate(u, v)
    assert_allclose(lp, c.logpdf(u, v))
    assert_allclose(a, c.h1(v, u))
    assert_allclose(b, c.h2(u, v))


def test_rotation_flips_concordance():
    g = bicop.Gumbel(0.5)
    r = bicop.Rotated90(g)
    assert r.spearman_rho() == pytest.approx(-g.spearman_rho(), abs=1e-6)
    u, v = 0.2, 0.7
    assert r.pdf(u, v) == pytest.approx(g.pdf(1 - u, v), rel=1e-12)


def test_spearman_known_values():
    # Gaussian: (6/pi) asin(rho/2)
    rho = 0.6
    assert bicop.Gaussian(rho).spearman_rho() == pytest.approx(6 / np.pi * np.arcsin(rho / 2), abs=1e-6)
    assert bicop.Independence().spearman_rho() == 0.0


def test_mixture_with_equal_components_is_near_independent_in_levels():
    # symmetric cross shape: level Spearman vanishes when w = 1/2 and components match
    c = bicop.mixture_t(0.5, 0.8, 4.0, 0.8, 4.0)
    assert abs(c.spearman_rho()) < 1e-6


@pytest.mark.parametrize("row", sorted(oracles.BENCHMARK_ROWS))
def test_benchmark_level_spearman_near_zero(row):
    c = bicop.mixture_t(*oracles.BENCHMARK_ROWS[row])
    assert abs(c.spearman_rho()) < oracles.BENCHMARK_RHO_Y_BOUND


def test_tail_dependence_of_mixture_scales_component():
    a = bicop.StudentT(0.7, 4.0)
    m = bicop.Mixture(0.4, a, bicop.StudentT(0.2, 10.0))
    assert_allclose(m.tail_dependence(), 0.4 * np.asarray(a.tail_dependence()))


def test_sample_matches_spearman(rng):
    c = bicop.mixture_cg(0.8, 0.5, 0.7, 0.3, 0.5)
    x = c.sample(100_000, seed=5)
    from scipy.stats import spearmanr

    assert spearmanr(x[:, 0], x[:, 1])[0] == pytest.approx(c.spearman_rho(), abs=0.01)


class TestValidation:
    def test_out_of_range_arguments(self):
        c = bicop.Gumbel(0.3)
        with pytest.raises(bicop.DomainError):
            c.pdf(1.2, 0.5)
        with pytest.raises(bicop.DomainError):
            c.h1(np.nan, 0.5)

    @pytest.mark.parametrize("ctor", [
        lambda: bicop.StudentT(1.0, 5.0),
        lambda: bicop.StudentT(0.5, 1.5),
        lambda: bicop.StudentT(0.5, 41.0),
        lambda: bicop.Gumbel(1.0),
        lambda: bicop.ConvexGumbel(0.3, 1.5),
        lambda: bicop.mixture_t(1.2, 0.3, 4, 0.3, 4),
    ])
    def test_invalid_parameters(self, ctor):
        with pytest.raises(bicop.InvalidParameterError):
            ctor()

    def test_mixture_components_must_match(self):
        with pytest.raises(bicop.InvalidParameterError):
            bicop.Mixture(0.5, bicop.StudentT(0.3, 4), bicop.ConvexGumbel(0.3, 0.5))


@pytest.mark.parametrize("family", FAMILIES)
def test_dict_roundtrip(family, rng):
    c = random_copula(family, rng)
    d = bicop.from_dict(c.to_dict())
    assert_allclose(d.to_vector(), c.to_vector())
    assert d.pdf(0.3, 0.8) == pytest.approx(c.pdf(0.3, 0.8), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(u=st.floats(1e-6, 1 - 1e-6), v1=st.floats(1e-6, 1 - 1e-6), v2=st.floats(1e-6, 1 - 1e-6))
def test_h1_monotone_in_conditioned_argument(u, v1, v2):
    c = bicop.mixture_t(0.4, 0.7, 5.0, 0.5, 12.0)
    lo, hi = min(v1, v2), max(v1, v2)
    assert c.h1(lo, u) <= c.h1(hi, u) + 1e-12


@settings(max_examples=40, deadline=None)
@given(u=st.floats(0.0, 1.0), v=st.floats(0.0, 1.0))
def test_cdf_frechet_bounds(u, v):
    c = bicop.mixture_cg(0.6, 0.4, 0.3, 0.2, 0.8)
    val = c.cdf(u, v)
    assert max(u + v - 1, 0) - 1e-9 <= val <= min(u, v) + 1e-9
