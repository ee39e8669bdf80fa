import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import stats

from hetcop import margins


@pytest.fixture(scope="module")
def normal_fit():
    x = np.random.default_rng(1).standard_normal(100_000)
    return x, margins.fit_margin(x)


def test_kde_recovers_normal(normal_fit):
    x, m = normal_fit
    grid = np.linspace(-3, 3, 61)
    assert np.max(np.abs(m.cdf(grid) - stats.norm.cdf(grid))) < 0.01
    ks = stats.kstest(x, m.cdf).statistic
    assert ks < 0.01


def test_pdf_integrates_to_one(normal_fit):
    _, m = normal_fit
    g = np.linspace(m.grid[0], m.grid[-1], 200_001)
    assert np.trapezoid(m.pdf(g), g) == pytest.approx(1.0, abs=2e-3)


def test_quantile_roundtrip(normal_fit):
    _, m = normal_fit
    q = np.linspace(1e-6, 1 - 1e-6, 1001)
    assert_allclose(m.cdf(m.ppf(q)), q, atol=1e-9)


def test_tails_beyond_grid_stay_in_unit_interval(normal_fit):
    _, m = normal_fit
    far = np.array([-1e3, -50.0, 50.0, 1e3])
    F = m.cdf(far)
    assert np.all((F >= 0) & (F <= 1))
    assert F[0] <= F[1] and F[2] <= F[3]


def test_pit_is_roughly_uniform():
    x = np.random.default_rng(2).standard_t(4, size=20_000) * 0.01
    u = margins.pit(margins.fit_margin(x), x)
    assert u.min() > 0 and u.max() < 1
    assert stats.kstest(u, "uniform").statistic < 0.01


def test_heavy_tailed_outliers_do_not_break_fit():
    rng = np.random.default_rng(3)
    x = np.concatenate([rng.standard_normal(5000), [80.0, -120.0]])
    m = margins.fit_margin(x)
    assert np.isfinite(m.ppf(0.5))
    assert m.cdf(0.0) == pytest.approx(0.5, abs=0.02)


def test_degenerate_input():
    with pytest.raises(margins.DegenerateMarginError):
        margins.fit_margin(np.ones(500))
    with pytest.raises(ValueError):
        margins.fit_margin(np.arange(10.0))
    with pytest.raises(ValueError):
        margins.fit_margin(np.r_[np.arange(200.0), np.nan])


def test_dict_roundtrip(normal_fit):
    _, m = normal_fit
    m2 = margins.margin_from_dict(m.to_dict())
    x = np.linspace(-4, 4, 17)
    assert_allclose(m2.cdf(x), m.cdf(x))
    assert m2.mean == m.mean


@pytest.mark.parametrize("family,params", [
    ("normal", {"loc": 1.0, "scale": 2.0}),
    ("t", {"df": 5}),
    ("beta", {"a": 1.5, "b": 2.0}),
    ("lognormal", {"sigma": 0.5}),
])
def test_parametric_margins(family, params):
    m = margins.ParametricMargin(family, **params)
    q = np.array([0.01, 0.3, 0.9])
    assert_allclose(m.cdf(m.ppf(q)), q, rtol=1e-10)
    m2 = margins.margin_from_dict(m.to_dict())
    assert_allclose(m2.ppf(q), m.ppf(q))


def test_moments():
    x = np.random.default_rng(4).standard_normal(200_000)
    mo = margins.moments(x)
    assert mo["mean"] == pytest.approx(0, abs=0.01)
    assert mo["sd"] == pytest.approx(1, abs=0.01)
    assert mo["kurtosis"] == pytest.approx(3, abs=0.05)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-6, 6), b=st.floats(-6, 6))
def test_cdf_monotone(normal_fit, a, b):
    _, m = normal_fit
    lo, hi = min(a, b), max(a, b)
    assert m.cdf(lo) <= m.cdf(hi)
