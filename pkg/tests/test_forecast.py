import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

import oracles
from hetcop import bicop, datagen, dvine, forecast, margins

T_MARGIN = margins.ParametricMargin("t", df=5)


@pytest.fixture(scope="module")
def spec2():
    return dvine.univariate([bicop.mixture_t(0.5, 0.8, 4.0, 0.5, 6.0), bicop.mixture_t(0.6, 0.3, 8.0, 0.4, 5.0)])


def test_independence_predictive_is_margin():
    spec = dvine.independence_vine(1, 2)
    y = np.linspace(-3, 3, 7)
    assert_allclose(forecast.predictive_cdf_uni(spec, T_MARGIN, [0.4, -1.0], y), T_MARGIN.cdf(y), atol=1e-12)


def test_predictive_cdf_matches_simulation(spec2):
    hist = np.array([1.5, -2.0])
    d = dvine.simulate_next(spec2, margins.pit(T_MARGIN, hist), 100_000, seed=3)[:, 0]
    ys = T_MARGIN.ppf(d)
    dec = np.arange(1, 10) / 10
    assert_allclose(forecast.predictive_cdf_uni(spec2, T_MARGIN, hist, np.quantile(ys, dec)), dec, atol=0.01)


def test_predictive_cdf_monotone(spec2):
    y = np.linspace(-6, 6, 100)
    F = forecast.predictive_cdf_uni(spec2, T_MARGIN, [0.2, 3.0], y)
    assert np.all(np.diff(F) >= 0)


def test_var_inverts_cdf_and_is_monotone_in_alpha(spec2):
    hist = [0.3, -0.7]
    a = np.array([0.01, 0.05, 0.1, 0.5, 0.9, 0.95, 0.99])
    v = forecast.predictive_var(spec2, T_MARGIN, np.broadcast_to(hist, (a.size, 2)), a)
    assert np.all(np.diff(v) > 0)
    assert_allclose(forecast.predictive_cdf_uni(spec2, T_MARGIN, np.broadcast_to(hist, (a.size, 2)), v), a, atol=1e-8)


def test_predictive_dist_wrapper(spec2):
    d = forecast.PredictiveDist(spec2, T_MARGIN, [0.1, 0.2])
    assert d.cdf(d.ppf(0.3)) == pytest.approx(0.3, abs=1e-8)


def test_lr_counts_oracle():
    hits = oracles.isolated_hits(900, 50)
    r = forecast.christoffersen(hits, 0.05)
    assert (r.n00, r.n01, r.n10, r.n11) == (900, 50, 50, 0)
    assert_allclose([r.LR_uc, r.LR_ind, r.LR_cc], oracles.lr_from_counts(900, 50, 50, 0, 0.05), atol=1e-10)
    assert r.n00 + r.n01 + r.n10 + r.n11 == hits.size - 1


def test_lr_uc_zero_at_exact_rate():
    r = forecast.christoffersen(np.tile([0] * 9 + [1], 20).astype(bool), 0.1)
    assert r.alpha_hat == pytest.approx(0.1)
    assert r.LR_uc == pytest.approx(0.0, abs=1e-12)


def test_lr_ind_zero_for_matching_transitions():
    # n00 = n01 = n10 = n11 = 2: both transition probabilities are 1/2
    hits = np.array([0, 0, 0, 1, 1, 0, 1, 1, 0], dtype=bool)
    r = forecast.christoffersen(hits, 0.5)
    assert (r.n00, r.n01, r.n10, r.n11) == (2, 2, 2, 2)
    assert r.LR_ind == pytest.approx(0.0, abs=1e-12)


def test_zero_exceedances_closed_form():
    n = 500
    r = forecast.backtest(np.zeros(n), np.full(n, -1.0), 0.01)
    assert r.degenerate
    assert r.LR_uc == pytest.approx(-2 * n * np.log(0.99))
    assert np.isnan(r.LR_ind)
    assert r.p_cc == pytest.approx(stats.chi2.sf(r.LR_uc, 1))


def test_backtest_invariant_to_monotone_transform():
    rng = np.random.default_rng(1)
    y = rng.standard_normal(400)
    v = np.full(400, -1.64)
    a = forecast.backtest(y, v, 0.05)
    b = forecast.backtest(np.exp(y), np.exp(v), 0.05)
    assert a.to_dict() == b.to_dict()


def test_backtest_validation():
    with pytest.raises(forecast.BacktestInputError):
        forecast.backtest(np.zeros(50), np.zeros(50), 0.05)
    with pytest.raises(forecast.BacktestInputError):
        forecast.backtest(np.zeros(200), np.zeros(199), 0.05)


def test_oracle_var_calibrated():
    y, s2 = datagen.simulate_arch(0.01, [0.5], 3669, seed=21, return_variance=True)
    for a in forecast.ALPHAS:
        r = forecast.backtest(y, datagen.arch_var_quantile(s2, a), a)
        lo, hi = stats.binom.interval(0.95, y.size, a)
        assert lo / y.size <= r.alpha_hat <= hi / y.size


def test_independence_rolling_backtest_on_iid():
    y = np.random.default_rng(5).standard_t(5, size=3669)
    res = forecast.rolling_backtest(dvine.independence_vine(1, 1), T_MARGIN, y)
    assert len(res) == 6
    for r in res:
        lo, hi = stats.binom.interval(0.95, 3668, r.alpha)
        assert lo / 3668 <= r.alpha_hat <= hi / 3668


def test_var_path_matches_pointwise(spec2):
    y = T_MARGIN.ppf(dvine.simulate(spec2, 40, seed=2))
    path = forecast.var_path_uni(spec2, T_MARGIN, y, 0.05)
    for t in (1, 2, 17, 39):
        assert path[t - 1] == pytest.approx(forecast.predictive_var(spec2, T_MARGIN, y[max(0, t - 2):t], 0.05), rel=1e-12)


class TestPortfolio:
    @pytest.fixture
    def indep3(self):
        return dvine.independence_vine(3, 1), [margins.ParametricMargin("normal", scale=s) for s in (1.0, 2.0, 0.5)]

    def test_weights_validated(self, indep3):
        spec, ms = indep3
        with pytest.raises(forecast.BacktestInputError):
            forecast.predictive_portfolio(spec, ms, np.zeros((1, 3)), weights=[0.5, 0.5, 0.5])

    def test_degenerate_weight_is_single_series(self, indep3):
        spec, ms = indep3
        d = forecast.predictive_portfolio(spec, ms, np.zeros((1, 3)), weights=[1, 0, 0], n=100_000, seed=1)
        assert d.ppf(0.05) == pytest.approx(ms[0].ppf(0.05), abs=0.03)

    def test_independent_portfolio_matches_convolution(self, indep3):
        spec, ms = indep3
        d = forecast.predictive_portfolio(spec, ms, np.zeros((1, 3)), n=100_000, seed=2)
        sd = np.sqrt(1 + 4 + 0.25) / 3
        rng = np.random.default_rng(9)
        direct = (rng.standard_normal(100_000) + 2 * rng.standard_normal(100_000) + 0.5 * rng.standard_normal(100_000)) / 3
        se = np.sqrt(0.05 * 0.95 / 100_000) / stats.norm.pdf(stats.norm.ppf(0.05)) * sd
        assert abs(d.ppf(0.05) - np.quantile(direct, 0.05)) < 2 * np.sqrt(2) * se + 1e-3
        assert d.ppf(0.05) == pytest.approx(stats.norm.ppf(0.05) * sd, abs=3 * se)

    def test_portfolio_backtest_reproducible(self, indep3):
        spec, ms = indep3
        rng = np.random.default_rng(3)
        Y = np.column_stack([m.ppf(rng.uniform(size=130)) for m in ms])
        a = forecast.portfolio_backtest(spec, ms, Y, (0.05, 0.95), n=2000, seed=4, days=110)
        b = forecast.portfolio_backtest(spec, ms, Y, (0.05, 0.95), n=2000, seed=4, days=110)
        assert [r.to_dict() for r in a] == [r.to_dict() for r in b]


@pytest.mark.slow
def test_oracle_exceedances_pass_conditional_coverage():
    rejected = 0
    for s in range(50):
        y, s2 = datagen.simulate_arch(0.01, [0.5], 3669, seed=500 + s, return_variance=True)
        rejected += forecast.backtest(y, datagen.arch_var_quantile(s2, 0.05), 0.05).reject95
    assert rejected / 50 <= 0.07


def test_independence_model_calibrated_on_iid():
    y = np.random.default_rng(6).standard_t(5, size=3669)
    for r in forecast.rolling_backtest(dvine.independence_vine(1, 1), T_MARGIN, y):
        lo, hi = stats.binom.interval(0.95, y.size - 1, r.alpha)
        assert lo / (y.size - 1) <= r.alpha_hat <= hi / (y.size - 1)
