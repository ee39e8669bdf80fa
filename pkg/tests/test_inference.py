import numpy as np
import pytest
from numpy.testing import assert_allclose

from hetcop import bicop, datagen, dvine, inference, volcop


@pytest.fixture(scope="module")
def cg_data():
    true = dvine.univariate([bicop.mixture_cg(0.7, 0.5, 0.6, 0.3, 0.5)])
    u = dvine.simulate(true, 3000, seed=5)
    return true, u


def test_transforms_roundtrip():
    bounds = [(0.0, 1.0), (2.0, 40.0), (-1.0, 1.0)]
    th = np.array([0.3, 7.5, -0.2])
    assert_allclose(inference.to_constrained(inference.to_unconstrained(th, bounds), bounds), th)


def test_log_jacobian_matches_numeric():
    bounds = [(0.0, 1.0), (2.0, 40.0)]
    x = np.array([0.4, -1.3])
    d = 1e-6
    num = sum(
        np.log((inference.to_constrained(x + d * e, bounds) - inference.to_constrained(x - d * e, bounds))[i] / (2 * d))
        for i, e in enumerate(np.eye(2))
    )
    assert inference.log_jacobian(x, bounds) == pytest.approx(num, abs=1e-6)


def test_parameterization_roundtrip():
    spec = dvine.univariate([bicop.mixture_t(0.3, 0.5, 5.0, 0.2, 9.0), bicop.mixture_cg(0.5, 0.3, 0.4, 0.2, 0.6)])
    par = inference.VineParameterization(spec)
    assert par.dim == 10
    s2 = par.spec_from_x(par.x())
    assert_allclose(par.theta(s2), par.theta(), rtol=1e-10)
    assert par.names[0] == "(1, 1, 1):w"


def test_mle_improves_on_truth_and_recovers_dependence(cg_data):
    true, u = cg_data
    start = dvine.univariate([bicop.mixture_cg(0.5, 0.3, 0.5, 0.3, 0.5)])
    rep = inference.fit_mle(start, u, seed=1)
    assert rep.loglik >= dvine.loglik(true, u) - 1e-6
    c_fit, c_true = rep.spec.pairs[(1, 1, 1)], true.pairs[(1, 1, 1)]
    assert volcop.rho_v_lag1(c_fit) == pytest.approx(volcop.rho_v_lag1(c_true), abs=0.05)
    assert np.all(np.isfinite(rep.se)) and np.all(rep.se > 0)
    lo, hi = rep.interval.T
    assert np.all(lo <= rep.estimate) and np.all(rep.estimate <= hi)


def test_mle_on_independent_data_has_no_volatility_dependence():
    u = np.random.default_rng(3).uniform(size=3000)
    rep = inference.fit_mle(dvine.univariate([bicop.mixture_cg(0.5, 0.3, 0.5, 0.3, 0.5)]), u, seed=2, se=False)
    assert abs(volcop.rho_v_lag1(rep.spec.pairs[(1, 1, 1)])) < 0.02


def test_sequential_fit_p2(cg_data):
    _, u = cg_data
    c = bicop.mixture_cg(0.5, 0.3, 0.5, 0.3, 0.5)
    rep = inference.fit_mle(dvine.univariate([c, c]), u, seed=0, se=False, maxfev_polish=300)
    rep1 = inference.fit_mle(dvine.univariate([c]), u, seed=0, se=False)
    # the extra lag nests p = 1 up to its first-observation term
    assert rep.loglik >= rep1.loglik - 5.0


def test_log_posterior_uses_vine_likelihood(cg_data):
    true, u = cg_data
    par = inference.VineParameterization(true)
    x = par.x()
    lp, ll = inference.log_posterior(par, x, u)
    assert ll == pytest.approx(dvine.loglik(true, u), rel=1e-12)
    assert lp == pytest.approx(ll + inference.log_jacobian(x, par.bounds), rel=1e-12)


@pytest.fixture(scope="module")
def short_chain(cg_data):
    _, u = cg_data
    cfg = inference.McmcConfig(iterations=400, burn_in=100, adapt_start=50, seed=3, thin=20)
    start = dvine.univariate([bicop.mixture_cg(0.6, 0.4, 0.5, 0.3, 0.5)])
    return u, cfg, start, inference.fit_mcmc(start, u[:1500], cfg, metric_fn=lambda s: volcop.rho_v_lag1(s.pairs[(1, 1, 1)], nodes=48))


def test_mcmc_reproducible(short_chain):
    u, cfg, start, rep = short_chain
    rep2 = inference.fit_mcmc(start, u[:1500], cfg)
    assert_allclose(rep2.extra["chain"]["x"], rep.extra["chain"]["x"])


def test_mcmc_outputs(short_chain):
    _, cfg, _, rep = short_chain
    assert rep.extra["chain"]["x"].shape == (cfg.iterations - cfg.burn_in, 5)
    acc = list(rep.acceptance.values())[0]
    assert 0.02 < acc < 0.9
    assert rep.extra["metric_draws"].shape == ((cfg.iterations - cfg.burn_in) // cfg.thin,)
    LL = rep.extra["chain"]["loglik"]
    assert rep.dic2 == pytest.approx(-4 * LL.mean() + 2 * LL.max())


def test_mcmc_stall_detection(cg_data):
    _, u = cg_data
    cfg = inference.McmcConfig(iterations=200, burn_in=100, adapt_start=10, seed=1, stall_window=20)
    with pytest.raises(inference.McmcDiagnosticsError):
        inference.fit_mcmc(dvine.univariate([bicop.mixture_cg(0.6, 0.4, 0.5, 0.3, 0.5)]), u[:500], cfg, scale=1e4)


def test_mcmc_config_validation():
    with pytest.raises(ValueError):
        inference.McmcConfig(iterations=100, burn_in=100)
    with pytest.raises(ValueError):
        inference.McmcConfig(beta=1.5)


def test_dic2_formula():
    assert inference.dic2([-10.0, -12.0], -9.0) == pytest.approx(-4 * -11.0 + 2 * -9.0)
    with pytest.raises(ValueError):
        inference.dic2([], 0.0)


def test_fit_arch1_recovers_parameters():
    y = datagen.simulate_arch(0.01, [0.5], 20_000, seed=12)
    a0, a1 = inference.fit_arch1(y)
    assert a0 == pytest.approx(0.01, rel=0.1)
    assert a1 == pytest.approx(0.5, abs=0.05)


def test_fit_report_serializes(cg_data):
    _, u = cg_data
    rep = inference.fit_mle(dvine.univariate([bicop.mixture_cg(0.5, 0.3, 0.5, 0.3, 0.5)]), u[:800], seed=1)
    d = rep.to_dict()
    assert set(d["parameters"]) == set(rep.names)
    assert "se" in d["parameters"][rep.names[0]]


def test_dic2_examples():
    assert inference.dic2([-7.5] * 4, -7.5) == pytest.approx(-2 * -7.5)
    assert inference.dic2([-10.0, -12.0, -11.0], -10.0) == pytest.approx(24.0)
    c = 3.25
    assert inference.dic2([-10.0 + c, -12.0 + c, -11.0 + c], -10.0 + c) == pytest.approx(24.0 - 2 * c)


def test_mcmc_vanishing_scale_accepts_everything(cg_data):
    _, u = cg_data
    cfg = inference.McmcConfig(iterations=60, burn_in=10, adapt_start=1000, seed=2)
    rep = inference.fit_mcmc(dvine.univariate([bicop.mixture_cg(0.6, 0.4, 0.5, 0.3, 0.5)]), u[:500], cfg, scale=1e-9)
    assert list(rep.acceptance.values())[0] > 0.95


@pytest.mark.slow
def test_metric_intervals_narrower_than_parameter_intervals():
    # exchange-rate-like mixture-t: weakly identified parameters, sharp metric
    spec = dvine.univariate([bicop.mixture_t(0.474, 0.153, 9.668, 0.170, 9.866)])
    u = dvine.simulate(spec, 3669, seed=8)
    cfg = inference.McmcConfig(iterations=4000, burn_in=1000, seed=8, thin=10)
    rep = inference.fit_mcmc(spec, u, cfg, metric_fn=lambda s: volcop.rho_v_lag1(s.pairs[(1, 1, 1)], nodes=48))
    lo, hi = rep.extra["metric_interval90"]
    rho_width = (hi - lo) / 2.0  # Spearman range [-1, 1]
    w_width = np.diff(rep.interval[rep.names.index("(1, 1, 1):w")])[0]
    assert rho_width < w_width
