"""One-step-ahead predictive distributions, VaR and coverage backtests."""

from dataclasses import asdict, dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import stats

from . import dvine
from .margins import pit

ALPHAS = (0.01, 0.05, 0.1, 0.9, 0.95, 0.99)
PORTFOLIO_DRAWS = 100_000


class BacktestInputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# predictive distributions


def _pit_history(margin, history, p):
    h = np.asarray(history, dtype=float)
    h = h[..., -p:] if h.shape[-1] > p else h
    return pit(margin, h)


def predictive_cdf_uni(spec, margin, history, y):
    """F_{t|t-1}(y) given the last observations on the data scale.

    ``history`` is (L,) or a batch (n, L) of past values, most recent last.
    """
    h = _pit_history(margin, history, spec.p)
    if h.shape[-1] == 0:
        return margin.cdf(y)
    return dvine.conditional_cdf(spec, h, pit(margin, y))


def predictive_var(spec, margin, history, alpha):
    """VaR_{t|t-1}(alpha): the alpha-quantile of the predictive distribution."""
    h = _pit_history(margin, history, spec.p)
    if h.shape[-1] == 0:
        return margin.ppf(alpha)
    return margin.ppf(dvine.conditional_quantile(spec, h, alpha))


class PredictiveDist:
    """Predictive distribution of the next value.

    Univariate models are exact (cdf via h-functions, quantile via their
    inverses). Portfolios are represented by a simulated sample.
    """

    def __init__(self, spec=None, margin=None, history=None, sample=None):
        self.spec = spec
        self.margin = margin
        self.history = history
        self.sample = None if sample is None else np.sort(np.asarray(sample, dtype=float))

    def cdf(self, y):
        if self.sample is not None:
            return np.searchsorted(self.sample, y, side="right") / self.sample.size
        return predictive_cdf_uni(self.spec, self.margin, self.history, y)

    def ppf(self, alpha):
        if self.sample is not None:
            return np.quantile(self.sample, alpha)
        return predictive_var(self.spec, self.margin, self.history, alpha)

    var = ppf


def predictive_portfolio(spec, margins, history, weights=None, n=PORTFOLIO_DRAWS, seed=None, rng=None):
    """Simulated predictive of the weighted next-day return for an m-series model.

    ``history`` holds the last p time slices on the data scale, shape (p, m).
    """
    m = spec.m
    weights = np.full(m, 1.0 / m) if weights is None else np.asarray(weights, dtype=float)
    if weights.shape != (m,) or not np.isclose(weights.sum(), 1.0):
        raise BacktestInputError("weights must have length m and sum to 1")
    H = np.asarray(history, dtype=float).reshape(-1, m)[-spec.p:]
    uh = np.column_stack([pit(margins[l], H[:, l]) for l in range(m)]).reshape(-1)
    draws = dvine.simulate_next(spec, uh, n, seed=seed, rng=rng)
    y = np.column_stack([margins[l].ppf(draws[:, l]) for l in range(m)])
    return PredictiveDist(sample=y @ weights)


# ---------------------------------------------------------------------------
# coverage tests


@dataclass
class BacktestResult:
    alpha: float
    alpha_hat: float
    n00: int
    n01: int
    n10: int
    n11: int
    LR_uc: float
    LR_ind: float
    LR_cc: float
    p_uc: float
    p_ind: float
    p_cc: float
    degenerate: bool = False

    @property
    def reject95(self):
        return bool(self.p_cc < 0.05)

    @property
    def reject99(self):
        return bool(self.p_cc < 0.01)

    def to_dict(self):
        d = asdict(self)
        d["reject95"] = self.reject95
        d["reject99"] = self.reject99
        return d


def _xlogy(n, p):
    # 0 * log 0 = 0
    return 0.0 if n == 0 else n * np.log(p)


def _bern_ll(n0, n1, p):
    return _xlogy(n0, 1.0 - p) + _xlogy(n1, p)


def christoffersen(hits, alpha):
    """Unconditional coverage, independence and conditional coverage LR tests."""
    hits = np.asarray(hits, dtype=bool)
    n1 = int(hits.sum())
    n0 = hits.size - n1
    pi = n1 / hits.size
    lr_uc = -2.0 * (_bern_ll(n0, n1, alpha) - _bern_ll(n0, n1, pi))

    prev, cur = hits[:-1], hits[1:]
    n00 = int(np.sum(~prev & ~cur))
    n01 = int(np.sum(~prev & cur))
    n10 = int(np.sum(prev & ~cur))
    n11 = int(np.sum(prev & cur))
    p_uc = float(stats.chi2.sf(lr_uc, 1))

    if n1 == 0 or n0 == 0:
        # no transitions to estimate: only the coverage test is defined
        return BacktestResult(alpha, pi, n00, n01, n10, n11, lr_uc, np.nan, lr_uc,
                              p_uc, np.nan, p_uc, degenerate=True)

    pi0 = n01 / (n00 + n01) if n00 + n01 else 0.0
    pi1 = n11 / (n10 + n11) if n10 + n11 else 0.0
    pi2 = (n01 + n11) / (n00 + n01 + n10 + n11)
    l1 = _bern_ll(n00, n01, pi0) + _bern_ll(n10, n11, pi1)
    l0 = _bern_ll(n00 + n10, n01 + n11, pi2)
    lr_ind = max(-2.0 * (l0 - l1), 0.0)
    lr_cc = lr_uc + lr_ind
    return BacktestResult(alpha, pi, n00, n01, n10, n11, lr_uc, lr_ind, lr_cc,
                          p_uc, float(stats.chi2.sf(lr_ind, 1)), float(stats.chi2.sf(lr_cc, 2)))


def backtest(series, var_series, alpha, min_length=100):
    """Exceedance indicator 1(y_t < VaR_t) and its Christoffersen tests."""
    y = np.asarray(series, dtype=float)
    v = np.asarray(var_series, dtype=float)
    if y.shape != v.shape or y.ndim != 1:
        raise BacktestInputError("series and VaR must be aligned 1-d arrays")
    if y.size < min_length:
        raise BacktestInputError(f"need at least {min_length} days, got {y.size}")
    if not 0 < alpha < 1:
        raise BacktestInputError("alpha must lie in (0, 1)")
    return christoffersen(y < v, alpha)


# ---------------------------------------------------------------------------
# in-sample one-step-ahead VaR paths


def _histories(u, p):
    """Windows of the p values before each t = 1..T-1 (0-based), grouped by length."""
    T = u.size
    groups = []
    for t in range(1, min(p, T)):
        groups.append((np.array([t]), u[None, :t]))
    if T > p:
        W = sliding_window_view(u[:-1], p)  # W[j] = u[j:j+p] precedes t = j + p
        groups.append((np.arange(p, T), W))
    return groups


def var_path_uni(spec, margin, data, alpha):
    """VaR_{t|t-1}(alpha) for t = 2..T with one fixed fit (length T-1)."""
    y = np.asarray(data, dtype=float)
    u = pit(margin, y)
    out = np.empty(y.size)
    out[0] = np.nan
    for idx, H in _histories(u, spec.p):
        out[idx] = margin.ppf(dvine.conditional_quantile(spec, H, np.full(idx.size, alpha)))
    return out[1:]


def var_path_portfolio(spec, margins, data, alphas, weights=None, n=PORTFOLIO_DRAWS, seed=None, days=None):
    """Simulated portfolio VaR for t = p+1..T, one seeded stream per day.

    ``days`` restricts the evaluation to the last ``days`` days.
    Returns (portfolio returns, VaR array of shape (len(alphas), n_days)).
    """
    Y = np.asarray(data, dtype=float)
    m = spec.m
    weights = np.full(m, 1.0 / m) if weights is None else np.asarray(weights, dtype=float)
    ts = np.arange(spec.p, Y.shape[0])
    if days is not None:
        ts = ts[-int(days):]
    root = np.random.SeedSequence(seed)
    streams = root.spawn(int(ts[-1]) + 1)
    var = np.empty((len(alphas), ts.size))
    for j, t in enumerate(ts):
        rng = np.random.default_rng(streams[t])
        dist = predictive_portfolio(spec, margins, Y[t - spec.p:t], weights, n=n, rng=rng)
        var[:, j] = dist.ppf(np.asarray(alphas))
    return Y[ts] @ weights, var


def rolling_backtest(spec, margins, data, alphas=ALPHAS, refit_every=None, fit_kwargs=None):
    """Exceedance table of one-step-ahead VaR over t = 2..T.

    The default uses the single supplied fit for every day. With
    ``refit_every=k`` the margin and vine are re-estimated on the data up
    to t every k days (much slower, not the default protocol).
    """
    y = np.asarray(data, dtype=float)
    if spec.m != 1:
        raise BacktestInputError("rolling_backtest handles univariate models; use portfolio_backtest")
    margin = margins[0] if isinstance(margins, (list, tuple)) else margins
    if refit_every is None:
        paths = {a: var_path_uni(spec, margin, y, a) for a in alphas}
    else:
        paths = _refit_paths(spec, margin, y, alphas, int(refit_every), fit_kwargs or {})
    return [backtest(y[1:], paths[a], a) for a in alphas]


def _refit_paths(spec, margin, y, alphas, every, fit_kwargs):
    from .inference import fit_mle
    from .margins import fit_margin

    paths = {a: np.empty(y.size - 1) for a in alphas}
    cur_spec, cur_margin = spec, margin
    min_fit = max(100, 10 * spec.p)
    for t in range(1, y.size):
        if t >= min_fit and (t - min_fit) % every == 0:
            cur_margin = fit_margin(y[:t])
            cur_spec = fit_mle(cur_spec, pit(cur_margin, y[:t]), se=False, **fit_kwargs).spec
        hist = y[max(0, t - spec.p):t]
        for a in alphas:
            paths[a][t - 1] = predictive_var(cur_spec, cur_margin, hist, a)
    return paths


def portfolio_backtest(spec, margins, data, alphas=ALPHAS, weights=None, n=PORTFOLIO_DRAWS, seed=None, days=None):
    """Equally weighted (by default) portfolio block of the backtest table."""
    r, var = var_path_portfolio(spec, margins, data, alphas, weights, n, seed, days)
    return [backtest(r, var[i], a) for i, a in enumerate(alphas)]


def backtest_table(results):
    """Rows for the backtest CSV."""
    cols = ("alpha", "alpha_hat", "LR_uc", "LR_ind", "LR_cc", "p_cc", "reject95", "reject99")
    return [{c: r.to_dict()[c] for c in cols} for r in results]
