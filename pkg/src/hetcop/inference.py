"""Estimation of D-vine copula parameters: MLE, adaptive blockwise RWMH and DIC2."""

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from . import dvine
from .bicop import NumericalError

LOG_FLOOR = -1e300


class FitError(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class McmcDiagnosticsError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# parameter transforms


def _to_unit(theta, lo, hi):
    return (theta - lo) / (hi - lo)


def to_unconstrained(theta, bounds):
    """Scaled logit of each parameter onto the real line."""
    theta = np.asarray(theta, dtype=float)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    s = np.clip(_to_unit(theta, lo, hi), 1e-15, 1 - 1e-15)
    return special.logit(s)


def to_constrained(x, bounds):
    x = np.asarray(x, dtype=float)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    return lo + (hi - lo) * special.expit(x)


def log_jacobian(x, bounds):
    """log |d theta / d x| of to_constrained, summed."""
    x = np.asarray(x, dtype=float)
    width = np.array([b[1] - b[0] for b in bounds])
    return float(np.sum(np.log(width) - np.logaddexp(0.0, x) - np.logaddexp(0.0, -x)))


class VineParameterization:
    """Flat parameter vector over the cells of a template spec.

    ``free`` restricts the vector to a subset of cells; the rest stay fixed.
    """

    def __init__(self, spec, free=None):
        self.spec = spec
        self.cells = [c for c in dvine.DVineSpec.cells(spec.m, spec.p) if free is None or c in free]
        self.sizes = [len(spec.pairs[c].to_vector()) for c in self.cells]
        self.bounds = [b for c in self.cells for b in spec.pairs[c].param_bounds()]
        self.names = [f"{c}:{n}" for c in self.cells for n in spec.pairs[c].param_names]
        self.blocks = []
        k = 0
        for s in self.sizes:
            self.blocks.append(np.arange(k, k + s))
            k += s
        self.dim = k

    def theta(self, spec=None):
        spec = spec or self.spec
        if self.dim == 0:
            return np.zeros(0)
        return np.concatenate([spec.pairs[c].to_vector() for c in self.cells])

    def x(self, spec=None):
        return to_unconstrained(self.theta(spec), self.bounds)

    def spec_from_theta(self, theta, base=None):
        base = base or self.spec
        pairs = dict(base.pairs)
        for c, blk in zip(self.cells, self.blocks):
            pairs[c] = base.pairs[c].with_vector(np.asarray(theta)[blk])
        return base.with_pairs(pairs)

    def spec_from_x(self, x, base=None):
        return self.spec_from_theta(to_constrained(x, self.bounds), base)

    def named(self, theta):
        return dict(zip(self.names, (float(t) for t in theta)))


# ---------------------------------------------------------------------------
# maximum likelihood


@dataclass
class FitReport:
    method: str
    spec: object
    loglik: float
    names: list
    estimate: np.ndarray
    se: np.ndarray = None
    interval: np.ndarray = None
    n_evals: int = 0
    converged: bool = True
    seconds: float = 0.0
    acceptance: dict = field(default_factory=dict)
    dic2: float = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = {
            "method": self.method,
            "model": self.spec.to_dict(),
            "loglik": self.loglik,
            "parameters": {},
            "n_evals": self.n_evals,
            "converged": self.converged,
            "seconds": self.seconds,
        }
        for i, n in enumerate(self.names):
            e = {"estimate": float(self.estimate[i])}
            if self.se is not None:
                e["se"] = _num(self.se[i])
            if self.interval is not None:
                e["interval90"] = [_num(self.interval[i, 0]), _num(self.interval[i, 1])]
            d["parameters"][n] = e
        if self.acceptance:
            d["acceptance"] = {str(k): float(v) for k, v in self.acceptance.items()}
        if self.dic2 is not None:
            d["dic2"] = float(self.dic2)
        d.update(self.extra)
        return d


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _objective(param, u, threads, counter):
    def f(x):
        counter[0] += 1
        if not np.all(np.isfinite(x)) or np.any(np.abs(x) > 40):
            return 1e100
        try:
            ll = dvine.loglik(param.spec_from_x(x), u, threads=threads)
        except (NumericalError, ValueError, FloatingPointError):
            return 1e100
        return -ll if math.isfinite(ll) else 1e100

    return f


def _nelder_mead(f, x0, maxfev, xatol=1e-4, fatol=1e-4, scale=0.5):
    d = x0.size
    simplex = np.vstack([x0] + [x0 + scale * np.eye(d)[i] for i in range(d)])
    return optimize.minimize(
        f,
        x0,
        method="Nelder-Mead",
        options={"maxfev": maxfev, "xatol": xatol, "fatol": fatol, "initial_simplex": simplex, "adaptive": d > 4},
    )


def _multistart(f, x0, starts, maxfev_start, maxfev_polish, rng):
    cands = [x0] + [x0 + rng.normal(0.0, 1.0, x0.size) for _ in range(starts - 1)]
    best = None
    nfev = 0
    for c in cands:
        r = _nelder_mead(f, c, maxfev_start)
        nfev += r.nfev
        if best is None or r.fun < best.fun:
            best = r
    r = _nelder_mead(f, best.x, maxfev_polish, scale=0.1)
    nfev += r.nfev
    if r.fun > best.fun:
        r = best
    return r, nfev


def _level_args(spec, z, r, l1):
    """Arguments (a, b) feeding the pair at (l1, r), from the current grid."""
    _, grid = dvine._loglik_stacked(spec, z, keep_grid=True) if r > 1 else (None, None)
    m = spec.m
    N = z.size
    first = l1 - 1
    while first < r:
        first += m
    idx = np.arange(first, N, m)
    if r == 1:
        return z[idx - 1], z[idx]
    return grid[idx - 1, r - 2, 1], grid[idx, r - 2, 0]


def fit_mle(spec, u, starts=5, seed=0, sequential=None, joint_polish=True, maxfev_start=200,
            maxfev_polish=2000, se=True, threads=1):
    """Maximize the D-vine log-likelihood in unconstrained space.

    ``spec`` is the template: its families are kept and its parameters are
    the first start. With ``sequential`` (default when there is more than one
    pair) each pair is first fitted level by level on the arguments produced
    by the already-fitted lower levels, then all parameters are polished
    jointly.
    """
    t0 = time.time()
    rng = np.random.default_rng(seed)
    data = np.asarray(u, dtype=float)
    nfev = 0
    if sequential is None:
        sequential = spec.n_pairs > 1
    cur = spec
    if sequential and spec.n_pairs > 1:
        zs = dvine._stack(data if data.ndim == 1 else data.reshape(len(data), -1), spec.m)
        for r in range(1, spec.R + 1):
            for l1 in range(1, spec.m + 1):
                k, l2, cop = cur.pair_at(l1, r)
                if cop is None:
                    continue
                a, b = _level_args(cur, zs, r, l1)
                one = dvine.DVineSpec(1, 1, [cop])
                param1 = VineParameterization(one)
                counter = [0]

                def f1(x, a=a, b=b, param1=param1, counter=counter):
                    counter[0] += 1
                    if np.any(np.abs(x) > 40):
                        return 1e100
                    try:
                        c = param1.spec_from_x(x).pairs[(1, 1, 1)]
                        v = -float(np.sum(c._logpdf(np.clip(a, 1e-10, 1 - 1e-10), np.clip(b, 1e-10, 1 - 1e-10))))
                    except (NumericalError, ValueError):
                        return 1e100
                    return v if math.isfinite(v) else 1e100

                res, n1 = _multistart(f1, param1.x(), starts, maxfev_start, maxfev_polish, rng)
                nfev += n1
                newc = param1.spec_from_x(res.x).pairs[(1, 1, 1)]
                pairs = dict(cur.pairs)
                pairs[(k, l2, l1)] = newc
                cur = cur.with_pairs(pairs)
    param = VineParameterization(cur)
    counter = [0]
    f = _objective(param, data, threads, counter)
    if sequential and spec.n_pairs > 1:
        if joint_polish:
            res = _nelder_mead(f, param.x(cur), maxfev_polish, scale=0.1)
            if res.fun > f(param.x(cur)):
                res = optimize.OptimizeResult(x=param.x(cur), fun=f(param.x(cur)), success=False, nfev=0)
        else:
            x = param.x(cur)
            res = optimize.OptimizeResult(x=x, fun=f(x), success=True, nfev=1)
    else:
        res, _ = _multistart(f, param.x(cur), starts, maxfev_start, maxfev_polish, rng)
    nfev += counter[0]
    if not math.isfinite(res.fun) or res.fun >= 1e99:
        raise FitError("likelihood could not be evaluated at any start")
    best = param.spec_from_x(res.x)
    theta = param.theta(best)
    rep = FitReport(
        method="mle",
        spec=best,
        loglik=-float(res.fun),
        names=param.names,
        estimate=theta,
        n_evals=nfev,
        converged=bool(getattr(res, "success", True)),
    )
    if se:
        rep.se, rep.interval = _wald(param, res.x, data, threads)
    rep.seconds = time.time() - t0
    return rep


def _wald(param, x, u, threads, level=0.90):
    """Finite-difference Hessian in unconstrained space; delta-method SEs."""
    counter = [0]
    f = _objective(param, u, threads, counter)
    d = x.size
    h = 1e-3 * np.maximum(1.0, np.abs(x))
    f0 = f(x)
    H = np.empty((d, d))
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(d)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (
                4 * h[i] * h[j]
            )
    theta = to_constrained(x, param.bounds)
    lo = np.array([b[0] for b in param.bounds])
    hi = np.array([b[1] for b in param.bounds])
    try:
        cov = np.linalg.inv(H)
        ok = np.all(np.linalg.eigvalsh(0.5 * (H + H.T)) > 0)
    except np.linalg.LinAlgError:
        ok = False
    if not ok:
        se = np.full(d, np.nan)
    else:
        jac = (hi - lo) * special.expit(x) * special.expit(-x)
        se = np.sqrt(np.maximum(np.diag(cov), 0.0)) * jac
    z = special.ndtri(0.5 + 0.5 * level)
    interval = np.column_stack([np.clip(theta - z * se, lo, hi), np.clip(theta + z * se, lo, hi)])
    return se, interval


# ---------------------------------------------------------------------------
# adaptive random-walk Metropolis-Hastings


@dataclass
class McmcConfig:
    iterations: int = 20000
    burn_in: int = 5000
    adapt_start: int = 500
    beta: float = 0.05
    target_accept: float = 0.234
    seed: int = 0
    thin: int = 10
    stall_window: int = 1000

    def __post_init__(self):
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn-in must be smaller than the number of iterations")
        if not 0 <= self.beta <= 1:
            raise ValueError("beta must lie in [0, 1]")


class _RunningCov:
    def __init__(self, d):
        self.n = 0
        self.mean = np.zeros(d)
        self.m2 = np.zeros((d, d))

    def update(self, x):
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += np.outer(delta, x - self.mean)

    def cov(self):
        return self.m2 / max(self.n - 1, 1)


def log_posterior(param, x, u, threads=1):
    """Flat prior on the constrained box, expressed in unconstrained coordinates."""
    try:
        ll = dvine.loglik(param.spec_from_x(x), u, threads=threads)
    except (NumericalError, ValueError):
        return LOG_FLOOR, LOG_FLOOR
    if not math.isfinite(ll):
        return LOG_FLOOR, LOG_FLOOR
    return ll + log_jacobian(x, param.bounds), ll


def fit_mcmc(spec, u, cfg=None, start=None, threads=1, scale=1.0, metric_fn=None):
    """Blockwise adaptive RWMH with one block per pair-copula, random block order.

    Returns a FitReport; the chain is in ``report.extra['chain']`` as a dict
    with unconstrained draws, natural draws and log-likelihoods of the
    retained iterations. ``metric_fn(spec)`` is evaluated on every
    ``cfg.thin``-th retained draw.
    """
    cfg = cfg or McmcConfig()
    t0 = time.time()
    rng = np.random.default_rng(cfg.seed)
    spec0 = start or spec
    param = VineParameterization(spec0)
    x = param.x(spec0)
    lp, ll = log_posterior(param, x, u, threads)
    if lp <= LOG_FLOOR:
        raise FitError("log posterior is not finite at the starting point")
    nb = len(param.blocks)
    covs = [_RunningCov(len(b)) for b in param.blocks]
    acc = np.zeros(nb)
    tries = np.zeros(nb)
    acc_post = np.zeros(nb)
    tries_post = np.zeros(nb)
    keep_x, keep_ll, keep_lp = [], [], []
    since_accept = 0
    for it in range(cfg.iterations):
        any_acc = False
        for bi in rng.permutation(nb):
            blk = param.blocks[bi]
            d = len(blk)
            if it >= cfg.adapt_start and covs[bi].n > d + 1 and rng.uniform() >= cfg.beta:
                C = covs[bi].cov() * (2.38**2 / d) + 1e-10 * np.eye(d)
                step = rng.multivariate_normal(np.zeros(d), C)
            else:
                step = rng.normal(0.0, 0.1 / math.sqrt(d), d)
            prop = x.copy()
            prop[blk] += scale * step
            lp_new, ll_new = log_posterior(param, prop, u, threads)
            tries[bi] += 1
            if it >= cfg.burn_in:
                tries_post[bi] += 1
            if math.log(rng.uniform()) < lp_new - lp:
                x, lp, ll = prop, lp_new, ll_new
                acc[bi] += 1
                any_acc = True
                if it >= cfg.burn_in:
                    acc_post[bi] += 1
        for bi, blk in enumerate(param.blocks):
            covs[bi].update(x[blk])
        if it >= cfg.adapt_start:
            since_accept = 0 if any_acc else since_accept + 1
            if since_accept >= cfg.stall_window:
                raise McmcDiagnosticsError(f"no proposal accepted in {cfg.stall_window} sweeps after adaptation")
        if it >= cfg.burn_in:
            keep_x.append(x.copy())
            keep_ll.append(ll)
            keep_lp.append(lp - log_jacobian(x, param.bounds))
    X = np.array(keep_x)
    LL = np.array(keep_ll)
    TH = to_constrained(X, param.bounds)
    post_mean = TH.mean(axis=0)
    q = np.quantile(TH, [0.05, 0.95], axis=0).T
    best = int(np.argmax(keep_lp))
    rep = FitReport(
        method="mcmc",
        spec=param.spec_from_theta(post_mean),
        loglik=float(LL[best]),
        names=param.names,
        estimate=post_mean,
        se=TH.std(axis=0, ddof=1),
        interval=q,
        n_evals=int(tries.sum()),
        acceptance={str(c): float(acc_post[i] / max(tries_post[i], 1)) for i, c in enumerate(param.cells)},
        dic2=dic2(LL, LL[best]),
    )
    rep.extra["chain"] = {"x": X, "theta": TH, "loglik": LL}
    rep.extra["best_spec"] = param.spec_from_theta(TH[best])
    if metric_fn is not None:
        sel = np.arange(0, len(TH), cfg.thin)
        vals = np.array([metric_fn(param.spec_from_theta(TH[i])) for i in sel])
        rep.extra["metric_draws"] = vals
        rep.extra["metric_mean"] = vals.mean(axis=0)
        rep.extra["metric_interval90"] = np.quantile(vals, [0.05, 0.95], axis=0)
    rep.seconds = time.time() - t0
    return rep


def dic2(loglik_draws, loglik_at_point):
    """-4 * mean log-likelihood + 2 * log-likelihood at the point estimate."""
    ll = np.asarray(loglik_draws, dtype=float)
    if ll.size == 0:
        raise ValueError("empty chain")
    return float(-4.0 * ll.mean() + 2.0 * loglik_at_point)


# ---------------------------------------------------------------------------
# Gaussian ARCH(1) benchmark fit, used as the misspecified/correct comparator


def fit_arch1(y):
    """Gaussian MLE of (alpha0, alpha1) for y_t = sigma_t eps_t, conditioning on y_1."""
    y = np.asarray(y, dtype=float)
    y2 = y * y

    def nll(x):
        a0 = math.exp(x[0])
        a1 = special.expit(x[1])
        s2 = a0 + a1 * y2[:-1]
        return 0.5 * np.sum(np.log(s2) + y2[1:] / s2)

    v = y2.mean()
    best = None
    for a1 in (0.1, 0.4, 0.8):
        r = optimize.minimize(nll, [math.log(v * (1 - a1)), special.logit(a1)], method="Nelder-Mead",
                              options={"xatol": 1e-8, "fatol": 1e-8, "maxiter": 4000})
        if best is None or r.fun < best.fun:
            best = r
    return math.exp(best.x[0]), float(special.expit(best.x[1]))
