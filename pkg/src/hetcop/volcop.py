"""Volatility copulas and serial / cross-sectional dependence metrics.

The volatility proxy is v = |y - mu| (any symmetric transform that is
increasing in |y - mu| gives the same copula). For a pair (Y_s, Y_t) with
bivariate copula C and margins F_s, F_t the copula of (v_s, v_t) is

    C_V(a, b) = sum_{i,j in {+,-}} (+-)(+-) C(F_s(mu_s +- q_s), F_t(mu_t +- q_t))

with q = F_V^{-1}(.) and F_V(x) = F(mu + x) - F(mu - x).
"""

import numpy as np
from scipy import special, stats

from . import dvine
from ._quad import gauss_legendre
from .bicop import EPS, DomainError, Independence, NumericalError

VOL_TOL = 1e-10
RHO_NODES = 200


class VolatilityMargin:
    """F_V, f_V and F_V^{-1} of |Y - mu| for a margin with cdf/pdf/ppf/mean."""

    def __init__(self, margin, table_size=2048):
        self.base = margin
        self.mu = float(margin.mean)
        lo = float(margin.ppf(1e-13))
        hi = float(margin.ppf(1.0 - 1e-13))
        vmax = max(self.mu - lo, hi - self.mu)
        if not np.isfinite(vmax) or vmax <= 0:
            raise DomainError("margin has no usable spread")
        # denser near zero where F_V is steepest for peaked margins
        s = np.linspace(0.0, np.arcsinh(vmax / (1e-3 * vmax)), table_size)
        self._v = 1e-3 * vmax * np.sinh(s)
        self._v[-1] = vmax
        self._F = np.maximum.accumulate(self.cdf(self._v))

    def cdf(self, v):
        v = np.maximum(np.asarray(v, dtype=float), 0.0)
        m = self.base
        return np.clip(m.cdf(self.mu + v) - m.cdf(self.mu - v), 0.0, 1.0)

    def pdf(self, v):
        v = np.maximum(np.asarray(v, dtype=float), 0.0)
        return self.base.pdf(self.mu + v) + self.base.pdf(self.mu - v)

    def ppf(self, q, tol=VOL_TOL):
        """F_V^{-1}(q) by bisection inside a bracket read off the cached table."""
        q = np.asarray(q, dtype=float)
        shape = q.shape
        q = q.ravel()
        k = np.clip(np.searchsorted(self._F, q), 1, self._v.size - 1)
        lo = self._v[k - 1].copy()
        hi = self._v[k].copy()
        # targets beyond the table: expand geometrically
        beyond = q > self._F[-1]
        while np.any(beyond):
            hi[beyond] *= 2.0
            beyond &= self.cdf(hi) < q
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = self.cdf(mid)
            below = fm < q
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= tol * np.maximum(1.0, hi)):
                break
        out = 0.5 * (lo + hi)
        return out.reshape(shape) if shape else float(out[0])

    def transform(self, y):
        """ũ = F_V(|y - mu|)."""
        return self.cdf(np.abs(np.asarray(y, dtype=float) - self.mu))


def _as_vm(m):
    return m if isinstance(m, VolatilityMargin) else VolatilityMargin(m)


def vol_margin_cdf(vm, v):
    return _as_vm(vm).cdf(v)


def vol_margin_quantile(vm, q):
    return _as_vm(vm).ppf(q)


def _corners(vm, ut):
    q = vm.ppf(np.clip(ut, 0.0, 1.0))
    return q, vm.base.cdf(vm.mu + q), vm.base.cdf(vm.mu - q)


def vol_copula_cdf(base, margin_s, margin_t, us, ut):
    """Copula of (|Y_s - mu_s|, |Y_t - mu_t|) from the level copula and margins."""
    vs, vt = _as_vm(margin_s), _as_vm(margin_t)
    us, ut = np.broadcast_arrays(np.asarray(us, dtype=float), np.asarray(ut, dtype=float))
    _, ap, am = _corners(vs, us)
    _, bp, bm = _corners(vt, ut)
    c = base.cdf
    out = c(ap, bp) - c(ap, bm) - c(am, bp) + c(am, bm)
    return np.clip(out, 0.0, 1.0)


def symmetric_vol_copula_cdf(base, us, ut):
    """Volatility copula when both margins are symmetric about their means."""
    us, ut = np.broadcast_arrays(np.asarray(us, dtype=float), np.asarray(ut, dtype=float))
    ap, am = 0.5 * (1.0 + us), 0.5 * (1.0 - us)
    bp, bm = 0.5 * (1.0 + ut), 0.5 * (1.0 - ut)
    c = base.cdf
    return c(ap, bp) - c(ap, bm) - c(am, bp) + c(am, bm)


def vol_copula_density(base, margin_s, margin_t, us, ut):
    vs, vt = _as_vm(margin_s), _as_vm(margin_t)
    us, ut = np.broadcast_arrays(np.asarray(us, dtype=float), np.asarray(ut, dtype=float))
    qs, ap, am = _corners(vs, us)
    qt, bp, bm = _corners(vt, ut)
    fsp, fsm = vs.base.pdf(vs.mu + qs), vs.base.pdf(vs.mu - qs)
    ftp, ftm = vt.base.pdf(vt.mu + qt), vt.base.pdf(vt.mu - qt)
    num = (
        base.pdf(ap, bp) * fsp * ftp
        + base.pdf(ap, bm) * fsp * ftm
        + base.pdf(am, bp) * fsm * ftp
        + base.pdf(am, bm) * fsm * ftm
    )
    den = (fsp + fsm) * (ftp + ftm)
    if np.any(den <= 0):
        k = int(np.argmin(den))
        raise NumericalError("volatility margin density underflow", residual=0.0, where=k)
    return num / den


def symmetric_vol_copula_density(base, us, ut):
    us, ut = np.broadcast_arrays(np.asarray(us, dtype=float), np.asarray(ut, dtype=float))
    ap, am = 0.5 * (1.0 + us), 0.5 * (1.0 - us)
    bp, bm = 0.5 * (1.0 + ut), 0.5 * (1.0 - ut)
    c = base.pdf
    return 0.25 * (c(ap, bp) + c(ap, bm) + c(am, bp) + c(am, bm))


def _fold_nodes(vm, n):
    """Quadrature in u over (0,1) split at the fold point u0 = F(mu).

    Returns nodes u, weights w and the folded value ũ(u) = F_V(|F^{-1}(u) - mu|).
    """
    x, w = gauss_legendre(n)
    if vm is None:
        u0 = 0.5
    else:
        u0 = float(vm.base.cdf(vm.mu))
    u = np.concatenate([u0 * x, u0 + (1.0 - u0) * x])
    ww = np.concatenate([u0 * w, (1.0 - u0) * w])
    if vm is None:
        ut = np.abs(2.0 * u - 1.0)
    else:
        ut = vm.transform(vm.base.ppf(u))
    return u, ww, ut


def rho_v_lag1(base, margin_s=None, margin_t=None, nodes=RHO_NODES):
    """Spearman's rho of the volatility copula by tensor Gauss-Legendre quadrature.

    rho = 12 E[ũ_s ũ_t] - 3 with E[ũ_t | u_s] = 1 - int_0^1 P(ũ_t <= b | u_s) db
    and P(ũ_t <= b | u_s) = h1(u+(b) | u_s) - h1(u-(b) | u_s),
    u±(b) = F_t(mu_t ± F_Vt^{-1}(b)). ``None`` margins mean symmetric ones.
    """
    if isinstance(base, Independence):
        return 0.0
    vs = None if margin_s is None else _as_vm(margin_s)
    vt = vs if margin_t is None and margin_s is not None else (None if margin_t is None else _as_vm(margin_t))
    u, wu, ut_s = _fold_nodes(vs, nodes)
    b, wb = gauss_legendre(nodes)
    if vt is None:
        up, um = 0.5 * (1.0 + b), 0.5 * (1.0 - b)
    else:
        q = vt.ppf(b)
        up, um = vt.base.cdf(vt.mu + q), vt.base.cdf(vt.mu - q)
    U = np.clip(u[:, None], EPS, 1 - EPS)
    P = base.h1(np.clip(up[None, :], EPS, 1 - EPS), U) - base.h1(np.clip(um[None, :], EPS, 1 - EPS), U)
    cond_mean = 1.0 - P @ wb
    return float(12.0 * np.sum(wu * ut_s * cond_mean) - 3.0)


def rho_v_bruteforce(base, margin_s=None, margin_t=None, nodes=60):
    """12 * double integral of C_V - 3; slow, used as an independent check."""
    x, w = gauss_legendre(nodes)
    A, Bm = np.meshgrid(x, x, indexing="ij")
    if margin_s is None and margin_t is None:
        C = symmetric_vol_copula_cdf(base, A, Bm)
    else:
        ms = margin_s
        mt = margin_t if margin_t is not None else margin_s
        C = vol_copula_cdf(base, ms, mt, A, Bm)
    return float(12.0 * w @ C @ w - 3.0)


# ---------------------------------------------------------------------------
# quantile dependence


def _check_alpha(alpha):
    a = np.asarray(alpha, dtype=float)
    if np.any((a <= 0) | (a >= 1)):
        raise DomainError("alpha must lie strictly inside (0, 1)")
    return a


def quantile_dependence(cdf, alpha):
    """λ_low, λ_up, λ_LU, λ_UL at each α from a copula CDF callable C(u, v)."""
    a = _check_alpha(alpha)
    caa = np.asarray(cdf(a, a), dtype=float)
    return {
        "alpha": a,
        "low": caa / a,
        "up": (1.0 - 2.0 * a + caa) / (1.0 - a),
        "lu": (a - np.asarray(cdf(a, 1.0 - a), dtype=float)) / a,
        "ul": (a - np.asarray(cdf(1.0 - a, a), dtype=float)) / a,
    }


def empirical_quantile_dependence(x_prev, x_cur, alpha):
    """Rank-based λ coefficients for paired samples (first argument lagged)."""
    a = _check_alpha(alpha)
    n = len(x_prev)
    up = stats.rankdata(x_prev) / (n + 1.0)
    ut = stats.rankdata(x_cur) / (n + 1.0)
    out = {"alpha": a, "low": [], "up": [], "lu": [], "ul": []}
    for al in np.atleast_1d(a):
        lo_p, hi_p = up < al, up > al
        out["low"].append(np.mean(ut[lo_p] < al) if lo_p.any() else np.nan)
        out["up"].append(np.mean(ut[hi_p] > al) if hi_p.any() else np.nan)
        out["lu"].append(np.mean(ut[lo_p] > 1.0 - al) if lo_p.any() else np.nan)
        hi2 = up > 1.0 - al
        out["ul"].append(np.mean(ut[hi2] < al) if hi2.any() else np.nan)
    for k in ("low", "up", "lu", "ul"):
        out[k] = np.asarray(out[k]).reshape(a.shape)
    return out


def lambda_curve(res, alpha=None):
    """Single curve: λ_low for α < 0.5, λ_up for α >= 0.5."""
    a = res["alpha"]
    return np.where(a < 0.5, res["low"], res["up"])


def vol_quantile_dependence(base, margin_s, margin_t, alpha):
    if margin_s is None:
        return quantile_dependence(lambda a, b: symmetric_vol_copula_cdf(base, a, b), alpha)
    mt = margin_t if margin_t is not None else margin_s
    return quantile_dependence(lambda a, b: vol_copula_cdf(base, margin_s, mt, a, b), alpha)


# ---------------------------------------------------------------------------
# simulation-based metrics


def _vfun(V):
    if callable(V):
        return V
    if V == "abs":
        return np.abs
    if V == "square":
        return np.square
    raise ValueError(f"unknown volatility transform {V!r}")


def spearman(x, y):
    return float(stats.spearmanr(x, y)[0])


def spearman_se(x, y, batches=20):
    """Batch-means standard error of the sample Spearman correlation."""
    n = len(x) // batches
    vals = [spearman(x[i * n:(i + 1) * n], y[i * n:(i + 1) * n]) for i in range(batches)]
    return float(np.std(vals, ddof=1) / np.sqrt(batches))


def _to_data(u, margins, m):
    if margins is None:
        return special.ndtri(np.clip(u, EPS, 1 - EPS)), [0.0] * m
    ms = margins if isinstance(margins, (list, tuple)) else [margins] * m
    if m == 1:
        return ms[0].ppf(u), [ms[0].mean]
    y = np.empty_like(u)
    for l in range(m):
        y[..., l] = ms[l].ppf(u[..., l])
    return y, [mm.mean for mm in ms]


def simulate_paths(spec, length, n, seed=None, threads=1):
    """n independent stationary paths of `length` time slices: (n, length[, m])."""
    if threads <= 1 or n < 20000:
        return dvine.simulate(spec, length, seed=seed, n_paths=n)
    # independent seeded streams per block; block layout fixed by n only
    ss = np.random.SeedSequence(seed)
    blocks = 8
    sizes = [n // blocks + (1 if i < n % blocks else 0) for i in range(blocks)]
    seeds = ss.spawn(blocks)
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(threads) as ex:
        parts = list(ex.map(lambda a: dvine.simulate(spec, length, n_paths=a[0], rng=np.random.default_rng(a[1])),
                            zip(sizes, seeds)))
    return np.concatenate(parts, axis=0)


def rho_simulated(spec, margins=None, k=1, i=1, j=1, n=200_000, seed=None, V="abs", paths=None, kind="v"):
    """Spearman of (x_{i,t}, x_{j,t+k}) from n simulated paths, with its MC SE.

    kind="v" uses the volatility proxy V(y - mu); kind="y" the levels.
    """
    if paths is None:
        paths = simulate_paths(spec, k + 1, n, seed)
    m = spec.m
    u = paths if m > 1 else paths[:, :, None]
    y, mus = _to_data(u if m > 1 else u[:, :, 0], margins, m)
    if m == 1:
        y = y[:, :, None]
    a = y[:, 0, i - 1]
    b = y[:, k, j - 1]
    if kind == "v":
        f = _vfun(V)
        a = f(a - mus[i - 1])
        b = f(b - mus[j - 1])
    return spearman(a, b), spearman_se(a, b)


def rho_v_simulated(spec, margins=None, k=1, i=1, j=1, n=200_000, seed=None, V="abs", paths=None):
    return rho_simulated(spec, margins, k, i, j, n, seed, V, paths, kind="v")


def model_lambda_simulated(spec, lags, alpha, n=400_000, seed=None, paths=None):
    """λ curves of (u_{t-k}, u_t) for each k in lags (m = 1), by simulation."""
    L = max(lags)
    if paths is None:
        paths = simulate_paths(spec, L + 1, n, seed)
    return {k: empirical_quantile_dependence(paths[:, 0], paths[:, k], alpha) for k in lags}


def dependence_matrices(spec, margins=None, lags=(0, 1), n=200_000, seed=None, paths=None):
    """Pairwise Spearman matrices P^y_k, P^v_k (and their MC SEs) from one simulation."""
    if spec.m < 2:
        raise ValueError("dependence matrices need m > 1")
    L = max(lags)
    if paths is None:
        paths = simulate_paths(spec, L + 1, n, seed)
    m = spec.m
    y, mus = _to_data(paths, margins, m)
    v = np.abs(y - np.asarray(mus))
    # ranks per column once; Spearman is then Pearson on ranks
    ry = np.apply_along_axis(stats.rankdata, 0, y.reshape(y.shape[0], -1)).reshape(y.shape)
    rv = np.apply_along_axis(stats.rankdata, 0, v.reshape(v.shape[0], -1)).reshape(v.shape)
    out = {}
    for k in lags:
        Py = np.empty((m, m))
        Pv = np.empty((m, m))
        Sy = np.zeros((m, m))
        Sv = np.zeros((m, m))
        for i in range(m):
            for j in range(m):
                if k == 0 and i == j:
                    Py[i, j] = Pv[i, j] = 1.0
                    continue
                if k == 0 and j < i:
                    Py[i, j], Pv[i, j] = Py[j, i], Pv[j, i]
                    Sy[i, j], Sv[i, j] = Sy[j, i], Sv[j, i]
                    continue
                Py[i, j] = np.corrcoef(ry[:, 0, i], ry[:, k, j])[0, 1]
                Pv[i, j] = np.corrcoef(rv[:, 0, i], rv[:, k, j])[0, 1]
                Sy[i, j] = spearman_se(y[:, 0, i], y[:, k, j])
                Sv[i, j] = spearman_se(v[:, 0, i], v[:, k, j])
        out[k] = {"Py": Py, "Pv": Pv, "Py_se": Sy, "Pv_se": Sv}
    return out


def empirical_rho(x, k=1, mu=None, kind="y"):
    """Sample Spearman of (x_{t-k}, x_t), levels or |x - mu|."""
    x = np.asarray(x, dtype=float)
    if kind == "v":
        x = np.abs(x - (np.mean(x) if mu is None else mu))
    return spearman(x[:-k], x[k:])


def empirical_copula_hist(u, k=1, bins=20):
    """Normalized 2-D histogram density of (u_{t-k}, u_t) on [0,1]^2."""
    u = np.asarray(u, dtype=float)
    if bins < 2:
        raise ValueError("bins must be >= 2")
    if u.size - k <= 10 * bins * bins:
        raise ValueError("series too short for the requested bins")
    H, _, _ = np.histogram2d(u[:-k], u[k:], bins=bins, range=[[0, 1], [0, 1]], density=True)
    return H
