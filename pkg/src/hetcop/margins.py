"""Marginal models: an adaptive-bandwidth Gaussian KDE and parametric margins.

Both expose ``cdf``, ``pdf``, ``ppf`` and ``mean``, which is all the copula
layer and the volatility-copula formulas need.
"""

import math

import numpy as np
from numba import njit
from scipy import special, stats

PIT_EPS = 1e-10
GRID_SIZE = 4096
KERNEL_CUTOFF = 8.0
LOCAL_FACTOR_MAX = 10.0
GRID_SCALE_IQR = 0.25
BIN_NODES = 4096


class DegenerateMarginError(ValueError):
    pass


@njit(cache=True)
def _kde_on_grid(x, wt, h, grid, cutoff):
    """Weighted Gaussian-kernel sums on a sorted grid with per-point bandwidths.

    Returns (pdf, lower, upper) where lower/upper are the weighted CDF and
    survival sums, each accumulated from its own side to avoid cancellation
    in the tails.
    """
    g = grid.size
    pdf = np.zeros(g)
    lower = np.zeros(g)
    upper = np.zeros(g)
    # mass of kernels entirely to the left / right of each grid point
    left_mass = np.zeros(g + 1)
    right_mass = np.zeros(g + 1)
    c = 1.0 / math.sqrt(2.0 * math.pi)
    r2 = 1.0 / math.sqrt(2.0)
    for i in range(x.size):
        if wt[i] == 0.0:
            continue
        lo = np.searchsorted(grid, x[i] - cutoff * h[i])
        hi = np.searchsorted(grid, x[i] + cutoff * h[i])
        for j in range(lo, hi):
            z = (grid[j] - x[i]) / h[i]
            pdf[j] += wt[i] * c * math.exp(-0.5 * z * z) / h[i]
            if z < 0.0:
                t = 0.5 * math.erfc(-z * r2)
                lower[j] += wt[i] * t
                upper[j] += wt[i] * (1.0 - t)
            else:
                t = 0.5 * math.erfc(z * r2)
                lower[j] += wt[i] * (1.0 - t)
                upper[j] += wt[i] * t
        left_mass[hi] += wt[i]
        right_mass[lo] += wt[i]
    run = 0.0
    for j in range(g):
        run += left_mass[j]
        lower[j] += run
    run = 0.0
    for j in range(g - 1, -1, -1):
        run += right_mass[j + 1]
        upper[j] += run
    return pdf, lower, upper


def _linear_bin(x, nodes):
    """Split each observation's unit mass between its two neighbouring nodes."""
    k = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, nodes.size - 2)
    frac = (x - nodes[k]) / (nodes[k + 1] - nodes[k])
    wt = np.bincount(k, weights=1.0 - frac, minlength=nodes.size)
    wt += np.bincount(k + 1, weights=frac, minlength=nodes.size)
    return wt / x.size


def _make_grid(x, lo, hi, size):
    """Grid on [lo, hi] that is dense near the bulk of sorted x and stretches
    into heavy tails (equally spaced in asinh of the IQR-scaled distance)."""
    med = np.median(x)
    iqr = np.subtract(*np.percentile(x, [75, 25]))
    scale = max(GRID_SCALE_IQR * iqr, 1e-12 * max(1.0, abs(med)))
    a, b = np.arcsinh((lo - med) / scale), np.arcsinh((hi - med) / scale)
    grid = med + scale * np.sinh(np.linspace(a, b, size))
    grid[0], grid[-1] = lo, hi
    return grid


def _silverman(x):
    n = x.size
    sd = np.std(x, ddof=1)
    iqr = np.subtract(*np.percentile(x, [75, 25])) / 1.349
    s = min(sd, iqr) if iqr > 0 else sd
    return 0.9 * s * n ** (-0.2)


class KdeMargin:
    """Tabulated margin from an adaptive KDE, with Gaussian tails in probit space."""

    kind = "kde"

    def __init__(self, grid, pdf_values, cdf_values, mean, bandwidth=None):
        self.grid = np.asarray(grid, dtype=float)
        self.pdf_values = np.asarray(pdf_values, dtype=float)
        self.cdf_values = np.asarray(cdf_values, dtype=float)
        self.mean = float(mean)
        self.bandwidth = bandwidth
        if not (np.all(np.diff(self.grid) > 0) and np.all(np.diff(self.cdf_values) >= 0)):
            raise ValueError("grid must be increasing and cdf nondecreasing")
        # probit-linear tails matched in value and slope at each edge
        self._tails = []
        for k in (0, -1):
            F = min(max(self.cdf_values[k], 1e-300), 1.0 - 1e-16)
            z = special.ndtri(F)
            slope = self.pdf_values[k] / max(stats.norm.pdf(z), 1e-300)
            self._tails.append((z, max(slope, 1e-12)))
        # strictly increasing copy for inversion
        keep = np.concatenate([[True], np.diff(self.cdf_values) > 0])
        self._inv_cdf = self.cdf_values[keep]
        self._inv_grid = self.grid[keep]

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.grid, self.cdf_values)
        (zl, sl), (zr, sr) = self._tails
        out = np.where(x < self.grid[0], special.ndtr(zl + sl * (x - self.grid[0])), out)
        out = np.where(x > self.grid[-1], special.ndtr(zr + sr * (x - self.grid[-1])), out)
        return out if out.ndim else float(out)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.grid, self.pdf_values)
        (zl, sl), (zr, sr) = self._tails
        out = np.where(x < self.grid[0], sl * stats.norm.pdf(zl + sl * (x - self.grid[0])), out)
        out = np.where(x > self.grid[-1], sr * stats.norm.pdf(zr + sr * (x - self.grid[-1])), out)
        return out if out.ndim else float(out)

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        out = np.interp(q, self._inv_cdf, self._inv_grid)
        (zl, sl), (zr, sr) = self._tails
        with np.errstate(divide="ignore"):
            z = special.ndtri(q)
        out = np.where(q < self._inv_cdf[0], self.grid[0] + (z - zl) / sl, out)
        out = np.where(q > self._inv_cdf[-1], self.grid[-1] + (z - zr) / sr, out)
        return out if out.ndim else float(out)

    def to_dict(self):
        return {
            "kind": self.kind,
            "grid": self.grid.tolist(),
            "pdf": self.pdf_values.tolist(),
            "cdf": self.cdf_values.tolist(),
            "mean": self.mean,
            "bandwidth": self.bandwidth,
        }


class ParametricMargin:
    """Wrapper over a scipy distribution, used for simulation and oracles."""

    kind = "parametric"
    _FAMILIES = {
        "normal": lambda p: stats.norm(p.get("loc", 0.0), p.get("scale", 1.0)),
        "t": lambda p: stats.t(p["df"], p.get("loc", 0.0), p.get("scale", 1.0)),
        "beta": lambda p: stats.beta(p["a"], p["b"]),
        "lognormal": lambda p: stats.lognorm(p["sigma"], scale=math.exp(p.get("mu", 0.0))),
        "uniform": lambda p: stats.uniform(p.get("loc", 0.0), p.get("scale", 1.0)),
    }

    def __init__(self, family, **params):
        if family not in self._FAMILIES:
            raise ValueError(f"unknown margin family {family!r}")
        self.family = family
        self.params = params
        self.dist = self._FAMILIES[family](params)
        m = self.dist.mean()
        self.mean = float(m) if np.isfinite(m) else float(self.dist.median())

    def cdf(self, x):
        return self.dist.cdf(x)

    def pdf(self, x):
        return self.dist.pdf(x)

    def ppf(self, q):
        return self.dist.ppf(q)

    def to_dict(self):
        return {"kind": self.kind, "family": self.family, "params": self.params}


def fit_margin(data, grid_size=GRID_SIZE, sensitivity=0.5):
    """Abramson adaptive Gaussian KDE with a Silverman pilot."""
    x = np.sort(np.asarray(data, dtype=float).ravel())
    if x.size < 100:
        raise ValueError("need at least 100 observations to fit a margin")
    if not np.all(np.isfinite(x)):
        raise ValueError("data contain non-finite values")
    if x[-1] - x[0] <= 0:
        raise DegenerateMarginError("constant series")
    h0 = _silverman(x)
    if not h0 > 0:
        raise DegenerateMarginError("zero spread")
    # data are linearly binned onto a fine node set; the kernel sums then
    # cost O(nodes * window) instead of O(n * window)
    nodes = _make_grid(x, x[0], x[-1], BIN_NODES)
    wt = _linear_bin(x, nodes)
    hpilot = np.full(nodes.size, h0)
    grid = _make_grid(x, x[0] - KERNEL_CUTOFF * h0, x[-1] + KERNEL_CUTOFF * h0, grid_size)
    pilot, _, _ = _kde_on_grid(nodes, wt, hpilot, grid, KERNEL_CUTOFF)
    fp = np.maximum(np.interp(x, grid, pilot), 1e-300)
    g = np.exp(np.mean(np.log(fp)))
    fnode = np.maximum(np.interp(nodes, grid, pilot), 1e-300)
    # local factors clipped so isolated outliers cannot blow up the support
    h = h0 * np.clip((fnode / g) ** (-sensitivity), 1.0 / LOCAL_FACTOR_MAX, LOCAL_FACTOR_MAX)
    used = wt > 0
    lo = np.min(nodes[used] - KERNEL_CUTOFF * h[used])
    hi = np.max(nodes[used] + KERNEL_CUTOFF * h[used])
    grid = _make_grid(x, lo, hi, grid_size)
    pdf, lower, upper = _kde_on_grid(nodes, wt, h, grid, KERNEL_CUTOFF)
    cdf = np.where(lower <= upper, lower, 1.0 - upper)
    cdf = np.maximum.accumulate(np.clip(cdf, 0.0, 1.0))
    return KdeMargin(grid, pdf, cdf, np.mean(x), bandwidth=h0)


def margin_from_dict(d):
    if d["kind"] == "kde":
        return KdeMargin(d["grid"], d["pdf"], d["cdf"], d["mean"], d.get("bandwidth"))
    if d["kind"] == "parametric":
        return ParametricMargin(d["family"], **d["params"])
    raise ValueError(f"unknown margin kind {d['kind']!r}")


def pit(margin, data):
    """u_t = F(y_t), clamped into the open unit interval."""
    return np.clip(margin.cdf(np.asarray(data, dtype=float)), PIT_EPS, 1.0 - PIT_EPS)


def moments(data):
    x = np.asarray(data, dtype=float).ravel()
    if x.size < 4:
        raise ValueError("need at least 4 observations")
    return {
        "mean": float(np.mean(x)),
        "sd": float(np.std(x, ddof=1)),
        "skewness": float(stats.skew(x)),
        "kurtosis": float(stats.kurtosis(x, fisher=False)),
    }
