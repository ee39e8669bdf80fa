"""Compiled Student-t distribution kernels.

scipy's ``stdtrit`` is too slow for likelihoods that re-quantile tens of
thousands of points per evaluation, so the CDF is computed from a continued
fraction for the regularized incomplete beta and the quantile is refined by
Newton steps in log-probability from Hill's (1970) starting value.
"""

import math

import numpy as np
from numba import njit, vectorize

_TINY = 1e-300


@njit(cache=True)
def _betacf(a, b, x):
    # modified Lentz evaluation of the incomplete-beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 3e-16:
            break
    return h


@njit(cache=True)
def _log_lower_tail(x, nu, lbeta):
    """log P(T <= x) for x <= 0, accurate in the far tail."""
    if x == 0.0:
        return math.log(0.5)
    x2 = x * x
    a = 0.5 * nu
    b = 0.5
    # z = nu / (nu + x^2), 1 - z = x^2 / (nu + x^2)
    if x2 > 1e100:
        lden = 2.0 * math.log(-x) + math.log1p(nu / x2)
    else:
        lden = math.log(nu + x2)
    lz = math.log(nu) - lden
    l1z = 2.0 * math.log(-x) - lden
    z = math.exp(lz)
    if z < (a + 1.0) / (a + b + 2.0):
        return math.log(0.5) + a * lz + b * l1z - lbeta + math.log(_betacf(a, b, z) / a)
    # symmetry I_z(a, b) = 1 - I_{1-z}(b, a)
    ib = math.exp(b * l1z + a * lz - lbeta) * _betacf(b, a, math.exp(l1z)) / b
    return math.log(0.5) + math.log1p(-ib)


@njit(cache=True)
def _lbeta(nu):
    return math.lgamma(0.5 * nu) + math.lgamma(0.5) - math.lgamma(0.5 * nu + 0.5)


@njit(cache=True)
def _logpdf_const(nu):
    return math.lgamma(0.5 * (nu + 1.0)) - math.lgamma(0.5 * nu) - 0.5 * math.log(nu * math.pi)


@njit(cache=True)
def _t_cdf(x, nu):
    if math.isnan(x):
        return math.nan
    if math.isinf(x):
        return 0.0 if x < 0 else 1.0
    lb = _lbeta(nu)
    if x <= 0.0:
        return math.exp(_log_lower_tail(x, nu, lb))
    return -math.expm1(_log_lower_tail(-x, nu, lb))


@njit(cache=True)
def _t_logpdf(x, nu):
    return _logpdf_const(nu) - 0.5 * (nu + 1.0) * math.log1p(x * x / nu)


@njit(cache=True)
def _ndtri(p):
    # Acklam's rational approximation; refined later by Newton steps
    a0, a1, a2 = -3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02
    a3, a4, a5 = 1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00
    b0, b1, b2 = -5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02
    b3, b4 = 6.680131188771972e01, -1.328068155288572e01
    c0, c1, c2 = -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00
    c3, c4, c5 = -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00
    d0, d1, d2, d3 = 7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00, 3.754408661907416e00
    if p < 0.02425:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((c0 * q + c1) * q + c2) * q + c3) * q + c4) * q + c5) / (
            (((d0 * q + d1) * q + d2) * q + d3) * q + 1.0
        )
    if p > 1.0 - 0.02425:
        q = math.sqrt(-2.0 * math.log1p(-p))
        return -(((((c0 * q + c1) * q + c2) * q + c3) * q + c4) * q + c5) / (
            (((d0 * q + d1) * q + d2) * q + d3) * q + 1.0
        )
    q = p - 0.5
    r = q * q
    return (((((a0 * r + a1) * r + a2) * r + a3) * r + a4) * r + a5) * q / (
        ((((b0 * r + b1) * r + b2) * r + b3) * r + b4) * r + 1.0
    )


@njit(cache=True)
def _hill_start(p, nu):
    """Hill's approximation to the lower-tail quantile, p <= 0.5."""
    P = 2.0 * p
    if abs(nu - 2.0) < 1e-12:
        q = math.sqrt(2.0 / (P * (2.0 - P)) - 2.0)
    elif nu < 1.0 + 1e-12:
        q = math.cos(P * math.pi / 2.0) / math.sin(P * math.pi / 2.0)
    else:
        a = 1.0 / (nu - 0.5)
        b = 48.0 / (a * a)
        c = ((20700.0 * a / b - 98.0) * a - 16.0) * a + 96.36
        d = ((94.5 / (b + c) - 3.0) / b + 1.0) * math.sqrt(a * math.pi / 2.0) * nu
        y = (d * P) ** (2.0 / nu)
        if y > 0.05 + a:
            x = _ndtri(0.5 * P)
            y = x * x
            if nu < 5.0:
                c += 0.3 * (nu - 4.5) * (x + 0.6)
            c = (((0.05 * d * x - 5.0) * x - 7.0) * x - 2.0) * x + b + c
            y = (((((0.4 * y + 6.3) * y + 36.0) * y + 94.5) / c - y - 3.0) / b + 1.0) * x
            y = math.expm1(a * y * y)
        else:
            y = ((1.0 / (((nu + 6.0) / (nu * y) - 0.089 * d - 0.822) * (nu + 2.0) * 3.0)
                  + 0.5 / (nu + 4.0)) * y - 1.0) * (nu + 1.0) / (nu + 2.0) + 1.0 / y
        q = math.sqrt(nu * y)
    return -q


@njit(cache=True)
def _t_ppf(p, nu):
    if math.isnan(p) or p < 0.0 or p > 1.0:
        return math.nan
    if p == 0.0:
        return -math.inf
    if p == 1.0:
        return math.inf
    if p == 0.5:
        return 0.0
    upper = p > 0.5
    pl = 1.0 - p if upper else p
    lb = _lbeta(nu)
    lc = _logpdf_const(nu)
    x = _hill_start(pl, nu)
    if not math.isfinite(x) or x >= 0.0:
        x = -1.0
    lp = math.log(pl)
    for _ in range(100):
        lF = _log_lower_tail(x, nu, lb)
        lf = lc - 0.5 * (nu + 1.0) * math.log1p(x * x / nu)
        # Newton on log F; x stays negative
        xn = x - (lF - lp) * math.exp(lF - lf)
        if xn >= 0.0:
            xn = 0.5 * x
        elif xn < 10.0 * x:
            xn = 10.0 * x
        if abs(xn - x) <= 4e-15 * abs(x) or abs(lF - lp) < 1e-15:
            x = xn
            break
        x = xn
    return -x if upper else x


@vectorize(["float64(float64, float64)"], cache=True)
def t_cdf(x, nu):
    """Student-t CDF."""
    return _t_cdf(x, nu)


@vectorize(["float64(float64, float64)"], cache=True)
def t_ppf(p, nu):
    """Student-t quantile function."""
    return _t_ppf(p, nu)


@vectorize(["float64(float64, float64)"], cache=True)
def t_logpdf(x, nu):
    """Student-t log density."""
    return _t_logpdf(x, nu)


def t_pdf(x, nu):
    return np.exp(t_logpdf(x, nu))


# Tabulated quantile: cubic Hermite in logit(p) with exact slopes p(1-p)/f(x).
# Relative error is below 1e-9 away from the far tails, where p itself is
# already the limiting factor.
TABLE_LOGIT = 24.0
TABLE_NODES = 2048


@njit(cache=True)
def _hermite_ppf(p, s0, h, xs, dxs, nu, out):
    n = xs.size
    smax = s0 + h * (n - 1)
    for i in range(p.size):
        pi = p[i]
        if not (0.0 < pi < 1.0):
            out[i] = _t_ppf(pi, nu)
            continue
        s = math.log(pi) - math.log1p(-pi)
        if s < s0 or s > smax:
            out[i] = _t_ppf(pi, nu)
            continue
        t = (s - s0) / h
        j = min(int(t), n - 2)
        t -= j
        t2 = t * t
        t3 = t2 * t
        out[i] = ((2 * t3 - 3 * t2 + 1) * xs[j] + (t3 - 2 * t2 + t) * h * dxs[j]
                  + (3 * t2 - 2 * t3) * xs[j + 1] + (t3 - t2) * h * dxs[j + 1])
    return out


class PpfTable:
    """Fast t quantile for one fixed nu, for bulk re-quantiling in likelihoods."""

    def __init__(self, nu, nodes=TABLE_NODES, logit_max=TABLE_LOGIT):
        self.nu = float(nu)
        s = np.linspace(-logit_max, logit_max, nodes)
        p = 1.0 / (1.0 + np.exp(-s))
        x = t_ppf(p, self.nu)
        self._s0 = float(s[0])
        self._h = float(s[1] - s[0])
        self._x = x
        self._dx = p * (1.0 - p) / t_pdf(x, self.nu)

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        flat = np.ascontiguousarray(p.ravel())
        out = np.empty_like(flat)
        _hermite_ppf(flat, self._s0, self._h, self._x, self._dx, self.nu, out)
        return out.reshape(p.shape) if p.ndim else out[0]
