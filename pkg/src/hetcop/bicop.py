"""Bivariate parametric copulas used as pair-copulas of the D-vines.

Every family exposes the same vectorized surface:

* ``pdf``/``logpdf``/``cdf`` evaluated at ``(u, v)``;
* ``h1(v, u)`` = dC/du, the conditional CDF of V given U = u;
* ``h2(u, v)`` = dC/dv, the conditional CDF of U given V = v;
* ``h1inv``/``h2inv`` inverting those in their first argument;
* ``spearman_rho`` by tensor Gauss-Legendre quadrature and ``sample``.

The mixture family combines a component with the 90 degree rotation of a
second component, ``w c_a(u, v) + (1 - w) c_b(1 - u, v)``. Its h-functions
differ, so the order of arguments matters throughout.
"""

import math

import numpy as np
from scipy import special

from ._quad import gauss_legendre, tanh_sinh
from ._tdist import PpfTable, t_cdf, t_logpdf, t_ppf

EPS = 1e-10
NU_MAX = 40.0
NU_MIN = 2.0
HINV_TOL = 1e-12
HINV_MAXITER = 200
RHO_NODES = 200


class CopulaError(ValueError):
    pass


class InvalidParameterError(CopulaError):
    pass


class DomainError(CopulaError):
    pass


class NumericalError(ArithmeticError):
    """Raised when an iterative solver fails; carries the worst residual."""

    def __init__(self, message, residual=None, where=None):
        super().__init__(message)
        self.residual = residual
        self.where = where


def _prepare(*args, clamp=True):
    arrs = np.broadcast_arrays(*[np.asarray(a, dtype=float) for a in args])
    out = []
    for a in arrs:
        if np.any(np.isnan(a)) or np.any(a < 0.0) or np.any(a > 1.0):
            raise DomainError("copula arguments must lie in [0, 1]")
        out.append(np.clip(a, EPS, 1.0 - EPS) if clamp else a)
    return out


def _ret(x):
    return float(x) if np.ndim(x) == 0 else x


def _check_open_unit(name, value, lo=0.0, hi=1.0, closed_lo=False, closed_hi=False):
    ok_lo = value >= lo if closed_lo else value > lo
    ok_hi = value <= hi if closed_hi else value < hi
    if not (np.isfinite(value) and ok_lo and ok_hi):
        raise InvalidParameterError(f"{name}={value} outside its constraint set")


class PairCopula:
    """Base class; subclasses implement the closed-form pieces."""

    family = "base"
    param_names = ()
    # (lower, upper) of the open constraint set per parameter
    bounds = {}
    exchangeable = False

    # -- parameters ---------------------------------------------------
    @property
    def params(self):
        return {k: getattr(self, k) for k in self.param_names}

    def to_vector(self):
        return np.array([getattr(self, k) for k in self.param_names], dtype=float)

    def with_vector(self, vec):
        return type(self)(*[float(x) for x in vec])

    def param_bounds(self):
        return [self.bounds[k] for k in self.param_names]

    def to_dict(self):
        return {"family": self.family, "params": self.params}

    def __repr__(self):
        inner = ", ".join(f"{k}={v:.6g}" for k, v in self.params.items())
        return f"{type(self).__name__}({inner})"

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    # -- kernels (clamped inputs) --------------------------------------
    def _logpdf(self, u, v):
        raise NotImplementedError

    def _h1(self, v, u):
        raise NotImplementedError

    def _h2(self, u, v):
        raise NotImplementedError

    def _cdf(self, u, v):
        raise NotImplementedError

    def _evaluate(self, u, v):
        return self._logpdf(u, v), self._h1(v, u), self._h2(u, v)

    def _cond1(self, u):
        """x, idx -> (h1(x | u[idx]), c(u[idx], x)), u-dependent work done once."""
        u = np.asarray(u, dtype=float).ravel()
        return lambda x, idx: (self._h1(x, u[idx]), np.exp(self._logpdf(u[idx], x)))

    def _cond2(self, v):
        """x, idx -> (h2(x | v[idx]), c(x, v[idx]))."""
        v = np.asarray(v, dtype=float).ravel()
        return lambda x, idx: (self._h2(x, v[idx]), np.exp(self._logpdf(x, v[idx])))

    def _h1inv(self, q, u):
        q, u = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(u, dtype=float))
        return _solve_h(self._cond1(u), q)

    def _h2inv(self, q, v):
        q, v = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(v, dtype=float))
        return _solve_h(self._cond2(v), q)

    # -- public API ------------------------------------------------------
    def logpdf(self, u, v):
        u, v = _prepare(u, v)
        return _ret(self._logpdf(u, v))

    def pdf(self, u, v):
        return _ret(np.exp(self.logpdf(u, v)))

    def cdf(self, u, v):
        u0, v0 = _prepare(u, v, clamp=False)
        u, v = np.clip(u0, EPS, 1 - EPS), np.clip(v0, EPS, 1 - EPS)
        c = np.clip(self._cdf(u, v), 0.0, np.minimum(u, v))
        c = np.maximum(c, u + v - 1.0)
        c = np.where(u0 >= 1.0, v0, c)
        c = np.where(v0 >= 1.0, u0, c)
        c = np.where((u0 <= 0.0) | (v0 <= 0.0), 0.0, c)
        return _ret(c)

    def h1(self, v, u):
        v, u = _prepare(v, u)
        return _ret(np.clip(self._h1(v, u), 0.0, 1.0))

    def h2(self, u, v):
        u, v = _prepare(u, v)
        return _ret(np.clip(self._h2(u, v), 0.0, 1.0))

    def evaluate(self, u, v):
        """(logpdf, h1(v|u), h2(u|v)) sharing intermediate work."""
        u, v = _prepare(u, v)
        lp, a, b = self._evaluate(u, v)
        return lp, np.clip(a, 0.0, 1.0), np.clip(b, 0.0, 1.0)

    def h1inv(self, q, u):
        q, u = _prepare(q, u)
        return _ret(np.clip(self._h1inv(q, u), EPS, 1 - EPS))

    def h2inv(self, q, v):
        q, v = _prepare(q, v)
        return _ret(np.clip(self._h2inv(q, v), EPS, 1 - EPS))

    def spearman_rho(self, nodes=RHO_NODES):
        """12 E[UV] - 3 written as 12 int u (1 - int h1(v|u) dv) du - 3."""
        x, w = gauss_legendre(nodes)
        uu, vv = np.meshgrid(x, x, indexing="ij")
        h = np.asarray(self._h1(vv, uu))
        cond_mean = 1.0 - h @ w
        return float(12.0 * np.sum(w * x * cond_mean) - 3.0)

    def sample(self, n, seed=None):
        """n i.i.d. pairs by conditional inversion, shape (n, 2)."""
        rng = np.random.default_rng(seed)
        u = rng.uniform(size=n)
        q = rng.uniform(size=n)
        u = np.clip(u, EPS, 1 - EPS)
        q = np.clip(q, EPS, 1 - EPS)
        v = np.clip(self._h1inv(q, u), EPS, 1 - EPS)
        return np.column_stack([u, v])

    def tail_dependence(self):
        """Lower and upper extremal tail dependence, where available."""
        raise NotImplementedError(f"no tail-dependence limit for {self.family}")


def _solve_h(cond, q, bracket=None, lo=EPS, hi=1.0 - EPS, tol=HINV_TOL, maxiter=HINV_MAXITER):
    """Solve h(x) = q for x in (lo, hi) elementwise, h nondecreasing.

    ``cond(x, idx)`` returns (h, dh/dx) for the elements selected by idx.
    Newton in logit space safeguarded by a bisection bracket; only the
    unconverged elements are re-evaluated. An optional (xlo, xhi) bracket
    known to contain the root speeds this up considerably.
    """
    q = np.asarray(q, dtype=float)
    shape = q.shape
    q = q.ravel()
    if bracket is None:
        zlo = np.full(q.shape, special.logit(lo))
        zhi = np.full(q.shape, special.logit(hi))
        z = special.logit(np.clip(q, lo, hi))
    else:
        xl = np.clip(np.ravel(bracket[0]), lo, hi)
        xh = np.clip(np.ravel(bracket[1]), lo, hi)
        # widen by a hair so roots sitting on an endpoint stay interior
        zlo = special.logit(xl) - 1e-9
        zhi = special.logit(xh) + 1e-9
        z = 0.5 * (zlo + zhi)
    x = special.expit(z)
    idx = np.arange(q.size)
    hv, d = cond(x, idx)
    f = hv - q
    d = d * x * (1.0 - x)
    for _ in range(maxiter):
        zi, fi = z[idx], f[idx]
        done = (np.abs(fi) <= tol) | (zhi[idx] - zlo[idx] <= 1e-13 * (1.0 + np.abs(zi)))
        keep = ~done
        idx, zi, fi, di = idx[keep], zi[keep], fi[keep], d[keep]
        if idx.size == 0:
            break
        zlo[idx] = np.where(fi < 0, zi, zlo[idx])
        zhi[idx] = np.where(fi > 0, zi, zhi[idx])
        with np.errstate(divide="ignore", invalid="ignore"):
            zn = zi - fi / di
        bad = ~np.isfinite(zn) | (zn <= zlo[idx]) | (zn >= zhi[idx])
        zn = np.where(bad, 0.5 * (zlo[idx] + zhi[idx]), zn)
        z[idx] = zn
        xi = special.expit(zn)
        x[idx] = xi
        hv, di = cond(xi, idx)
        f[idx] = hv - q[idx]
        d = di * xi * (1.0 - xi)
    # values pinned at the clamp boundary are legitimate limits
    at_edge = ((x <= lo * (1 + 1e-9)) & (f >= 0)) | ((x >= hi - 1e-12) & (f <= 0))
    # a bracket collapsed to machine width has located the root; what is left
    # of the residual is roundoff in h itself unless it is large
    collapsed = (zhi - zlo <= 1e-13 * (1.0 + np.abs(z))) & (np.abs(f) < 1e-6)
    resid = np.where(at_edge | collapsed, 0.0, np.abs(f))
    if np.any(resid > 1e-10):
        k = int(np.argmax(resid))
        raise NumericalError(
            f"h-inverse did not converge (residual {resid[k]:.3g})", residual=float(resid[k]), where=k
        )
    return np.clip(x, lo, hi).reshape(shape)


class Independence(PairCopula):
    family = "independence"
    exchangeable = True

    def _logpdf(self, u, v):
        return np.zeros(np.broadcast(u, v).shape)

    def _h1(self, v, u):
        return np.broadcast_to(v, np.broadcast(u, v).shape).astype(float)

    def _h2(self, u, v):
        return np.broadcast_to(u, np.broadcast(u, v).shape).astype(float)

    def _cdf(self, u, v):
        return u * v

    def _h1inv(self, q, u):
        return np.broadcast_to(q, np.broadcast(q, u).shape).astype(float)

    def _h2inv(self, q, v):
        return self._h1inv(q, v)

    def spearman_rho(self, nodes=RHO_NODES):
        return 0.0

    def tail_dependence(self):
        return 0.0, 0.0


class _Elliptical(PairCopula):
    """Shared CDF quadrature for the radially symmetric, exchangeable families."""

    exchangeable = True

    def _cdf(self, u, v):
        u, v = np.broadcast_arrays(u, v)
        a = np.minimum(u, v)
        b = np.maximum(u, v)
        # radial symmetry: C(u, v) = u + v - 1 + C(1 - u, 1 - v)
        flip = a > 0.5
        a2 = np.where(flip, 1.0 - b, a)
        b2 = np.where(flip, 1.0 - a, b)
        left, _, w = tanh_sinh()
        out = np.empty(a.shape)
        af, bf, of = a2.ravel(), b2.ravel(), out.ravel()
        chunk = max(1, 200_000 // left.size)
        for i in range(0, af.size, chunk):
            s = af[i:i + chunk, None] * left[None, :]
            h = self._h1(bf[i:i + chunk, None], np.maximum(s, 1e-300))
            of[i:i + chunk] = af[i:i + chunk] * (h @ w)
        out = of.reshape(a.shape)
        return np.where(flip, u + v - 1.0 + out, out)


class Gaussian(_Elliptical):
    family = "gaussian"
    param_names = ("rho",)
    bounds = {"rho": (-1.0, 1.0)}

    def __init__(self, rho):
        _check_open_unit("rho", rho, -1.0, 1.0)
        self.rho = float(rho)

    def _logpdf(self, u, v):
        x, y, r = special.ndtri(u), special.ndtri(v), self.rho
        s = 1.0 - r * r
        return -0.5 * np.log(s) - (r * r * (x * x + y * y) - 2.0 * r * x * y) / (2.0 * s)

    def _h1(self, v, u):
        x, y, r = special.ndtri(u), special.ndtri(v), self.rho
        return special.ndtr((y - r * x) / math.sqrt(1.0 - r * r))

    def _h2(self, u, v):
        return self._h1(u, v)

    def _h1inv(self, q, u):
        r = self.rho
        return special.ndtr(special.ndtri(q) * math.sqrt(1.0 - r * r) + r * special.ndtri(u))

    def _h2inv(self, q, v):
        return self._h1inv(q, v)

    def tail_dependence(self):
        return 0.0, 0.0


class StudentT(_Elliptical):
    """Bivariate t copula with correlation zeta in (0, 1) and dof nu in (2, 40]."""

    family = "t"
    param_names = ("zeta", "nu")
    bounds = {"zeta": (0.0, 1.0), "nu": (NU_MIN, NU_MAX)}

    def __init__(self, zeta, nu):
        _check_open_unit("zeta", zeta, 0.0, 1.0, closed_lo=True)
        _check_open_unit("nu", nu, NU_MIN, NU_MAX, closed_hi=True)
        self.zeta = float(zeta)
        self.nu = float(nu)
        nu = self.nu
        self._lconst = (
            special.gammaln(0.5 * (nu + 2.0))
            + special.gammaln(0.5 * nu)
            - 2.0 * special.gammaln(0.5 * (nu + 1.0))
            - 0.5 * math.log1p(-self.zeta**2)
        )

    def quantiles(self, u):
        # built on first use; instances are immutable so the table is reusable
        tab = self.__dict__.get("_ppf")
        if tab is None:
            tab = self._ppf = PpfTable(self.nu)
        return tab(u)

    def _logpdf_x(self, x, y):
        nu, r = self.nu, self.zeta
        s = 1.0 - r * r
        return (
            self._lconst
            - 0.5 * (nu + 2.0) * np.log1p((x * x + y * y - 2.0 * r * x * y) / (nu * s))
            + 0.5 * (nu + 1.0) * (np.log1p(x * x / nu) + np.log1p(y * y / nu))
        )

    def _hx(self, y, x):
        # conditional CDF of the quantile y given x; Aas et al. form
        nu, r = self.nu, self.zeta
        scale = np.sqrt((nu + x * x) * (1.0 - r * r) / (nu + 1.0))
        return t_cdf((y - r * x) / scale, nu + 1.0)

    def _logpdf(self, u, v):
        return self._logpdf_x(self.quantiles(u), self.quantiles(v))

    def _h1(self, v, u):
        return self._hx(self.quantiles(v), self.quantiles(u))

    def _h2(self, u, v):
        return self._hx(self.quantiles(u), self.quantiles(v))

    def _evaluate(self, u, v):
        x, y = self.quantiles(u), self.quantiles(v)
        return self._logpdf_x(x, y), self._hx(y, x), self._hx(x, y)

    def _cond1(self, u):
        nu, r = self.nu, self.zeta
        xu = self.quantiles(np.asarray(u, dtype=float).ravel())
        scale = np.sqrt((nu + xu * xu) * (1.0 - r * r) / (nu + 1.0))

        def f(x, idx):
            y = self.quantiles(x)
            xi = xu[idx]
            return t_cdf((y - r * xi) / scale[idx], nu + 1.0), np.exp(self._logpdf_x(xi, y))

        return f

    _cond2 = _cond1

    def _h1inv(self, q, u):
        nu, r = self.nu, self.zeta
        x = self.quantiles(u)
        scale = np.sqrt((nu + x * x) * (1.0 - r * r) / (nu + 1.0))
        return t_cdf(t_ppf(q, nu + 1.0) * scale + r * x, nu)

    def _h2inv(self, q, v):
        return self._h1inv(q, v)

    def tail_dependence(self):
        nu, r = self.nu, self.zeta
        lam = 2.0 * float(t_cdf(-math.sqrt((nu + 1.0) * (1.0 - r) / (1.0 + r)), nu + 1.0))
        return lam, lam


class Gumbel(PairCopula):
    """Gumbel copula parameterized by Kendall's tau, theta = 1 / (1 - tau)."""

    family = "gumbel"
    param_names = ("tau",)
    bounds = {"tau": (0.0, 1.0)}
    exchangeable = True

    def __init__(self, tau):
        _check_open_unit("tau", tau, 0.0, 1.0, closed_lo=True)
        self.tau = float(tau)
        self.theta = 1.0 / (1.0 - self.tau)

    def _parts(self, u, v):
        x = -np.log(u)
        y = -np.log(v)
        th = self.theta
        lx, ly = np.log(x), np.log(y)
        big = np.maximum(lx, ly)
        small = np.minimum(lx, ly)
        lz = big + np.log1p(np.exp(th * (small - big))) / th
        return x, y, lx, ly, lz

    def _logpdf(self, u, v):
        x, y, lx, ly, lz = self._parts(u, v)
        th = self.theta
        z = np.exp(lz)
        return -z + (th - 1.0) * (lx + ly) + x + y + 2.0 * (1.0 - th) * lz + np.log1p((th - 1.0) / z)

    def _h1(self, v, u):
        x, y, lx, ly, lz = self._parts(u, v)
        return np.exp(-np.exp(lz) + x + (self.theta - 1.0) * (lx - lz))

    def _h2(self, u, v):
        x, y, lx, ly, lz = self._parts(u, v)
        return np.exp(-np.exp(lz) + y + (self.theta - 1.0) * (ly - lz))

    def _evaluate(self, u, v):
        x, y, lx, ly, lz = self._parts(u, v)
        th = self.theta
        z = np.exp(lz)
        lp = -z + (th - 1.0) * (lx + ly) + x + y + 2.0 * (1.0 - th) * lz + np.log1p((th - 1.0) / z)
        h1 = np.exp(-z + x + (th - 1.0) * (lx - lz))
        h2 = np.exp(-z + y + (th - 1.0) * (ly - lz))
        return lp, h1, h2

    def _cdf(self, u, v):
        return np.exp(-np.exp(self._parts(u, v)[4]))

    def _h1inv(self, q, u):
        # solve z + (theta-1) log z = x + (theta-1) log x - log q for z >= x
        th = self.theta
        q, u = np.broadcast_arrays(q, u)
        x = -np.log(u)
        rhs = x + (th - 1.0) * np.log(x) - np.log(q)
        z = np.maximum(x, rhs - (th - 1.0) * np.log(np.maximum(x, 1e-300)))
        z = np.maximum(z, x)
        for it in range(HINV_MAXITER):
            g = z + (th - 1.0) * np.log(z) - rhs
            zn = z - g / (1.0 + (th - 1.0) / z)
            zn = np.where(zn < x, 0.5 * (z + x), zn)
            if np.all(np.abs(zn - z) <= 1e-14 * zn):
                z = zn
                break
            z = zn
        else:
            g = z + (th - 1.0) * np.log(z) - rhs
            raise NumericalError("Gumbel h-inverse did not converge", residual=float(np.max(np.abs(g))))
        # y = (z^th - x^th)^(1/th)
        ly = np.log(z) + np.log(-np.expm1(th * (np.log(x) - np.log(z)))) / th
        return np.exp(-np.exp(ly))

    def _h2inv(self, q, v):
        return self._h1inv(q, v)

    def tail_dependence(self):
        return 0.0, 2.0 - 2.0 ** (1.0 / self.theta)


class ConvexGumbel(PairCopula):
    """delta * Gumbel(u, v) + (1 - delta) * Gumbel survival copula."""

    family = "convex_gumbel"
    param_names = ("tau", "delta")
    bounds = {"tau": (0.0, 1.0), "delta": (0.0, 1.0)}
    exchangeable = True

    def __init__(self, tau, delta):
        _check_open_unit("delta", delta, 0.0, 1.0, closed_lo=True, closed_hi=True)
        self.gumbel = Gumbel(tau)
        self.tau = float(tau)
        self.delta = float(delta)

    def _logpdf(self, u, v):
        d = self.delta
        g = self.gumbel
        if d >= 1.0:
            return g._logpdf(u, v)
        if d <= 0.0:
            return g._logpdf(1.0 - u, 1.0 - v)
        return np.logaddexp(math.log(d) + g._logpdf(u, v), math.log1p(-d) + g._logpdf(1.0 - u, 1.0 - v))

    def _h1(self, v, u):
        d, g = self.delta, self.gumbel
        return d * g._h1(v, u) + (1.0 - d) * (1.0 - g._h1(1.0 - v, 1.0 - u))

    def _h2(self, u, v):
        d, g = self.delta, self.gumbel
        return d * g._h2(u, v) + (1.0 - d) * (1.0 - g._h2(1.0 - u, 1.0 - v))

    def _evaluate(self, u, v):
        d, g = self.delta, self.gumbel
        lp1, a1, b1 = g._evaluate(u, v)
        lp2, a2, b2 = g._evaluate(1.0 - u, 1.0 - v)
        if d >= 1.0:
            lp = lp1
        elif d <= 0.0:
            lp = lp2
        else:
            lp = np.logaddexp(math.log(d) + lp1, math.log1p(-d) + lp2)
        return lp, d * a1 + (1.0 - d) * (1.0 - a2), d * b1 + (1.0 - d) * (1.0 - b2)

    def _cdf(self, u, v):
        d, g = self.delta, self.gumbel
        return d * g._cdf(u, v) + (1.0 - d) * (u + v - 1.0 + g._cdf(1.0 - u, 1.0 - v))

    def _h1inv(self, q, u):
        if self.delta >= 1.0:
            return self.gumbel._h1inv(q, u)
        if self.delta <= 0.0:
            return 1.0 - self.gumbel._h1inv(1.0 - q, 1.0 - u)
        if self.tau == 0.0:
            return np.broadcast_to(q, np.broadcast(q, u).shape).astype(float)
        q, u = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(u, dtype=float))
        xa = self.gumbel._h1inv(q, u)
        xb = 1.0 - self.gumbel._h1inv(1.0 - q, 1.0 - u)
        return _solve_h(self._cond1(u), q, bracket=(np.minimum(xa, xb), np.maximum(xa, xb)))

    def _h2inv(self, q, v):
        return self._h1inv(q, v)

    def tail_dependence(self):
        lam = 2.0 - 2.0 ** (1.0 / self.gumbel.theta)
        return (1.0 - self.delta) * lam, self.delta * lam


class Rotated90(PairCopula):
    """90 degree rotation c(1 - u, v) of a base copula."""

    family = "rotated90"

    def __init__(self, base):
        if not isinstance(base, PairCopula):
            raise InvalidParameterError("rotation needs a base PairCopula")
        self.base = base
        self.param_names = base.param_names
        self.bounds = base.bounds

    @property
    def params(self):
        return self.base.params

    def to_vector(self):
        return self.base.to_vector()

    def with_vector(self, vec):
        return Rotated90(self.base.with_vector(vec))

    def to_dict(self):
        return {"family": self.family, "params": {"base": self.base.to_dict()}}

    def _logpdf(self, u, v):
        return self.base._logpdf(1.0 - u, v)

    def _h1(self, v, u):
        return self.base._h1(v, 1.0 - u)

    def _h2(self, u, v):
        return 1.0 - self.base._h2(1.0 - u, v)

    def _evaluate(self, u, v):
        lp, a, b = self.base._evaluate(1.0 - u, v)
        return lp, a, 1.0 - b

    def _cdf(self, u, v):
        return v - self.base._cdf(1.0 - u, v)

    def _cond1(self, u):
        return self.base._cond1(1.0 - np.asarray(u, dtype=float))

    def _cond2(self, v):
        fb = self.base._cond2(v)

        def f(x, idx):
            h, d = fb(1.0 - x, idx)
            return 1.0 - h, d

        return f

    def _h1inv(self, q, u):
        return self.base._h1inv(q, 1.0 - u)

    def _h2inv(self, q, v):
        return 1.0 - self.base._h2inv(1.0 - q, v)

    def spearman_rho(self, nodes=RHO_NODES):
        return -self.base.spearman_rho(nodes)


class Mixture(PairCopula):
    """w c_a(u, v) + (1 - w) c_b(1 - u, v) with components of one family."""

    family = "mixture"

    def __init__(self, w, comp_a, comp_b):
        _check_open_unit("w", w, 0.0, 1.0)
        if not isinstance(comp_a, (StudentT, ConvexGumbel)) or type(comp_a) is not type(comp_b):
            raise InvalidParameterError("mixture components must both be t or both convex Gumbel")
        self.w = float(w)
        self.a = comp_a
        self.b = comp_b
        self.param_names = ("w",) + tuple("a." + k for k in comp_a.param_names) + tuple(
            "b." + k for k in comp_b.param_names
        )
        self.bounds = {"w": (0.0, 1.0)}
        self.bounds.update({"a." + k: v for k, v in comp_a.bounds.items()})
        self.bounds.update({"b." + k: v for k, v in comp_b.bounds.items()})

    @property
    def component_family(self):
        return self.a.family

    @property
    def params(self):
        out = {"w": self.w}
        out.update({"a." + k: v for k, v in self.a.params.items()})
        out.update({"b." + k: v for k, v in self.b.params.items()})
        return out

    def to_vector(self):
        return np.concatenate([[self.w], self.a.to_vector(), self.b.to_vector()])

    def with_vector(self, vec):
        na = len(self.a.param_names)
        return Mixture(float(vec[0]), self.a.with_vector(vec[1:1 + na]), self.b.with_vector(vec[1 + na:]))

    def to_dict(self):
        return {"family": self.family, "params": {"w": self.w, "a": self.a.to_dict(), "b": self.b.to_dict()}}

    def _logpdf(self, u, v):
        return np.logaddexp(
            math.log(self.w) + self.a._logpdf(u, v), math.log1p(-self.w) + self.b._logpdf(1.0 - u, v)
        )

    def _h1(self, v, u):
        w = self.w
        return w * self.a._h1(v, u) + (1.0 - w) * self.b._h1(v, 1.0 - u)

    def _h2(self, u, v):
        w = self.w
        return w * self.a._h2(u, v) + (1.0 - w) * (1.0 - self.b._h2(1.0 - u, v))

    def _evaluate(self, u, v):
        w = self.w
        la, ha1, ha2 = self.a._evaluate(u, v)
        lb, hb1, hb2 = self.b._evaluate(1.0 - u, v)
        lp = np.logaddexp(math.log(w) + la, math.log1p(-w) + lb)
        return lp, w * ha1 + (1.0 - w) * hb1, w * ha2 + (1.0 - w) * (1.0 - hb2)

    def _cdf(self, u, v):
        w = self.w
        return w * self.a._cdf(u, v) + (1.0 - w) * (v - self.b._cdf(1.0 - u, v))

    def _cond1(self, u):
        w = self.w
        fa = self.a._cond1(u)
        fb = self.b._cond1(1.0 - np.asarray(u, dtype=float))

        def f(x, idx):
            ha, da = fa(x, idx)
            hb, db = fb(x, idx)
            return w * ha + (1.0 - w) * hb, w * da + (1.0 - w) * db

        return f

    def _h1inv(self, q, u):
        # the root lies between the two component inverses
        q, u = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(u, dtype=float))
        xa = self.a._h1inv(q, u)
        xb = self.b._h1inv(q, 1.0 - u)
        return _solve_h(self._cond1(u), q, bracket=(np.minimum(xa, xb), np.maximum(xa, xb)))

    def _h2inv(self, q, v):
        q, v = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(v, dtype=float))
        xa = self.a._h2inv(q, v)
        xb = 1.0 - self.b._h2inv(1.0 - q, v)
        return _solve_h(self._cond2(v), q, bracket=(np.minimum(xa, xb), np.maximum(xa, xb)))

    def _cond2(self, v):
        w = self.w
        fa = self.a._cond2(v)
        fb = self.b._cond2(v)

        def f(x, idx):
            ha, da = fa(x, idx)
            hb, db = fb(1.0 - x, idx)
            return w * ha + (1.0 - w) * (1.0 - hb), w * da + (1.0 - w) * db

        return f

    def tail_dependence(self):
        # only component a reaches the (0,0) and (1,1) corners
        lo, up = self.a.tail_dependence()
        return self.w * lo, self.w * up


def mixture_t(w, zeta_a, nu_a, zeta_b, nu_b):
    return Mixture(w, StudentT(zeta_a, nu_a), StudentT(zeta_b, nu_b))


def mixture_cg(w, tau_a, delta_a, tau_b, delta_b):
    return Mixture(w, ConvexGumbel(tau_a, delta_a), ConvexGumbel(tau_b, delta_b))


_SIMPLE = {
    "independence": Independence,
    "gaussian": Gaussian,
    "t": StudentT,
    "gumbel": Gumbel,
    "convex_gumbel": ConvexGumbel,
}


def from_dict(d):
    """Inverse of ``PairCopula.to_dict``."""
    fam = d["family"]
    p = d.get("params", {})
    if fam == "mixture":
        return Mixture(p["w"], from_dict(p["a"]), from_dict(p["b"]))
    if fam == "rotated90":
        return Rotated90(from_dict(p["base"]))
    try:
        cls = _SIMPLE[fam]
    except KeyError:
        raise InvalidParameterError(f"unknown copula family {fam!r}") from None
    return cls(**{k: p[k] for k in cls.param_names})


# Function-style aliases over the method surface.


def density(copula, u, v):
    return copula.pdf(u, v)


def cdf(copula, u, v):
    return copula.cdf(u, v)


def h1(copula, v, u):
    return copula.h1(v, u)


def h2(copula, u, v):
    return copula.h2(u, v)


def h1_inverse(copula, q, u):
    return copula.h1inv(q, u)


def h2_inverse(copula, q, v):
    return copula.h2inv(q, v)


def spearman_rho(copula):
    return copula.spearman_rho()


def sample_pair(copula, n, seed=None):
    return copula.sample(n, seed)
