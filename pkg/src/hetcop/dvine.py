"""Stationary D-vine copulas for univariate Markov-p and multivariate series.

Observations are stacked in time-then-variable order, z_i with
i = l1 + m (t - 1), which turns an m-variate Markov-p series into a single
D-vine on mT elements. A pair (j, i), j < i, separated by r = i - j stacked
positions couples u_{j|i-1} (first argument, lagged side) with u_{i|j+1}
(second argument, current side) through the pair-copula c^{(k)}_{l2,l1},
k = t - s. Pairs with k > p are conditionally independent and only
propagate their arguments.

The working set of conditional arguments is kept in an (N, R, 2) array,
N = mT and R = m(p + 1) - 1, with

* grid[i, r - 1, 0] = u_{i | i-r}   (forward, the element conditioned on r
  predecessors)
* grid[i, r - 1, 1] = u_{i-r | i}   (backward)

so the univariate layout is the special case m = 1, R = p. Entries without
enough history (i <= r) are NaN.
"""

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bicop
from .bicop import EPS, Independence, NumericalError, PairCopula


class VineSpecError(ValueError):
    pass


class DVineSpec:
    """m-dimensional Markov-p D-vine with one pair-copula per (k, l2, l1) cell.

    ``pairs`` maps (k, l2, l1) with 1-based variable labels to a PairCopula.
    For m = 1 a plain list [c_2, ..., c_{p+1}] is also accepted.
    """

    def __init__(self, m, p, pairs):
        if m < 1 or p < 1:
            raise VineSpecError("need m >= 1 and p >= 1")
        self.m = int(m)
        self.p = int(p)
        if isinstance(pairs, (list, tuple)):
            if self.m != 1:
                raise VineSpecError("list form of pairs is only for m = 1")
            pairs = {(k + 1, 1, 1): c for k, c in enumerate(pairs)}
        self.pairs = dict(pairs)
        expected = set(self.cells(self.m, self.p))
        if set(self.pairs) != expected:
            missing = sorted(expected - set(self.pairs))
            extra = sorted(set(self.pairs) - expected)
            raise VineSpecError(f"pair cells mismatch; missing {missing}, unexpected {extra}")
        for key, c in self.pairs.items():
            if not isinstance(c, PairCopula):
                raise VineSpecError(f"cell {key} is not a PairCopula")
        self._lookup = {}
        for l1 in range(1, self.m + 1):
            for r in range(1, self.R + 1):
                self._lookup[(l1, r)] = self._resolve(l1, r)

    @staticmethod
    def cells(m, p):
        """All (k, l2, l1) cells in a canonical order."""
        out = [(0, l2, l1) for l1 in range(1, m + 1) for l2 in range(1, l1)]
        out += [(k, l2, l1) for k in range(1, p + 1) for l2 in range(1, m + 1) for l1 in range(1, m + 1)]
        return out

    @property
    def R(self):
        return self.m * (self.p + 1) - 1

    @property
    def n_pairs(self):
        return len(self.pairs)

    def _resolve(self, l1, r):
        # element i at slot l1 of its time slice; j = i - r
        j_off = l1 - 1 - r
        s_rel = math.floor(j_off / self.m)
        k = -s_rel
        l2 = j_off - self.m * s_rel + 1
        if k > self.p:
            return k, l2, None
        return k, l2, self.pairs[(k, l2, l1)]

    def pair_at(self, l1, r):
        """(k, l2, copula or None) for the pair ending at slot l1, r positions back."""
        return self._lookup[(l1, r)]

    @property
    def lag_pairs(self):
        if self.m != 1:
            raise VineSpecError("lag_pairs is only defined for m = 1")
        return [self.pairs[(k, 1, 1)] for k in range(1, self.p + 1)]

    def to_dict(self):
        return {
            "m": self.m,
            "p": self.p,
            "pairs": [
                {"k": k, "l1": l1, "l2": l2, **self.pairs[(k, l2, l1)].to_dict()}
                for (k, l2, l1) in self.cells(self.m, self.p)
            ],
        }

    @classmethod
    def from_dict(cls, d):
        pairs = {}
        for e in d["pairs"]:
            pairs[(int(e["k"]), int(e["l2"]), int(e["l1"]))] = bicop.from_dict(e)
        return cls(d["m"], d["p"], pairs)

    def with_pairs(self, pairs):
        return DVineSpec(self.m, self.p, pairs)

    def __repr__(self):
        return f"DVineSpec(m={self.m}, p={self.p}, n_pairs={self.n_pairs})"


def independence_vine(m=1, p=1):
    return DVineSpec(m, p, {c: Independence() for c in DVineSpec.cells(m, p)})


def univariate(pairs):
    pairs = list(pairs)
    return DVineSpec(1, len(pairs), pairs)


# ---------------------------------------------------------------------------
# likelihood


def _stack(u, m):
    u = np.asarray(u, dtype=float)
    if m == 1 and u.ndim == 1:
        z = u
    else:
        if u.ndim != 2 or u.shape[1] != m:
            raise VineSpecError(f"expected a (T, {m}) array")
        z = u.reshape(-1)
    if z.size < 2:
        raise VineSpecError("need at least two observations")
    if np.any(~np.isfinite(z)) or np.any(z < 0) or np.any(z > 1):
        raise bicop.DomainError("copula data must lie in [0, 1]")
    return np.clip(z, EPS, 1.0 - EPS)


def _chunks(n, threads):
    if threads <= 1 or n < 2048:
        return [slice(0, n)]
    step = -(-n // threads)
    return [slice(a, min(a + step, n)) for a in range(0, n, step)]


def _run_chunked(fn, n, threads, pool):
    parts = _chunks(n, threads)
    if pool is None or len(parts) == 1:
        return [fn(sl) for sl in parts]
    return list(pool.map(fn, parts))


def _loglik_stacked(spec, z, threads=1, keep_grid=True):
    m, R = spec.m, spec.R
    N = z.size
    grid = np.full((N, R + 1, 2), np.nan)
    grid[:, 0, 0] = z
    grid[:, 0, 1] = z
    total = 0.0
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        for r in range(1, R + 1):
            last = r == R
            for l1 in range(1, m + 1):
                # 0-based stacked positions with slot l1 and at least r predecessors
                first = l1 - 1
                while first < r:
                    first += m
                if first >= N:
                    continue
                idx = np.arange(first, N, m)
                a = grid[idx - 1, r - 1, 1]  # u_{j | i-1}
                b = grid[idx, r - 1, 0]  # u_{i | j+1}
                k, l2, cop = spec.pair_at(l1, r)
                if cop is None:
                    grid[idx, r, 0] = b
                    grid[idx, r, 1] = a
                    continue
                if last and not keep_grid:
                    parts = _run_chunked(lambda sl: cop._logpdf(a[sl], b[sl]), idx.size, threads, pool)
                    lp = np.concatenate(parts)
                else:
                    def work(sl, cop=cop, a=a, b=b):
                        return cop._evaluate(a[sl], b[sl])

                    parts = _run_chunked(work, idx.size, threads, pool)
                    lp = np.concatenate([q[0] for q in parts])
                    grid[idx, r, 0] = np.clip(np.concatenate([q[1] for q in parts]), EPS, 1 - EPS)
                    grid[idx, r, 1] = np.clip(np.concatenate([q[2] for q in parts]), EPS, 1 - EPS)
                bad = ~np.isfinite(lp)
                if bad.any():
                    pos = int(idx[np.argmax(bad)])
                    t, l = divmod(pos, m)
                    raise NumericalError(
                        f"non-finite log-density at t={t + 1}, lag k={k}, pair ({l2},{l + 1})",
                        residual=float(lp[np.argmax(bad)]),
                        where=(t + 1, k, l2, l + 1),
                    )
                total += float(np.sum(lp))
    finally:
        if pool is not None:
            pool.shutdown()
    return total, grid[:, 1:, :]


def loglik_uni(spec, u, threads=1, keep_grid=True):
    """Log D-vine density of a univariate copula series; returns (loglik, grid)."""
    if spec.m != 1:
        raise VineSpecError("loglik_uni needs m = 1")
    return _loglik_stacked(spec, _stack(u, 1), threads, keep_grid)


def loglik_multi(spec, u, threads=1, keep_grid=True):
    """Log density of a (T, m) copula-data matrix; returns (loglik, grid)."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    return _loglik_stacked(spec, _stack(u, spec.m), threads, keep_grid)


def loglik(spec, u, threads=1):
    """Log-likelihood only; the final tree level skips its h-functions."""
    u = np.asarray(u, dtype=float)
    if spec.m > 1 or u.ndim == 2:
        if u.ndim == 1:
            u = u[:, None]
        z = _stack(u, spec.m)
    else:
        z = _stack(u, 1)
    return _loglik_stacked(spec, z, threads, keep_grid=False)[0]


# ---------------------------------------------------------------------------
# sequential state for simulation and conditional distributions


class _State:
    """Backward arguments u_{i-1-r | i-1}, r = 0..R-1, for a batch of paths.

    ``count`` is the number of stacked elements already absorbed.
    """

    def __init__(self, spec, n):
        self.spec = spec
        self.B = np.full((n, spec.R), np.nan)
        self.count = 0

    def _slot(self):
        return self.count % self.spec.m + 1

    def _avail(self):
        return min(self.spec.R, self.count)

    def forward(self, x):
        """F[r] = u_{i | i-r} for r = 0..avail given the new element x."""
        avail = self._avail()
        l1 = self._slot()
        F = [np.asarray(x, dtype=float)]
        for r in range(1, avail + 1):
            _, _, cop = self.spec.pair_at(l1, r)
            prev = F[-1]
            F.append(prev if cop is None else np.clip(cop._h1(prev, self.B[:, r - 1]), EPS, 1 - EPS))
        return F

    def inverse(self, w):
        """Element x whose top conditional u_{i | i-avail} equals w."""
        avail = self._avail()
        l1 = self._slot()
        F = [None] * (avail + 1)
        F[avail] = np.clip(np.asarray(w, dtype=float), EPS, 1 - EPS)
        for r in range(avail, 0, -1):
            _, _, cop = self.spec.pair_at(l1, r)
            F[r - 1] = F[r] if cop is None else np.clip(cop._h1inv(F[r], self.B[:, r - 1]), EPS, 1 - EPS)
        return F

    def absorb(self, F):
        """Advance the backward arguments once the new element's F chain is known."""
        avail = len(F) - 1
        l1 = self._slot()
        newB = np.full_like(self.B, np.nan)
        newB[:, 0] = F[0]
        for r in range(1, min(avail, self.spec.R - 1) + 1):
            _, _, cop = self.spec.pair_at(l1, r)
            prevb = self.B[:, r - 1]
            newB[:, r] = prevb if cop is None else np.clip(cop._h2(prevb, F[r - 1]), EPS, 1 - EPS)
        self.B = newB
        self.count += 1


def _state_from_history(spec, history):
    """Absorb a batch of histories, shape (n, L) in stacked order."""
    history = np.clip(np.asarray(history, dtype=float), EPS, 1 - EPS)
    st = _State(spec, history.shape[0])
    for c in range(history.shape[1]):
        st.absorb(st.forward(history[:, c]))
    return st


def _check_history_len(spec, L, m_aligned=True):
    if L % spec.m:
        raise VineSpecError("history must contain whole time slices")


def simulate(spec, T, seed=None, n_paths=None, rng=None):
    """Sequential conditional inversion.

    Returns shape (T,) / (T, m) for a single path or (n_paths, T[, m]).
    """
    if T < 1:
        raise VineSpecError("T must be >= 1")
    rng = rng if rng is not None else np.random.default_rng(seed)
    n = 1 if n_paths is None else int(n_paths)
    m = spec.m
    st = _State(spec, n)
    out = np.empty((n, T * m))
    for c in range(T * m):
        w = rng.uniform(size=n)
        F = st.inverse(w)
        out[:, c] = F[0]
        st.absorb(F)
    out = out.reshape(n, T, m)
    if m == 1:
        out = out[:, :, 0]
    return out[0] if n_paths is None else out


def simulate_next(spec, history, n, seed=None, rng=None):
    """n draws of the next time slice given one history of p slices, shape (n, m)."""
    rng = rng if rng is not None else np.random.default_rng(seed)
    h = np.asarray(history, dtype=float).reshape(-1)
    _check_history_len(spec, h.size)
    st = _state_from_history(spec, np.broadcast_to(h, (n, h.size)))
    out = np.empty((n, spec.m))
    for l in range(spec.m):
        F = st.inverse(rng.uniform(size=n))
        out[:, l] = F[0]
        st.absorb(F)
    return out


def _uni_batch(spec, history, u):
    if spec.m != 1:
        raise VineSpecError("conditional distributions are univariate (m = 1)")
    H = np.atleast_2d(np.asarray(history, dtype=float))
    if np.ndim(history) == 1:
        H = H.reshape(1, -1)
    if H.shape[1] > spec.p:
        H = H[:, -spec.p:]
    u = np.asarray(u, dtype=float)
    n = max(H.shape[0], u.size)
    H = np.broadcast_to(H, (n, H.shape[1]))
    st = _state_from_history(spec, H)
    return st, np.broadcast_to(u.reshape(-1) if u.ndim else u, (n,))


def conditional_cdf(spec, history, u):
    """F(u_t = u | last min(t-1, p) values), vectorized over histories (n, L)."""
    scalar = np.ndim(u) == 0 and np.ndim(history) <= 1
    st, uu = _uni_batch(spec, history, u)
    out = st.forward(np.clip(uu, EPS, 1 - EPS))[-1]
    return float(out[0]) if scalar else out


def conditional_quantile(spec, history, q):
    """Inverse of conditional_cdf in u, by nested h1-inverses."""
    scalar = np.ndim(q) == 0 and np.ndim(history) <= 1
    st, qq = _uni_batch(spec, history, q)
    out = st.inverse(qq)[0]
    return float(out[0]) if scalar else out


def perturb_params(spec, fn):
    """New spec with fn applied to each pair-copula."""
    return spec.with_pairs({k: fn(c) for k, c in spec.pairs.items()})
