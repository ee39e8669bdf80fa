"""Quadrature rules shared by the copula and volatility code."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=16)
def gauss_legendre(n):
    """Nodes and weights of the n-point Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=4)
def tanh_sinh(step=1.0 / 12.0, tmax=3.6):
    """Double-exponential rule on [0, 1], nodes clustered at both ends.

    Nodes are returned as (x, 1 - x, w) so callers can use the complement
    without cancellation near the right endpoint.
    """
    t = np.arange(-tmax, tmax + 0.5 * step, step)
    s = 0.5 * np.pi * np.sinh(t)
    e = np.exp(-2.0 * np.abs(s))
    # x = (1 + tanh s)/2 written so that neither end cancels
    left = np.where(s < 0, e / (1.0 + e), 1.0 / (1.0 + e))
    right = np.where(s < 0, 1.0 / (1.0 + e), e / (1.0 + e))
    w = step * 0.5 * np.pi * np.cosh(t) / np.cosh(s) ** 2 * 0.5
    keep = (left > 0) & (right > 0)
    out = left[keep], right[keep], w[keep]
    for a in out:
        a.setflags(write=False)
    return out
