"""Seeded simulators for ARCH(q), GARCH(1,1), SV(1) and copula-model series."""

import math

import numpy as np
from numba import njit

from . import dvine

BURN_IN = 1000


class DgpParameterError(ValueError):
    pass


@njit(cache=True)
def _arch(eps, alpha0, alphas):
    q = alphas.size
    n = eps.size
    y = np.zeros(n)
    sig2 = np.empty(n)
    uncond = alpha0 / (1.0 - alphas.sum())
    for t in range(n):
        s = alpha0
        for j in range(q):
            if t - 1 - j >= 0:
                s += alphas[j] * y[t - 1 - j] ** 2
            else:
                s += alphas[j] * uncond
        sig2[t] = s
        y[t] = math.sqrt(s) * eps[t]
    return y, sig2


@njit(cache=True)
def _garch(eps, alpha0, alpha1, beta1):
    n = eps.size
    y = np.empty(n)
    sig2 = np.empty(n)
    s = alpha0 / (1.0 - alpha1 - beta1)
    prev_y2 = s
    for t in range(n):
        s = alpha0 + alpha1 * prev_y2 + beta1 * s
        sig2[t] = s
        y[t] = math.sqrt(s) * eps[t]
        prev_y2 = y[t] ** 2
    return y, sig2


@njit(cache=True)
def _sv(eps, eta, h_bar, phi1):
    n = eps.size
    y = np.empty(n)
    h = np.empty(n)
    hv = h_bar
    for t in range(n):
        hv = h_bar + phi1 * (hv - h_bar) + eta[t]
        h[t] = hv
        y[t] = math.exp(0.5 * hv) * eps[t]
    return y, h


def validate_arch(alpha0, alphas):
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    if not alpha0 > 0:
        raise DgpParameterError("alpha0 must be positive")
    if np.any(alphas < 0) or alphas.sum() >= 1:
        raise DgpParameterError("ARCH coefficients must be non-negative with sum < 1")
    return alphas


def simulate_arch(alpha0, alphas, T, seed=None, burn_in=BURN_IN, return_variance=False):
    """y_t = sigma_t eps_t, sigma_t^2 = alpha0 + sum_j alpha_j y_{t-j}^2."""
    alphas = validate_arch(alpha0, alphas)
    if T < 1:
        raise DgpParameterError("T must be >= 1")
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal(T + burn_in)
    y, s2 = _arch(eps, float(alpha0), alphas)
    if return_variance:
        return y[burn_in:], s2[burn_in:]
    return y[burn_in:]


def simulate_garch(alpha0, alpha1, beta1, T, seed=None, burn_in=BURN_IN, return_variance=False):
    if not (alpha0 > 0 and alpha1 >= 0 and beta1 >= 0 and alpha1 + beta1 < 1):
        raise DgpParameterError("GARCH(1,1) needs alpha0 > 0, alpha1, beta1 >= 0, alpha1 + beta1 < 1")
    if T < 1:
        raise DgpParameterError("T must be >= 1")
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal(T + burn_in)
    y, s2 = _garch(eps, float(alpha0), float(alpha1), float(beta1))
    if return_variance:
        return y[burn_in:], s2[burn_in:]
    return y[burn_in:]


def simulate_sv(h_bar, phi1, sigma2, T, seed=None, burn_in=BURN_IN, return_logvar=False):
    """y_t = exp(h_t / 2) eps_t, (h_t - h_bar) = phi1 (h_{t-1} - h_bar) + eta_t."""
    if not (abs(phi1) < 1 and sigma2 > 0):
        raise DgpParameterError("SV(1) needs |phi1| < 1 and sigma2 > 0")
    if T < 1:
        raise DgpParameterError("T must be >= 1")
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal(T + burn_in)
    eta = math.sqrt(sigma2) * rng.standard_normal(T + burn_in)
    y, h = _sv(eps, eta, float(h_bar), float(phi1))
    if return_logvar:
        return y[burn_in:], h[burn_in:]
    return y[burn_in:]


def simulate_copula_model(spec, margins, T, seed=None, return_u=False):
    """u from the D-vine, then y = F^{-1}(u) per series."""
    u = dvine.simulate(spec, T, seed=seed)
    if spec.m == 1:
        ms = margins[0] if isinstance(margins, (list, tuple)) else margins
        y = ms.ppf(u)
    else:
        ms = margins if isinstance(margins, (list, tuple)) else [margins] * spec.m
        y = np.column_stack([ms[l].ppf(u[:, l]) for l in range(spec.m)])
    return (y, u) if return_u else y


def arch_var_quantile(sig2, alpha):
    """Oracle one-step VaR of a Gaussian-innovation ARCH/GARCH: sigma_t Phi^{-1}(alpha)."""
    from scipy.special import ndtri

    return np.sqrt(sig2) * ndtri(alpha)
