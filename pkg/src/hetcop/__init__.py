"""Copula time-series models for heteroskedastic data.

Mixture pair-copulas, stationary D-vines for Markov-p series, volatility
copula dependence metrics, MLE and adaptive MCMC estimation, and one-step
VaR forecasting with coverage backtests.
"""

from . import bicop, datagen, dvine, forecast, inference, margins, volcop
from .bicop import mixture_cg, mixture_t
from .dvine import DVineSpec, independence_vine, univariate

SCHEMA = "hetcop/1"

__all__ = [
    "bicop",
    "datagen",
    "dvine",
    "forecast",
    "inference",
    "margins",
    "volcop",
    "DVineSpec",
    "independence_vine",
    "univariate",
    "mixture_t",
    "mixture_cg",
    "SCHEMA",
]
__version__ = "0.1.0"
