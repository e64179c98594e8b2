"""Gamma-function helpers: log-gamma, Pochhammer symbols, reciprocal gamma."""

from __future__ import annotations

import math

from ..errors import DomainError


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"ln_gamma requires finite x > 0, got {x!r}")
    return math.lgamma(x)


def log_pochhammer(x: float, k: int) -> float:
    """``log((x)_k)`` for ``x > 0``."""
    if k < 0 or int(k) != k:
        raise DomainError("k must be a non-negative integer")
    if k == 0:
        return 0.0
    if x <= 0:
        raise DomainError("log_pochhammer requires x > 0")
    return math.lgamma(x + k) - math.lgamma(x)


def pochhammer(x: float, k: int) -> float:
    """Rising factorial ``(x)_k = x (x+1) ... (x+k-1)``.

    Small ``k`` uses the direct product, which also covers ``x <= 0``;
    for positive ``x`` and large ``k`` the value is assembled from
    log-gamma differences and overflows to ``inf`` only when the result
    itself is not representable.
    """
    if k < 0 or int(k) != k:
        raise DomainError("k must be a non-negative integer")
    k = int(k)
    if x > 0 and k > 30:
        lg = log_pochhammer(x, k)
        return math.exp(lg) if lg < 709.78 else math.inf
    out = 1.0
    for j in range(k):
        out *= x + j
    return out


def rgamma(x: float) -> float:
    """Reciprocal gamma ``1/Gamma(x)``, zero at the poles."""
    if x <= 0 and x == math.floor(x):
        return 0.0
    if x > 170:
        return math.exp(-math.lgamma(x))
    return 1.0 / math.gamma(x)


def gamma_sign(x: float) -> float:
    """Sign of ``Gamma(x)`` for non-pole ``x``."""
    if x > 0:
        return 1.0
    return -1.0 if math.floor(x) % 2 else 1.0
