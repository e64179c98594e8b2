"""Confluent (1F1), Gauss (2F1) and binomial (1F0) hypergeometric functions."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..errors import ConvergenceError, DomainError
from .gamma import gamma_sign
from .tolerance import DEFAULT_TOL, Tolerance


def _is_nonpositive_int(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


_BLOCK0, _BLOCK_MAX = 32, 8192


def _sum_series(ratio: Callable, tol: Tolerance, what: str) -> float:
    """Sum ``1 + t1 + t2 + ...`` with ``t_{k+1} = t_k * ratio(k)``.

    Stops after three consecutive terms whose geometric tail estimate
    ``|t| r / (1 - r)``, with ``r`` the next term ratio, is within tolerance.
    Requiring ``r < 1`` means a tiny early term cannot fake convergence.
    ``ratio`` must accept integer arrays; terms are generated in blocks and
    the loop falls back to one term at a time where a block over/underflows.
    """
    term = 1.0
    total = 1.0
    quiet = 0
    k0 = 0
    block = _BLOCK0
    while k0 < tol.max_iter:
        n = min(block, tol.max_iter - k0)
        block = min(2 * block, _BLOCK_MAX)
        ks = np.arange(k0, k0 + n + 1, dtype=float)
        with np.errstate(all="ignore"):
            r = ratio(ks)
            terms = term * np.cumprod(r[:-1])
        if not np.all(np.isfinite(terms)) or np.any(terms[r[:-1] != 0] == 0):
            return _sum_scalar(ratio, tol, what, term, total, quiet, k0)
        totals = total + np.cumsum(terms)
        if not np.all(np.isfinite(totals)):
            raise ConvergenceError(f"{what}: series overflowed", estimate=float(totals[-1]))
        rn = np.abs(r[1:])
        with np.errstate(all="ignore"):
            ok = (rn < 1.0) & (
                np.abs(terms) * rn / (1.0 - rn) <= np.maximum(tol.abs, tol.rel * np.abs(totals))
            )
        # three quiet terms in a row, counting the run carried in from the last block
        okp = np.concatenate([[quiet >= 2, quiet >= 1], ok])
        stop = (okp[2:] & okp[1:-1] & okp[:-2]) | (terms == 0.0)
        if stop.any():
            return float(totals[int(np.argmax(stop))])
        bad = np.flatnonzero(~ok)
        quiet = quiet + n if bad.size == 0 else n - 1 - int(bad[-1])
        term, total = float(terms[-1]), float(totals[-1])
        k0 += n
    raise ConvergenceError(
        f"{what}: no convergence in {tol.max_iter} terms", estimate=total, error=abs(term)
    )


def _sum_scalar(ratio, tol, what, term, total, quiet, k0) -> float:
    for k in range(k0, tol.max_iter):
        term *= ratio(k)
        total += term
        if term == 0.0:
            return total
        r = abs(ratio(k + 1))
        if r < 1.0 and abs(term) * r / (1.0 - r) <= tol.target(total):
            quiet += 1
            if quiet == 3:
                return total
        else:
            quiet = 0
        if not math.isfinite(total):
            raise ConvergenceError(f"{what}: series overflowed", estimate=total)
    raise ConvergenceError(
        f"{what}: no convergence in {tol.max_iter} terms", estimate=total, error=abs(term)
    )


def kummer_1f1(aa: float, bb: float, z: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Confluent hypergeometric function ``1F1(aa; bb; z)``.

    Negative ``z`` goes through Kummer's transformation
    ``1F1(a; b; z) = e^z 1F1(b - a; b; -z)`` so the summed series has no
    alternating cancellation. Large positive ``z`` is summed in log space.
    """
    if _is_nonpositive_int(bb):
        raise DomainError(f"1F1 undefined for b = {bb}")
    if not math.isfinite(z):
        raise DomainError("1F1 requires finite z")
    if z == 0.0 or aa == 0.0:
        return 1.0
    if z < 0 and not _is_nonpositive_int(aa):
        return math.exp(z) * kummer_1f1(bb - aa, bb, -z, tol)
    if z > 500.0 and aa > 0 and bb > 0:
        lg = float(log_kummer_1f1(aa, bb, z))
        return math.exp(lg) if lg < 709.78 else math.inf
    return _sum_series(lambda k: (aa + k) * z / ((bb + k) * (k + 1)), tol, "kummer_1f1")


def log_kummer_1f1(aa: float, bb: float, z, max_terms: int = 200_000):
    """``log 1F1(aa; bb; z)`` for ``aa, bb > 0`` and ``z >= 0`` (array-valued).

    Every term is positive, so the series is accumulated as a streaming
    log-sum-exp; nothing overflows even when the sum exceeds 1e308.
    """
    if aa <= 0 or bb <= 0:
        raise DomainError("log_kummer_1f1 requires aa > 0 and bb > 0")
    zarr = np.asarray(z, dtype=float)
    if np.any(zarr < 0) or not np.all(np.isfinite(zarr)):
        raise DomainError("log_kummer_1f1 requires finite z >= 0")
    scalar = zarr.ndim == 0
    zz = np.atleast_1d(zarr)
    out = np.zeros_like(zz)
    # large z: the exponentially small companion term is below double precision
    asym = zz >= max(200.0, 4.0 * (abs(aa) + abs(bb)) ** 2)
    if np.any(asym):
        out[asym] = _log_kummer_asymptotic(aa, bb, zz[asym])
    live = (zz > 0) & ~asym
    if np.any(live):
        zl = zz[live]
        logz = np.log(zl)
        lt = np.zeros_like(zl)
        peak = np.zeros_like(zl)
        acc = np.ones_like(zl)
        cutoff = math.log(1e-18)
        for k in range(max_terms):
            step = math.log((aa + k) / ((bb + k) * (k + 1)))
            lt = lt + step + logz
            new_peak = np.maximum(peak, lt)
            acc = acc * np.exp(peak - new_peak) + np.exp(lt - new_peak)
            peak = new_peak
            # remaining terms decay geometrically once the ratio drops below 1/2
            ratio_next = (aa + k + 1) * zl / ((bb + k + 1) * (k + 2))
            if np.all((lt - peak < cutoff) & (ratio_next < 0.5)):
                break
        else:
            raise ConvergenceError("log_kummer_1f1: no convergence")
        out[live] = peak + np.log(acc)
    return float(out[0]) if scalar else out


def _log_kummer_asymptotic(aa: float, bb: float, z: np.ndarray) -> np.ndarray:
    """``z + (aa-bb) log z + log Gamma(bb)/Gamma(aa) + log sum_k (bb-aa)_k (1-aa)_k / (k! z^k)``."""
    term = np.ones_like(z)
    acc = np.ones_like(z)
    for k in range(200):
        nxt = term * (bb - aa + k) * (1.0 - aa + k) / ((k + 1) * z)
        if np.all(np.abs(nxt) <= 1e-17 * np.abs(acc)):
            break
        if k > 0 and np.any(np.abs(nxt) > np.abs(term)):
            raise ConvergenceError("log_kummer_1f1: asymptotic series diverged")
        term = nxt
        acc = acc + term
    return z + (aa - bb) * np.log(z) + math.lgamma(bb) - math.lgamma(aa) + np.log(acc)


def _gauss_series(aa: float, bb: float, cc: float, z: float, tol: Tolerance) -> float:
    return _sum_series(lambda k: (aa + k) * (bb + k) * z / ((cc + k) * (k + 1)), tol, "gauss_2f1")


def _gamma_ratio(num: tuple[float, ...], den: tuple[float, ...]) -> float:
    """``prod Gamma(num) / prod Gamma(den)``; zero if a denominator sits on a pole."""
    if any(_is_nonpositive_int(x) for x in den):
        return 0.0
    sign = 1.0
    lg = 0.0
    for x in num:
        sign *= gamma_sign(x)
        lg += math.lgamma(x)
    for x in den:
        sign *= gamma_sign(x)
        lg -= math.lgamma(x)
    return sign * math.exp(lg)


def gauss_2f1(aa: float, bb: float, cc: float, z: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Gauss hypergeometric function ``2F1(aa, bb; cc; z)`` for ``0 <= z < 1``.

    For ``z > 0.5`` the ``z -> 1 - z`` connection formula is tried first; if
    ``cc - aa - bb`` is an integer, or the two connection terms cancel badly
    (large ``aa``/``bb`` near ``z = 1``), the direct series is used instead.
    """
    if _is_nonpositive_int(cc):
        raise DomainError(f"2F1 undefined for c = {cc}")
    if not (0.0 <= z < 1.0):
        raise DomainError(f"gauss_2f1 requires 0 <= z < 1, got {z!r}")
    if z == 0.0 or aa == 0.0 or bb == 0.0:
        return 1.0
    s = cc - aa - bb
    if z > 0.5 and abs(s - round(s)) > 1e-9:
        w = 1.0 - z
        c1 = _gamma_ratio((cc, s), (cc - aa, cc - bb))
        c2 = _gamma_ratio((cc, -s), (aa, bb))
        t1 = c1 * _gauss_series(aa, bb, 1.0 - s, w, tol) if c1 else 0.0
        t2 = c2 * w**s * _gauss_series(cc - aa, cc - bb, 1.0 + s, w, tol) if c2 else 0.0
        out = t1 + t2
        if abs(t1) + abs(t2) <= 10.0 * abs(out):
            return out
    # terms decay like z^k, so the budget has to grow as z -> 1
    need = int(40.0 / -math.log(z)) + 2 * int(abs(aa) + abs(bb))
    if need > tol.max_iter:
        tol = Tolerance(tol.rel, tol.abs, need)
    return _gauss_series(aa, bb, cc, z, tol)


def hyp_1f0(aa: float, z: float) -> float:
    """``1F0(aa; ; z) = (1 - z)^(-aa)`` for ``0 <= z < 1``."""
    if not (0.0 <= z < 1.0):
        raise DomainError(f"hyp_1f0 requires 0 <= z < 1, got {z!r}")
    return (1.0 - z) ** (-aa)
