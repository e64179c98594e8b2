"""Conditional (instantaneous-SNR) error probabilities over AWGN.

Exact references, the seven-exponential M-PSK approximation, the DQPSK
lower/upper bounds and their fitted convex combination. All DQPSK terms
that contain ``exp(-2g) I0(sqrt(2) g)`` are built from the scaled Bessel
function so nothing overflows at high SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DegenerateError, DomainError, FitError
from .specfun import (
    DEFAULT_TOL,
    Tolerance,
    bessel_i0_scaled,
    gauss_legendre,
    gauss_q,
    integrate_adaptive,
    marcum_q1,
)

SQRT2 = math.sqrt(2.0)


class Scheme(str, Enum):
    MPSK = "mpsk"
    GC_DQPSK = "dqpsk"


@dataclass(frozen=True)
class ModulationSpec:
    """Target modulation: ``M``-PSK with order ``M`` or Gray-coded DQPSK."""

    kind: Scheme
    order: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Scheme(self.kind))
        if self.kind is Scheme.MPSK:
            _check_order(self.order)
        elif self.order is not None:
            raise DomainError("GC-DQPSK carries no modulation order")

    @classmethod
    def parse(cls, text: str) -> "ModulationSpec":
        """Parse ``"mpsk:8"`` or ``"dqpsk"``."""
        name, _, order = text.strip().lower().partition(":")
        if name == "mpsk":
            if not order:
                raise DomainError("mpsk needs an order, e.g. mpsk:4")
            return cls(Scheme.MPSK, int(order))
        if name == "dqpsk" and not order:
            return cls(Scheme.GC_DQPSK)
        raise DomainError(f"unknown scheme {text!r}")

    def __str__(self) -> str:
        return f"mpsk:{self.order}" if self.kind is Scheme.MPSK else "dqpsk"


def _check_order(M) -> int:
    if not isinstance(M, (int, np.integer)) or M < 2 or (M & (M - 1)):
        raise DomainError(f"M must be a power of two >= 2, got {M!r}")
    return int(M)


def _check_gamma(gamma) -> np.ndarray:
    g = np.asarray(gamma, dtype=float)
    if not np.all(np.isfinite(g)) or np.any(g < 0):
        raise DomainError("SNR must be finite and >= 0")
    return g


def _out(x: np.ndarray):
    return float(x) if np.ndim(x) == 0 else x


# ---------------------------------------------------------------- M-PSK


@dataclass(frozen=True)
class MpskCoefficients:
    """Weights ``A`` and exponents ``B`` of the 7-term M-PSK approximation."""

    M: int
    rho: float
    A: tuple[float, ...]
    B: tuple[float, ...]


def mpsk_rho(M: int) -> float:
    M = _check_order(M)
    return math.log2(M) * math.sin(math.pi / M) ** 2


def mpsk_coefficients(M: int) -> MpskCoefficients:
    """Closed-form coefficient table for ``M``-PSK.

    Terms 1-4 approximate ``Q(sqrt(2 rho g))`` by four exponentials; terms
    5-7 are the three-panel trapezoidal rule for the remaining angular
    integral, so they vanish for BPSK.
    """
    M = _check_order(M)
    rho = mpsk_rho(M)
    A = (
        (7 * M - 8) / (48 * M),
        1 / 8,
        1 / 8,
        1 / 8,
        (M - 2) / (12 * M),
        (M - 2) / (6 * M),
        (M - 2) / (6 * M),
    )
    B = (
        rho,
        2 * rho,
        20 * rho / 3,
        20 * rho / 17,
        rho / math.cos((M - 2) * math.pi / (2 * M)) ** 2,
        rho / math.cos((M - 2) * math.pi / (6 * M)) ** 2,
        rho / math.cos((M - 2) * math.pi / (3 * M)) ** 2,
    )
    return MpskCoefficients(M, rho, A, B)


def mpsk_sep_exact(M: int, gamma: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Exact M-PSK SEP, ``(1/pi) int_0^{(M-1)pi/M} exp(-rho g / sin^2 t) dt``."""
    M = _check_order(M)
    g = float(_check_gamma(gamma))
    rho = mpsk_rho(M)
    upper = (M - 1) * math.pi / M
    if g == 0.0:
        return upper / math.pi

    def integrand(t):
        s = np.sin(t)
        with np.errstate(divide="ignore"):  # t = 0 gives exp(-inf) = 0
            return np.exp(-rho * g / (s * s))

    # the integrand peaks at pi/2 and, at low SNR, rises from 0 within
    # t ~ sqrt(rho g) of the origin; seed breaks at both scales
    root = math.sqrt(rho * g)
    brk = {math.pi / 2}
    c = 0.3
    while c * root < 0.5:
        brk.add(math.asin(c * root))
        c *= 4.0
    val = integrate_adaptive(integrand, 0.0, upper, tol, breakpoints=tuple(sorted(brk)))
    return val / math.pi


_GL_X, _GL_W = gauss_legendre(64)
_CHUNK = 8192


def mpsk_sep_exact_vec(M: int, gamma) -> np.ndarray:
    """Array version of the exact M-PSK SEP (about 1e-13 relative).

    Splits the SEP as ``Q(sqrt(2 rho g)) + (e^{-rho g}/pi) int_0^{tan T}
    exp(-rho g u^2)/(1+u^2) du`` with ``T = (M-2) pi / (2M)``, then applies
    64-point Gauss-Legendre to the ``u`` integral truncated where the
    Gaussian factor drops below ``e^{-81}``.
    """
    M = _check_order(M)
    g = _check_gamma(gamma)
    rho = mpsk_rho(M)
    rg = rho * np.atleast_1d(g).ravel()
    out = gauss_q(np.sqrt(2.0 * rg))
    if M > 2:
        tan_t = math.tan((M - 2) * math.pi / (2 * M))
        with np.errstate(divide="ignore"):
            upper = np.minimum(tan_t, 9.0 / np.sqrt(rg))
        half = 0.5 * upper
        for s in range(0, rg.size, _CHUNK):
            blk = slice(s, s + _CHUNK)
            u = half[blk, None] * (1.0 + _GL_X[None, :])
            f = np.exp(-rg[blk, None] * u * u) / (1.0 + u * u)
            out[blk] += np.exp(-rg[blk]) / math.pi * half[blk] * (f @ _GL_W)
    return out.reshape(np.shape(g)) if np.ndim(g) else float(out[0])


def mpsk_sep_approx(M: int, gamma):
    """Seven-exponential M-PSK SEP approximation ``sum_l A_l exp(-B_l g)``."""
    c = mpsk_coefficients(M)
    g = _check_gamma(gamma)
    out = sum(a * np.exp(-b * g) for a, b in zip(c.A, c.B))
    return _out(out)


# ---------------------------------------------------------------- DQPSK


@dataclass(frozen=True)
class DqpskConstants:
    a: float = math.sqrt(2.0 * (1.0 - math.sqrt(0.5)))
    b: float = math.sqrt(2.0 * (1.0 + math.sqrt(0.5)))
    delta: float = field(init=False)
    eta: float = field(init=False)

    def __post_init__(self) -> None:
        delta = math.sqrt(self.b / self.a)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "eta", (1.0 - delta * delta) / delta)


DQPSK = DqpskConstants()


def bessel_term(gamma):
    """``I0(sqrt(2) g) exp(-2g)``, assembled from the scaled Bessel function."""
    g = _check_gamma(gamma)
    return _out(bessel_i0_scaled(SQRT2 * g) * np.exp((SQRT2 - 2.0) * g))


def dqpsk_bep_exact(gamma: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Gray-coded DQPSK BEP ``Q1(a sqrt g, b sqrt g) - I0(sqrt(2) g) e^{-2g} / 2``."""
    g = float(_check_gamma(gamma))
    r = math.sqrt(g)
    return marcum_q1(DQPSK.a * r, DQPSK.b * r, tol) - 0.5 * bessel_term(g)


def _dqpsk_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    # phi in [0, pi], s = sin(theta) = -cos(phi); the (1+s) peak sits at phi = 0
    phi = np.linspace(0.0, math.pi, n + 1)
    w = np.full(n + 1, 1.0 / n)
    w[[0, -1]] *= 0.5
    s = -np.cos(phi)
    zeta = DQPSK.a / DQPSK.b
    kernel = (1.0 + zeta * s) / (1.0 + 2.0 * zeta * s + zeta * zeta) - 0.5
    return 1.0 + s, w * kernel


def dqpsk_bep_exact_vec(gamma) -> np.ndarray:
    """Array version of the exact DQPSK BEP via a single angular integral.

    Merging the trigonometric forms of ``Q1`` and ``I0`` gives

        H(g) = (1/2pi) int_{-pi}^{pi} k(t) exp(-g (2 + sqrt2 sin t)) dt,

    with a positive, smooth, periodic integrand, so the trapezoidal rule
    converges geometrically. The node count grows like ``sqrt(g)`` to
    resolve the peak at ``sin t = -1``. Independent of the Marcum series.
    """
    g = _check_gamma(gamma)
    flat = np.atleast_1d(g).ravel()
    out = np.zeros_like(flat)
    need = np.maximum(64, 16 * np.ceil(np.sqrt(SQRT2 * flat) * 10.0 / 16.0 + 1.0)).astype(int)
    # e^{-(2-sqrt2) g} underflows past g ~ 1270, and so does H
    live = flat < 1300.0
    for n in np.unique(need[live]):
        sel = live & (need == n)
        one_plus_s, wk = _dqpsk_nodes(int(n))
        gs = flat[sel]
        vals = np.empty_like(gs)
        for s in range(0, gs.size, _CHUNK):
            blk = gs[s : s + _CHUNK]
            expo = np.exp(-SQRT2 * blk[:, None] * one_plus_s[None, :])
            vals[s : s + _CHUNK] = np.exp(-(2.0 - SQRT2) * blk) * (expo @ wk)
        out[sel] = vals
    out = out.reshape(np.shape(g))
    return _out(out)


def k_term(gamma):
    """``K(g) = Q((b-a) sqrt g) - Q((b+a) sqrt g)``."""
    g = _check_gamma(gamma)
    r = np.sqrt(g)
    return _out(np.asarray(gauss_q((DQPSK.b - DQPSK.a) * r) - gauss_q((DQPSK.b + DQPSK.a) * r)))


def dqpsk_bep_lower(gamma):
    """Lower bound ``delta K - I0 e^{-2g} / 2`` (negative near zero SNR)."""
    return _out(DQPSK.delta * np.asarray(k_term(gamma)) - 0.5 * np.asarray(bessel_term(gamma)))


def dqpsk_bep_upper(gamma):
    """Upper bound ``K / delta + I0 e^{-2g} / 2``."""
    return _out(np.asarray(k_term(gamma)) / DQPSK.delta + 0.5 * np.asarray(bessel_term(gamma)))


def chi_exact(gamma, exact=None):
    """Exact mixing weight ``(H - L) / (U - L)``.

    ``exact`` may carry precomputed ``H`` values; by default the angular
    integral route is used.
    """
    g = _check_gamma(gamma)
    h = dqpsk_bep_exact_vec(g) if exact is None else np.asarray(exact, dtype=float)
    lo = np.asarray(dqpsk_bep_lower(g))
    hi = np.asarray(dqpsk_bep_upper(g))
    width = hi - lo
    if np.any(np.abs(width) < 1e-300):
        raise DegenerateError("U - L vanishes; chi undefined")
    return _out((h - lo) / width)


@dataclass(frozen=True)
class ChiFitTable:
    """Piecewise two-exponential fit ``C0 e^{-D0 g} + C1 e^{-D1 g}``.

    ``edges`` split ``[0, inf)`` into ``len(edges) + 1`` ranges; a value equal
    to an edge belongs to the range on its right.
    """

    edges: tuple[float, ...]
    rows: tuple[tuple[float, float, float, float], ...]

    def __post_init__(self) -> None:
        if len(self.rows) != len(self.edges) + 1:
            raise DomainError("need one coefficient row per range")
        if list(self.edges) != sorted(self.edges) or any(e <= 0 for e in self.edges):
            raise DomainError("edges must be positive and ascending")

    def row_index(self, gamma):
        return np.searchsorted(np.asarray(self.edges), np.asarray(gamma, dtype=float), side="right")


TABLE_III = ChiFitTable(
    edges=(1.0, 8.0),
    rows=(
        (0.1786, 2.903, 0.7564, 0.1307),
        (0.3798, 1.895, 0.6183, 7.93e-4),
        (0.005206, 0.2764, 0.6146, 5.593e-5),
    ),
)


def chi_row(gamma, row: tuple[float, float, float, float]):
    c0, d0, c1, d1 = row
    g = _check_gamma(gamma)
    return _out(c0 * np.exp(-d0 * g) + c1 * np.exp(-d1 * g))


def chi_fitted(gamma, table: ChiFitTable = TABLE_III, row: int | None = None):
    """Fitted mixing weight; piecewise over the table ranges unless ``row`` pins one."""
    g = _check_gamma(gamma)
    if row is not None:
        return chi_row(g, table.rows[row])
    coeffs = np.asarray(table.rows)[np.atleast_1d(table.row_index(g))]
    flat = np.atleast_1d(g)
    out = coeffs[:, 0] * np.exp(-coeffs[:, 1] * flat) + coeffs[:, 2] * np.exp(-coeffs[:, 3] * flat)
    return _out(out.reshape(np.shape(g)))


def dqpsk_bep_approx(gamma, table: ChiFitTable = TABLE_III, row: int | None = None):
    """Fitted DQPSK BEP ``chi U + (1 - chi) L``."""
    chi = np.asarray(chi_fitted(gamma, table, row))
    lo = np.asarray(dqpsk_bep_lower(gamma))
    hi = np.asarray(dqpsk_bep_upper(gamma))
    return _out(lo + chi * (hi - lo))


def marcum_q1_approx(gamma, table: ChiFitTable = TABLE_III, row: int | None = None):
    """Approximate ``Q1(a sqrt g, b sqrt g) = K (eta chi + delta) + I0 e^{-2g} chi``."""
    chi = np.asarray(chi_fitted(gamma, table, row))
    return _out(
        np.asarray(k_term(gamma)) * (DQPSK.eta * chi + DQPSK.delta)
        + np.asarray(bessel_term(gamma)) * chi
    )


@dataclass(frozen=True)
class CombinedCoefficients:
    """Expansion ``H = sum_i [eta C_i e^{-D_i g} K + F_i e^{-D_i g} I0 e^{-2g}]``.

    Entries 0 and 1 are the fitted pair; entry 2 carries the constant part
    of the bounds (``eta C_2 = delta``, ``F_2 = -1/2``, ``D_2 = 0``).
    """

    C: tuple[float, float, float]
    D: tuple[float, float, float]
    F: tuple[float, float, float]

    @classmethod
    def from_row(cls, row: tuple[float, float, float, float]) -> "CombinedCoefficients":
        c0, d0, c1, d1 = row
        d2 = DQPSK.delta**2
        return cls(C=(c0, c1, d2 / (1.0 - d2)), D=(d0, d1, 0.0), F=(c0, c1, -0.5))


def dqpsk_bep_combined(gamma, coeffs: CombinedCoefficients):
    """Evaluate the fitted BEP through its exponential-sum expansion."""
    k = np.asarray(k_term(gamma))
    bt = np.asarray(bessel_term(gamma))
    g = _check_gamma(gamma)
    out = sum(
        (DQPSK.eta * c * k + f * bt) * np.exp(-d * g)
        for c, d, f in zip(coeffs.C, coeffs.D, coeffs.F)
    )
    return _out(out)


def relative_error(approx, exact):
    """``|approx - exact| / exact`` for positive ``exact``."""
    e = np.asarray(exact, dtype=float)
    if np.any(e <= 0):
        raise DomainError("relative_error needs exact > 0")
    return _out(np.abs(np.asarray(approx, dtype=float) - e) / e)


# ---------------------------------------------------------------- refitting


@dataclass(frozen=True)
class ChiFit:
    table: ChiFitTable
    rms: tuple[float, ...]


def _fit_range(g: np.ndarray, y: np.ndarray) -> tuple[tuple[float, float, float, float], float]:
    from scipy.optimize import least_squares

    def design(d0, d1):
        return np.column_stack([np.exp(-d0 * g), np.exp(-d1 * g)])

    def resid(p):
        c0, ld0, c1, ld1 = p
        with np.errstate(over="ignore", invalid="ignore"):
            return c0 * np.exp(-np.exp(ld0) * g) + c1 * np.exp(-np.exp(ld1) * g) - y

    best = None
    starts = np.log(np.logspace(-5, 1, 10))
    for i, ld0 in enumerate(starts):
        for ld1 in starts[:i]:
            coef, *_ = np.linalg.lstsq(design(math.exp(ld0), math.exp(ld1)), y, rcond=None)
            try:
                sol = least_squares(resid, [coef[0], ld0, coef[1], ld1], method="lm",
                                    xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=4000)
            except ValueError:
                continue
            if not np.all(np.isfinite(sol.x)):
                continue
            cost = float(np.sqrt(np.mean(sol.fun**2)))
            if best is None or cost < best[1]:
                best = (sol.x, cost)
    if best is None:
        raise FitError("no start produced a finite fit")
    c0, ld0, c1, ld1 = best[0]
    d0, d1 = math.exp(ld0), math.exp(ld1)
    if d1 > d0:
        c0, d0, c1, d1 = c1, d1, c0, d0
    if abs(d0 - d1) <= 1e-6 * max(d0, d1):
        c0, c1, d1 = c0 + c1, 0.0, d0
    elif abs(c1) < 1e-9 * max(abs(c0), 1e-300):
        c1 = 0.0
    elif abs(c0) < 1e-9 * abs(c1):
        c0, d0, c1 = c1, d1, 0.0
    return (float(c0), float(d0), float(c1), float(d1)), best[1]


def refit_chi(gamma_grid, range_edges=(1.0, 8.0), target=None) -> ChiFit:
    """Least-squares refit of the two-exponential mixing weight per SNR range.

    Parameters
    ----------
    gamma_grid
        SNR samples; each range needs at least 20 of them.
    range_edges
        Interior range boundaries (same convention as :class:`ChiFitTable`).
    target
        Values to fit; defaults to :func:`chi_exact` on the grid.

    Returns
    -------
    ChiFit
        The fitted table and the residual RMS of each range.
    """
    g = np.sort(_check_gamma(gamma_grid).ravel())
    y = np.asarray(chi_exact(g) if target is None else target, dtype=float).ravel()
    edges = tuple(float(e) for e in range_edges)
    idx = np.searchsorted(np.asarray(edges), g, side="right")
    rows, rms = [], []
    for r in range(len(edges) + 1):
        sel = idx == r
        if sel.sum() < 20:
            raise FitError(f"range {r} has {int(sel.sum())} grid points, need >= 20")
        row, err = _fit_range(g[sel], y[sel])
        rows.append(row)
        rms.append(err)
    return ChiFit(ChiFitTable(edges, tuple(rows)), tuple(rms))


def fit_rms(gamma_grid, table: ChiFitTable, target=None) -> tuple[float, ...]:
    """Per-range residual RMS of ``table`` against the exact mixing weight."""
    g = np.sort(_check_gamma(gamma_grid).ravel())
    y = np.asarray(chi_exact(g) if target is None else target, dtype=float).ravel()
    idx = np.searchsorted(np.asarray(table.edges), g, side="right")
    out = []
    for r, row in enumerate(table.rows):
        sel = idx == r
        out.append(float(np.sqrt(np.mean((np.asarray(chi_row(g[sel], row)) - y[sel]) ** 2))))
    return tuple(out)
