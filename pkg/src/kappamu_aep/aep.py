"""Error probabilities averaged over kappa-mu shadowed fading.

Closed-form series for M-PSK and Gray-coded DQPSK, their high-SNR
asymptotes, the truncation bound of the DQPSK series, diversity-order
estimates, and two independent references: adaptive quadrature of
``pdf * H`` and semi-analytic Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from . import awgn
from .awgn import DQPSK, TABLE_III, CombinedCoefficients, ModulationSpec, Scheme
from .errors import ConvergenceError, DomainError
from .fading import (
    KappaMuShadowedParams,
    McControl,
    Sampler,
    derived_constants,
    integrate_pdf,
    sample,
)
from .specfun import Tolerance, gauss_2f1, log_pochhammer

ORACLE_TOL = Tolerance(rel=1e-10, abs=1e-300, max_iter=20_000)
_LOG_2SQRTPI = math.log(2.0 * math.sqrt(math.pi))


class Which(str, Enum):
    """Conditional error probability fed to an oracle."""

    EXACT_EP = "exact"
    APPROX_EP = "approx"


@dataclass(frozen=True)
class SeriesControl:
    """Series truncation: ``max_terms`` terms (``k = 0..L-1``) or ``rel_tol``, whichever first.

    With ``require_convergence`` a series that is still moving at ``max_terms``
    raises :class:`ConvergenceError`; otherwise the partial sum is returned
    with ``converged=False``.
    """

    max_terms: int = 1000
    rel_tol: float = 1e-14
    require_convergence: bool = True

    def __post_init__(self) -> None:
        if int(self.max_terms) < 1:
            raise DomainError("max_terms must be >= 1")
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be > 0")


@dataclass(frozen=True)
class AepResult:
    value: float
    log_value: float
    terms_used: int
    truncation_bound: float
    converged: bool
    chi_row: int | None = None


# ---------------------------------------------------------------- M-PSK


def _logsumexp_signed(logs: np.ndarray, signs: np.ndarray) -> float:
    peak = float(np.max(logs))
    total = float(np.sum(signs * np.exp(logs - peak)))
    if total <= 0:
        raise DomainError("sum is not positive")
    return peak + math.log(total)


def asep_mpsk_closed(p: KappaMuShadowedParams, M: int) -> AepResult:
    """Average SEP of M-PSK under the seven-exponential approximation.

    Each exponential averages to the MGF of the SNR, so the result is
    ``lam sum_l A_l (nu+B_l)^{-mu} (1 - omega/(nu+B_l))^{-m}``; it is exact for
    the approximant and needs no truncation.
    """
    coef = awgn.mpsk_coefficients(M)
    c = derived_constants(p)
    A = np.asarray(coef.A)
    B = np.asarray(coef.B)
    keep = A > 0
    x = c.nu + B[keep]
    if np.any(x <= c.omega):
        raise DomainError("nu + B_l must exceed omega")
    logs = c.log_lam + np.log(A[keep]) - p.mu * np.log(x) - p.m * np.log1p(-c.omega / x)
    lv = _logsumexp_signed(logs, np.ones_like(logs))
    return AepResult(math.exp(lv), lv, 0, 0.0, True)


def asep_mpsk_asymptotic(p: KappaMuShadowedParams, M: int) -> float:
    """High-SNR M-PSK average SEP ``lam sum_l A_l B_l^{-mu}``."""
    return math.exp(log_asep_mpsk_asymptotic(p, M))


def log_asep_mpsk_asymptotic(p: KappaMuShadowedParams, M: int) -> float:
    coef = awgn.mpsk_coefficients(M)
    c = derived_constants(p)
    A = np.asarray(coef.A)
    B = np.asarray(coef.B)
    keep = A > 0
    logs = c.log_lam + np.log(A[keep]) - p.mu * np.log(B[keep])
    return _logsumexp_signed(logs, np.ones_like(logs))


# ---------------------------------------------------------------- DQPSK

CHI_SHIFT = 0.5 * (DQPSK.b - DQPSK.a) ** 2


def effective_snr(p: KappaMuShadowedParams, s: float = CHI_SHIFT) -> float:
    """Mean SNR under the density tilted by ``exp(-s g)``.

    The DQPSK integrand is dominated by ``K(g) ~ exp(-s g)`` with
    ``s = (b-a)^2/2``, so this is where the averaged error probability
    collects its mass.
    """
    c = derived_constants(p)
    x = c.nu + s
    return p.mu / x + p.m * c.omega / (x * (x - c.omega))


def select_chi_row(p: KappaMuShadowedParams, rule: int | str = "auto") -> int:
    """Pick one fitted-weight row for the averaged DQPSK series.

    ``"auto"`` uses the range containing :func:`effective_snr`;
    ``"gamma_bar"`` the range containing the mean SNR; an integer pins a row.
    """
    if isinstance(rule, (int, np.integer)) and not isinstance(rule, bool):
        if not 0 <= rule < len(TABLE_III.rows):
            raise DomainError(f"no fitted row {rule}")
        return int(rule)
    if rule == "auto":
        return int(TABLE_III.row_index(effective_snr(p)))
    if rule == "gamma_bar":
        return int(TABLE_III.row_index(p.gamma_bar))
    raise DomainError(f"unknown row rule {rule!r}")


def _series(term: Callable[[int], float], ctrl: SeriesControl) -> tuple[float, int, bool]:
    """Sum positive terms until ``max_terms`` or until the geometric tail
    estimate ``t r / (1 - r)`` (``r`` the ratio of successive terms) falls
    below ``rel_tol`` of the sum, twice in a row."""
    total = 0.0
    quiet = 0
    prev = math.inf
    for k in range(int(ctrl.max_terms)):
        t = term(k)
        total += t
        if t == 0.0:
            return total, k + 1, True
        r = t / prev
        prev = t
        if r < 1.0 and t * r / (1.0 - r) <= ctrl.rel_tol * total:
            quiet += 1
            if quiet == 2:
                return total, k + 1, True
        else:
            quiet = 0
    return total, int(ctrl.max_terms), False


def _log_mixing(p: KappaMuShadowedParams, omega: float, k: int) -> float:
    # (m)_k omega^k / k!
    if k == 0:
        return 0.0
    return log_pochhammer(p.m, k) + k * math.log(omega) - math.lgamma(k + 1)


def _m1_term(p, omega, xi, s, k) -> float:
    c = s * s + 2.0 * xi
    n = p.mu + k
    log_phi = (
        _log_mixing(p, omega, k)
        - log_pochhammer(p.mu, k)
        + n * math.log(2.0 / c)
        + math.lgamma(n + 0.5)
        - math.log(n)
        - _LOG_2SQRTPI
    )
    return math.exp(log_phi) * gauss_2f1(0.5, n, n + 1.0, 2.0 * xi / c)


def _m2_term(p, omega, xi, k) -> float:
    q = 2.0 + xi
    n = p.mu + k
    log_psi = _log_mixing(p, omega, k) + math.lgamma(p.mu) - n * math.log(q)
    return math.exp(log_psi) * gauss_2f1(0.5 * n, 0.5 * (n + 1.0), 1.0, 2.0 / (q * q))


def abep_dqpsk_closed(
    p: KappaMuShadowedParams,
    ctrl: SeriesControl = SeriesControl(),
    chi_row: int | str = "auto",
    bound_variant: str = "pochhammer",
) -> AepResult:
    """Average BEP of Gray-coded DQPSK under the fitted two-exponential weight.

    The conditional BEP is expanded as
    ``sum_i [eta C_i e^{-D_i g} K(g) + F_i e^{-D_i g} I0(sqrt2 g) e^{-2g}]``;
    averaging term by term against the ``1F1`` power series of the density
    gives two hypergeometric series per exponent. One fitted row is used for
    the whole average, chosen by :func:`select_chi_row`.

    Parameters
    ----------
    p
        Fading parameters.
    ctrl
        Series truncation. ``max_terms = L`` keeps ``k = 0..L-1``.
    chi_row
        Row rule, see :func:`select_chi_row`.
    bound_variant
        Passed to :func:`truncation_bound` for the reported bound.

    Returns
    -------
    AepResult
        ``terms_used`` is the longest series actually summed.
    """
    row = select_chi_row(p, chi_row)
    coeffs = CombinedCoefficients.from_row(TABLE_III.rows[row])
    c = derived_constants(p)
    eta = DQPSK.eta
    lo_s, hi_s = DQPSK.b - DQPSK.a, DQPSK.b + DQPSK.a
    exact_one = c.omega == 0.0
    if exact_one:
        # without a dominant component only k = 0 survives
        ctrl = SeriesControl(1, ctrl.rel_tol, ctrl.require_convergence)
    pieces = []
    used = 0
    converged = True
    for C, D, F in zip(coeffs.C, coeffs.D, coeffs.F):
        xi = c.nu + D
        s1, n1, ok1 = _series(lambda k: _m1_term(p, c.omega, xi, lo_s, k), ctrl)
        s2, n2, ok2 = _series(lambda k: _m1_term(p, c.omega, xi, hi_s, k), ctrl)
        s3, n3, ok3 = _series(lambda k: _m2_term(p, c.omega, xi, k), ctrl)
        pieces.append(eta * C * (s1 - s2) + F * s3)
        used = max(used, n1, n2, n3)
        converged &= ok1 and ok2 and ok3
    inner = math.fsum(pieces)
    bound = 0.0
    if c.omega > 0.0:
        bound = truncation_bound(p, used, chi_row=row, variant=bound_variant)
    if inner <= 0:
        raise ConvergenceError("DQPSK series lost all significance", float("nan"), bound)
    log_value = c.log_lam - math.lgamma(p.mu) + math.log(inner)
    value = math.exp(log_value)
    converged = converged or exact_one or bound <= ctrl.rel_tol * value
    if not converged and ctrl.require_convergence:
        raise ConvergenceError(
            f"DQPSK series not converged within {ctrl.max_terms} terms", value, bound
        )
    return AepResult(value, log_value, used, bound, converged, row)


def abep_dqpsk_asymptotic(p: KappaMuShadowedParams, chi_row: int | str = "auto") -> float:
    """High-SNR DQPSK average BEP: leading ``k = 0`` terms with ``xi_i = D_i``."""
    return math.exp(log_abep_dqpsk_asymptotic(p, chi_row))


def log_abep_dqpsk_asymptotic(p: KappaMuShadowedParams, chi_row: int | str = "auto") -> float:
    row = select_chi_row(p, chi_row)
    coeffs = CombinedCoefficients.from_row(TABLE_III.rows[row])
    c = derived_constants(p)
    mu = p.mu
    total = []
    for C, D, F in zip(coeffs.C, coeffs.D, coeffs.F):
        m1 = []
        for s in (DQPSK.b - DQPSK.a, DQPSK.b + DQPSK.a):
            cc = s * s + 2.0 * D
            arg = 2.0 * D / cc
            if not 0.0 <= arg < 1.0:
                raise DomainError("asymptotic hypergeometric argument outside [0, 1)")
            log_delta = mu * math.log(2.0 / cc) + math.lgamma(mu + 0.5) - math.log(mu) - _LOG_2SQRTPI
            m1.append(math.exp(log_delta) * gauss_2f1(0.5, mu, mu + 1.0, arg))
        q = 2.0 + D
        m2 = math.exp(math.lgamma(mu) - mu * math.log(q)) * gauss_2f1(0.5 * mu, 0.5 * (mu + 1), 1.0, 2.0 / (q * q))
        total.append(DQPSK.eta * C * (m1[0] - m1[1]) + F * m2)
    inner = math.fsum(total)
    if inner <= 0:
        raise DomainError("asymptotic coefficient is not positive")
    return c.log_lam - math.lgamma(mu) + math.log(inner)


def truncation_bound(
    p: KappaMuShadowedParams,
    L: int,
    chi_row: int | str = "auto",
    variant: str = "pochhammer",
) -> float:
    """Upper bound on the tail ``k >= L`` of the DQPSK average-BEP series.

    Parameters
    ----------
    p
        Fading parameters.
    L
        Number of retained terms.
    chi_row
        Row rule, see :func:`select_chi_row`.
    variant
        ``"pochhammer"`` carries ``(m)_L`` in the numerator of the second
        tail factor; ``"printed"`` uses ``1/(Gamma(m+L) Gamma(m))`` instead.

    Returns
    -------
    float
        Non-negative bound; zero when ``omega = 0`` (the series has one term).
    """
    if int(L) < 1:
        raise DomainError("L must be >= 1")
    if variant not in ("pochhammer", "printed"):
        raise DomainError(f"unknown bound variant {variant!r}")
    L = int(L)
    c = derived_constants(p)
    if c.omega == 0.0:
        return 0.0
    row = select_chi_row(p, chi_row)
    coeffs = CombinedCoefficients.from_row(TABLE_III.rows[row])
    mu, m, w = p.mu, p.m, c.omega
    eta = abs(DQPSK.eta)
    log_head = log_pochhammer(m, L) - math.lgamma(L + 1) + math.lgamma(mu)
    total = 0.0
    for C, D, F in zip(coeffs.C, coeffs.D, coeffs.F):
        xi = c.nu + D
        eps1 = 0.0
        for s in (DQPSK.b - DQPSK.a, DQPSK.b + DQPSK.a):
            cc = s * s + 2.0 * xi
            x = 2.0 * w / cc
            if not x < 1.0:
                raise DomainError(f"infeasible bound: 2 omega < (b-a)^2 + 2 xi fails ({2 * w} >= {cc})")
            log_theta = mu * math.log(2.0 / cc) + log_head + L * math.log(x)
            z = 2.0 * xi / cc
            eps1 += (
                math.exp(log_theta - _LOG_2SQRTPI) / math.sqrt(1.0 - z)
                * gauss_2f1(1.0, m + L, L + 1.0, x)
            )
        q = 2.0 + xi
        if not w < q:
            raise DomainError(f"infeasible bound: omega < 2 + xi fails ({w} >= {q})")
        if variant == "pochhammer":
            log_lam2 = log_head + L * math.log(w) - (mu + L) * math.log(q)
        else:
            log_lam2 = (
                math.lgamma(mu) + L * math.log(w) - math.lgamma(L + 1)
                - math.lgamma(m + L) - math.lgamma(m) - (mu + L) * math.log(q)
            )
        eps2 = (
            math.exp(log_lam2)
            * gauss_2f1(0.5 * (mu + L), 0.5 * (mu + L + 1), 1.0, 2.0 / (q * q))
            * gauss_2f1(1.0, m + L, L + 1.0, w / q)
        )
        total += abs(C) * eps1 + abs(F / DQPSK.eta) * eps2
    return math.exp(c.log_lam - math.lgamma(mu)) * eta * total


# ---------------------------------------------------------------- dispatch


def aep_closed(p: KappaMuShadowedParams, scheme: ModulationSpec,
               ctrl: SeriesControl = SeriesControl(), chi_row: int | str = "auto") -> AepResult:
    if scheme.kind is Scheme.MPSK:
        return asep_mpsk_closed(p, scheme.order)
    return abep_dqpsk_closed(p, ctrl, chi_row)


def aep_asymptotic(p: KappaMuShadowedParams, scheme: ModulationSpec,
                   chi_row: int | str = "auto") -> float:
    if scheme.kind is Scheme.MPSK:
        return asep_mpsk_asymptotic(p, scheme.order)
    return abep_dqpsk_asymptotic(p, chi_row)


def conditional_ep(scheme: ModulationSpec, which: Which | str,
                   p: KappaMuShadowedParams | None = None,
                   chi_row: int | str | None = "auto") -> tuple[Callable, tuple[float, ...]]:
    """Vectorized conditional error probability and its kinks.

    For the DQPSK approximation the fitted row follows the same rule as the
    closed form (``p`` is needed for ``"auto"``); ``chi_row=None`` uses the
    piecewise weight instead, which jumps at the range edges.
    """
    which = Which(which)
    if scheme.kind is Scheme.MPSK:
        M = scheme.order
        if which is Which.EXACT_EP:
            return (lambda g: awgn.mpsk_sep_exact_vec(M, g)), ()
        return (lambda g: awgn.mpsk_sep_approx(M, g)), ()
    if which is Which.EXACT_EP:
        return awgn.dqpsk_bep_exact_vec, ()
    if chi_row is None:
        return awgn.dqpsk_bep_approx, TABLE_III.edges
    if p is None and isinstance(chi_row, str):
        raise DomainError("row rule needs fading parameters")
    row = select_chi_row(p, chi_row)
    return (lambda g: awgn.dqpsk_bep_approx(g, row=row)), ()


def aep_quadrature_oracle(
    p: KappaMuShadowedParams,
    scheme: ModulationSpec,
    which: Which | str = Which.EXACT_EP,
    tol: Tolerance = ORACLE_TOL,
    chi_row: int | str | None = "auto",
) -> float:
    """``int_0^inf pdf(g) H(g) dg`` by adaptive quadrature.

    The head of the range is integrated in ``u = g^mu``, which absorbs the
    density's power-law factor and any singularity at the origin.
    """
    h, kinks = conditional_ep(scheme, which, p, chi_row)
    return integrate_pdf(p, h, tol=tol, breakpoints=kinks)


def aep_monte_carlo(
    p: KappaMuShadowedParams,
    scheme: ModulationSpec,
    which: Which | str = Which.EXACT_EP,
    mc: McControl = McControl(1_000_000, 0, 1),
    sampler: Sampler | str = Sampler.INVERSE_CDF,
    chi_row: int | str | None = "auto",
) -> tuple[float, float]:
    """Semi-analytic Monte Carlo: mean of ``H`` over sampled SNRs and its standard error."""
    h, _ = conditional_ep(scheme, which, p, chi_row)
    x = np.asarray(h(sample(p, mc, sampler)), dtype=float)
    if x.size < 2:
        return float(x.mean()), math.inf
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


# ---------------------------------------------------------------- diversity


def diversity_order(
    p: KappaMuShadowedParams,
    scheme: ModulationSpec,
    gamma_bar_grid,
    method: str = "ratio",
    ctrl: SeriesControl = SeriesControl(),
    chi_row: int | str = "auto",
) -> list[tuple[float, float]]:
    """Diversity-order estimate at each mean SNR (linear) of the grid.

    ``"ratio"`` returns ``-log P / log gamma_bar``; ``"local"`` returns the
    log-log slope ``-d log P / d log gamma_bar`` by central differences.
    Everything is computed from ``log P`` so nothing underflows.
    """
    grid = np.asarray(gamma_bar_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0) or np.any(grid <= 0):
        raise DomainError("grid must be ascending, positive and have >= 2 points")
    if method not in ("ratio", "local"):
        raise DomainError(f"unknown method {method!r}")

    def log_p(gb: float) -> float:
        return aep_closed(p.with_gamma_bar(gb), scheme, ctrl, chi_row).log_value

    out = []
    for gb in grid:
        if method == "ratio":
            if gb == 1.0:
                raise DomainError("ratio estimate undefined at gamma_bar = 1")
            out.append((float(gb), -log_p(gb) / math.log(gb)))
        else:
            h = 1e-3
            d = (log_p(gb * math.exp(h)) - log_p(gb * math.exp(-h))) / (2 * h)
            out.append((float(gb), -d))
    return out
