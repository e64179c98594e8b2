"""First-order Marcum Q-function via its Poisson-mixture series."""

from __future__ import annotations

import math

from ..errors import ConvergenceError, DomainError
from .tolerance import DEFAULT_TOL, Tolerance


def _logaddexp(x: float, y: float) -> float:
    if x == -math.inf:
        return y
    if y == -math.inf:
        return x
    if x < y:
        x, y = y, x
    return x + math.log1p(math.exp(y - x))


def marcum_q1(alpha: float, beta: float, tol: Tolerance = DEFAULT_TOL) -> float:
    r"""First-order Marcum Q-function :math:`Q_1(\alpha, \beta)`.

    Uses

    .. math::

        Q_1(\alpha,\beta) = \sum_{k\ge 0} e^{-x}\frac{x^k}{k!}\,
            \Gamma_u(k+1, y),\qquad x=\alpha^2/2,\; y=\beta^2/2,

    where :math:`\Gamma_u` is the regularized upper incomplete gamma
    function, i.e. the Poisson(y) CDF at ``k``. Every factor is carried in
    log space, so arguments with ``x`` or ``y`` far beyond 745 are fine.
    Summation stops once a geometric bound on the remaining Poisson(x)
    tail drops below ``tol.rel`` times the partial sum.
    """
    if not (math.isfinite(alpha) and math.isfinite(beta)) or alpha < 0 or beta < 0:
        raise DomainError("marcum_q1 requires finite alpha, beta >= 0")
    if beta == 0.0:
        return 1.0
    x = 0.5 * alpha * alpha
    y = 0.5 * beta * beta
    if y == 0.0:
        return 1.0
    if x == 0.0:
        return math.exp(-y)

    logx = math.log(x)
    logy = math.log(y)
    log_px = -x  # log Poisson(x) pmf at k
    log_py = -y
    log_cdf_y = log_py  # log Poisson(y) cdf at k
    log_total = log_px + log_cdf_y
    for k in range(1, tol.max_iter):
        log_px += logx - math.log(k)
        log_py += logy - math.log(k)
        log_cdf_y = _logaddexp(log_cdf_y, log_py)
        log_total = _logaddexp(log_total, log_px + log_cdf_y)
        if k + 2 > x:
            # sum_{j>k} p_j <= p_{k+1} / (1 - x/(k+2)), and the cdf factor is <= 1
            log_tail = log_px + logx - math.log(k + 1) - math.log1p(-x / (k + 2))
            if log_tail - log_total < math.log(tol.rel) or log_tail < math.log(tol.abs):
                return min(1.0, math.exp(log_total))
    raise ConvergenceError(
        "marcum_q1: Poisson series did not converge",
        estimate=min(1.0, math.exp(log_total)),
    )
