"""Scalar special functions and quadrature used throughout the package."""

from .bessel import bessel_i0_scaled, bessel_i1_scaled, bessel_i_half
from .gamma import ln_gamma, log_pochhammer, pochhammer, rgamma
from .hyper import gauss_2f1, hyp_1f0, kummer_1f1, log_kummer_1f1
from .marcum import marcum_q1
from .normal import gauss_q
from .quad import gauss_legendre, integrate_adaptive
from .tolerance import DEFAULT_TOL, Tolerance

__all__ = [
    "DEFAULT_TOL",
    "Tolerance",
    "bessel_i0_scaled",
    "bessel_i1_scaled",
    "bessel_i_half",
    "gauss_2f1",
    "gauss_legendre",
    "gauss_q",
    "hyp_1f0",
    "integrate_adaptive",
    "kummer_1f1",
    "ln_gamma",
    "log_kummer_1f1",
    "log_pochhammer",
    "marcum_q1",
    "pochhammer",
    "rgamma",
]
