from __future__ import annotations

import math

import numpy as np
from scipy import special

from ..errors import DomainError

_SQRT2 = math.sqrt(2.0)


def gauss_q(x):
    """Gaussian tail probability ``Q(x) = 0.5 erfc(x / sqrt(2))``.

    Accepts scalars or arrays. Non-finite input raises ``DomainError``.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("gauss_q requires finite input")
    if arr.ndim == 0:
        return 0.5 * math.erfc(float(arr) / _SQRT2)
    return 0.5 * special.erfc(arr / _SQRT2)
