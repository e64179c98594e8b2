from __future__ import annotations

from dataclasses import dataclass

from ..errors import DomainError


@dataclass(frozen=True)
class Tolerance:
    """Stopping rule shared by series and quadrature routines.

    A result is accepted once its error estimate is at most
    ``max(abs, rel * |value|)``. ``max_iter`` caps series terms or
    quadrature panels.
    """

    rel: float = 1e-12
    abs: float = 1e-300
    max_iter: int = 10_000

    def __post_init__(self) -> None:
        if self.rel < 0 or self.abs < 0:
            raise DomainError("tolerances must be non-negative")
        if self.rel == 0 and self.abs == 0:
            raise DomainError("rel and abs cannot both be zero")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError("max_iter must be a positive integer")

    def target(self, value: float) -> float:
        return max(self.abs, self.rel * abs(value))


DEFAULT_TOL = Tolerance()
