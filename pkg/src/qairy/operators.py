"""Linear q-difference operators ``sum c * x**m * sigma_q**l``.

The same term list is used for pointwise evaluation on functions and for the
coefficient action on (Laurent) series.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import ShapeError
from .qcore import as_qbase


@dataclass(frozen=True)
class QOperator:
    """Terms ``(coefficient, x_power, sigma_power)``; ``sigma u(x) = u(q x)``.

    Negative sigma powers are allowed: on coefficients they act as
    ``a_n -> q**(l n) a_n`` like any other power.
    """

    terms: tuple

    def __post_init__(self):
        if not self.terms:
            raise ShapeError("an operator needs at least one term")
        norm = tuple((complex(c), int(m), int(l)) for c, m, l in self.terms)
        object.__setattr__(self, "terms", norm)

    @property
    def max_x_power(self) -> int:
        return max(m for _, m, _ in self.terms)

    @property
    def min_x_power(self) -> int:
        return min(m for _, m, _ in self.terms)

    def term_values(self, u: Callable[[complex], complex], x: complex, q) -> list[complex]:
        qv = as_qbase(q).value
        return [c * x ** m * u(qv ** l * x) for c, m, l in self.terms]

    def __call__(self, u: Callable[[complex], complex], x: complex, q) -> complex:
        return sum(self.term_values(u, x, q))

    def shape(self) -> tuple:
        return tuple(sorted((m, l) for _, m, l in self.terms))


def ramanujan_operator(q) -> QOperator:
    """``q x sigma^2 - sigma + 1``, annihilating ``A_q``."""
    return QOperator(((as_qbase(q).value, 1, 2), (-1, 0, 1), (1, 0, 0)))


def qairy_operator(q=None) -> QOperator:
    """``sigma^2 + x sigma - 1``, annihilating ``Ai_q``."""
    return QOperator(((1, 0, 2), (1, 1, 1), (-1, 0, 0)))


def linear_k_operator(k: complex) -> QOperator:
    """``K x sigma^2 - sigma + 1`` (the source of a shearing)."""
    return QOperator(((k, 1, 2), (-1, 0, 1), (1, 0, 0)))


def sheared_k_operator(k: complex) -> QOperator:
    """``K t^2 sigma^2 - sigma + 1``."""
    return QOperator(((k, 2, 2), (-1, 0, 1), (1, 0, 0)))


def laplace_side_operator(q) -> QOperator:
    """``-q^5 t^2 sigma^2 - sigma + 1``, satisfied by ``f(t) = A_{q^2}(-q^3 t^2)``."""
    return sheared_k_operator(-as_qbase(q).value ** 5)
