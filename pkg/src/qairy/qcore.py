"""Core q-series numerics.

q-Pochhammer symbols, the Jacobi theta function (bilateral series and triple
product), and the basic hypergeometric series ``r phi s`` with adaptive
truncation.  Everything works in double-precision complex arithmetic.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError, OverflowGuard, TruncationExhausted

# Relative distance under which a number is treated as lying on a q-power lattice.
LATTICE_TOL = 1e-12


@dataclass(frozen=True)
class QBase:
    """A validated base ``q`` with ``0 < |q| < 1``."""

    value: complex
    modulus: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        try:
            v = complex(self.value)
        except (TypeError, ValueError) as exc:
            raise DomainError(f"q must be a number, got {self.value!r}") from exc
        m = abs(v)
        if not (math.isfinite(m) and 0.0 < m < 1.0):
            raise DomainError(f"q out of range: need 0 < |q| < 1, got {v}")
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "modulus", m)

    def __complex__(self):
        return self.value

    @property
    def q2(self) -> complex:
        return self.value * self.value

    @property
    def sqrt(self) -> complex:
        """Principal square root."""
        return cmath.sqrt(self.value)

    @property
    def pole_radius(self) -> float:
        """``1/|q|**2``."""
        return 1.0 / (self.modulus * self.modulus)

    def squared(self) -> "QBase":
        return QBase(self.q2)

    def sqrt_base(self) -> "QBase":
        return QBase(self.sqrt)

    def power(self, n: int) -> complex:
        return self.value ** n


def as_qbase(q) -> QBase:
    return q if isinstance(q, QBase) else QBase(q)


@dataclass(frozen=True)
class SeriesParams:
    """Truncation controls for every infinite sum and product.

    A sum stops once ``stop_run`` consecutive terms are below
    ``rel_tol`` times the largest magnitude seen so far.
    """

    max_terms: int = 1000
    rel_tol: float = 1e-16
    stop_run: int = 3

    def __post_init__(self):
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise DomainError(f"max_terms must be a positive integer, got {self.max_terms}")
        if not (0.0 < self.rel_tol < 1.0):
            raise DomainError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if int(self.stop_run) != self.stop_run or self.stop_run < 1:
            raise DomainError(f"stop_run must be a positive integer, got {self.stop_run}")


DEFAULT_PARAMS = SeriesParams()


def _params(p: SeriesParams | None) -> SeriesParams:
    return DEFAULT_PARAMS if p is None else p


def lattice_exponent(z: complex, q, tol: float = LATTICE_TOL) -> int | None:
    """Return ``m`` if ``z`` equals ``q**m`` to relative ``tol``, else None."""
    q = as_qbase(q)
    z = complex(z)
    if z == 0:
        return None
    m = round(math.log(abs(z)) / math.log(q.modulus))
    qm = q.value ** m
    if abs(z - qm) <= tol * abs(qm):
        return m
    return None


def scaled_residual(lhs: complex, rhs: complex, *magnitudes: float) -> float:
    """``|lhs - rhs|`` divided by the largest of ``|lhs|``, ``|rhs|`` and ``magnitudes``.

    Pass the summed term magnitudes of each side as ``magnitudes`` so that
    identities evaluated through cancelling sums are judged against the
    precision actually available.
    """
    scale = max(abs(lhs), abs(rhs), *magnitudes, 1e-300)
    return abs(lhs - rhs) / scale


# --------------------------------------------------------------------------- #
# q-Pochhammer symbols
# --------------------------------------------------------------------------- #

def qpochhammer_finite(a: complex, q, n: int) -> complex:
    """``(a; q)_n = (1 - a)(1 - a q)...(1 - a q**(n-1))``; ``n = 0`` gives 1."""
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    q = as_qbase(q).value
    prod = 1.0 + 0j
    qk = 1.0 + 0j
    for _ in range(n):
        prod *= 1.0 - a * qk
        qk *= q
    return prod


def qpochhammer_infinite(a: complex, q, p: SeriesParams | None = None) -> complex:
    """``(a; q)_oo``, truncated once ``|a q**k| < rel_tol`` for ``stop_run`` consecutive k."""
    p = _params(p)
    qv = as_qbase(q).value
    prod = 1.0 + 0j
    ak = complex(a)
    run = 0
    for _ in range(p.max_terms):
        prod *= 1.0 - ak
        if abs(ak) < p.rel_tol:
            run += 1
            if run >= p.stop_run:
                return prod
        else:
            run = 0
        ak *= qv
    raise TruncationExhausted(f"(a;q)_oo with a={a}, q={qv} needs more than {p.max_terms} factors")


def qpochhammer_multi(args: Sequence[complex], q, p: SeriesParams | None = None) -> complex:
    """``(a1, ..., am; q)_oo`` as a product of single symbols."""
    prod = 1.0 + 0j
    for a in args:
        prod *= qpochhammer_infinite(a, q, p)
    return prod


def qpochhammer_infinite_array(a, q, p: SeriesParams | None = None) -> np.ndarray:
    """Vectorised ``(a; q)_oo`` over an array of ``a`` (used on quadrature nodes)."""
    p = _params(p)
    qv = as_qbase(q).value
    ak = np.array(a, dtype=complex)
    prod = np.ones_like(ak)
    run = 0
    for _ in range(p.max_terms):
        prod *= 1.0 - ak
        if ak.size == 0 or np.max(np.abs(ak)) < p.rel_tol:
            run += 1
            if run >= p.stop_run:
                return prod
        else:
            run = 0
        ak = ak * qv
    raise TruncationExhausted(f"(a;q)_oo needs more than {p.max_terms} factors")


# --------------------------------------------------------------------------- #
# Theta function
# --------------------------------------------------------------------------- #

def theta_series_sum(x: complex, q, p: SeriesParams | None = None) -> tuple[complex, float]:
    """Bilateral series for theta, returning ``(value, sum of |terms|)``."""
    p = _params(p)
    x = complex(x)
    if x == 0:
        raise DomainError("theta(x) is undefined at x = 0")
    qv = as_qbase(q).value
    peak = 1.0
    mag = 1.0
    tails = []
    # n >= 1: t_n = t_{n-1} q^{n-1} x ;  n <= -1: t_{-n} = t_{-n+1} q^n / x
    for step in (lambda n: qv ** (n - 1) * x, lambda n: qv ** n / x):
        term = 1.0 + 0j
        total = 0j
        run = 0
        for n in range(1, p.max_terms + 1):
            term *= step(n)
            if not cmath.isfinite(term):
                raise OverflowGuard(f"theta series term overflow at x={x}")
            a = abs(term)
            total += term
            mag += a
            peak = max(peak, a)
            if a < p.rel_tol * peak:
                run += 1
                if run >= p.stop_run:
                    break
            else:
                run = 0
        else:
            raise TruncationExhausted(f"theta series at x={x} needs more than {p.max_terms} terms per tail")
        tails.append(total)
    return 1.0 + tails[0] + tails[1], mag


def theta_series(x: complex, q, p: SeriesParams | None = None) -> complex:
    """``theta(x) = sum_{n in Z} q**(n(n-1)/2) x**n`` by adaptive bilateral summation."""
    return theta_series_sum(x, q, p)[0]


def theta_product(x: complex, q, p: SeriesParams | None = None) -> complex:
    """``theta(x) = (q, -x, -q/x; q)_oo`` (Jacobi triple product)."""
    x = complex(x)
    if x == 0:
        raise DomainError("theta(x) is undefined at x = 0")
    q = as_qbase(q)
    return qpochhammer_multi((q.value, -x, -q.value / x), q, p)


def theta(x: complex, q, p: SeriesParams | None = None) -> complex:
    """Theta function used by the higher-level modules (product form).

    The product keeps full relative accuracy next to the zeros ``x = -q**m``
    where the bilateral series cancels.
    """
    return theta_product(x, q, p)


def theta_array(x, q, p: SeriesParams | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if np.any(x == 0):
        raise DomainError("theta(x) is undefined at x = 0")
    q = as_qbase(q)
    return (
        qpochhammer_infinite(q.value, q, p)
        * qpochhammer_infinite_array(-x, q, p)
        * qpochhammer_infinite_array(-q.value / x, q, p)
    )


def theta_zero_index(x: complex, q) -> int | None:
    """Return ``m`` if ``x`` sits on the zero ``-q**m`` of theta, else None."""
    return lattice_exponent(-complex(x), q)


# --------------------------------------------------------------------------- #
# Adaptive summation and basic hypergeometric series
# --------------------------------------------------------------------------- #

class SeriesSum(NamedTuple):
    value: complex
    magnitude: float  # sum of |terms|
    terms: int


def sum_series(ratio: Callable[[int], complex], x: complex, p: SeriesParams | None = None) -> SeriesSum:
    """Sum ``sum_n t_n`` with ``t_0 = 1`` and ``t_n = t_{n-1} * ratio(n) * x``."""
    p = _params(p)
    x = complex(x)
    term = 1.0 + 0j
    total = 1.0 + 0j
    mag = 1.0
    peak = 1.0
    if x == 0:
        return SeriesSum(total, mag, 1)
    run = 0
    for n in range(1, p.max_terms):
        term *= ratio(n) * x
        if not cmath.isfinite(term):
            raise ConvergenceError(f"series terms overflow at n={n}, x={x}")
        total += term
        a = abs(term)
        mag += a
        peak = max(peak, a, abs(total))
        if a < p.rel_tol * peak:
            run += 1
            if run >= p.stop_run:
                return SeriesSum(total, mag, n + 1)
        else:
            run = 0
    raise TruncationExhausted(f"series at x={x} not converged after {p.max_terms} terms")


@dataclass(frozen=True)
class HypergeometricSpec:
    """Parameters ``a_1..a_r`` (upper) and ``b_1..b_s`` (lower) of ``r phi s``."""

    upper: tuple
    lower: tuple
    base: QBase

    def __post_init__(self):
        object.__setattr__(self, "upper", tuple(complex(a) for a in self.upper))
        object.__setattr__(self, "lower", tuple(complex(b) for b in self.lower))
        object.__setattr__(self, "base", as_qbase(self.base))
        for b in self.lower:
            m = lattice_exponent(b, self.base)
            if m is not None and m <= 0:
                raise DomainError(f"lower parameter {b} = q^{m} makes (b;q)_n vanish")

    @property
    def r(self) -> int:
        return len(self.upper)

    @property
    def excess(self) -> int:
        """``1 + s - r``, the power of ``(-1)^n q^(n(n-1)/2)`` in each term."""
        return 1 + len(self.lower) - len(self.upper)

    def ratio(self, n: int) -> complex:
        """``t_n / (t_{n-1} x)`` for ``n >= 1``."""
        q = self.base.value
        qn1 = q ** (n - 1)
        num = 1.0 + 0j
        for a in self.upper:
            num *= 1.0 - a * qn1
        den = 1.0 - qn1 * q
        for b in self.lower:
            den *= 1.0 - b * qn1
        return num / den * (-qn1) ** self.excess

    def term(self, n: int, x: complex) -> complex:
        """The ``n``-th term, built by the same recurrence the summation uses."""
        t = 1.0 + 0j
        for k in range(1, n + 1):
            t *= self.ratio(k) * x
        return t

    @property
    def s(self) -> int:
        return len(self.lower)


def rphi_s_sum(spec: HypergeometricSpec, x: complex, p: SeriesParams | None = None) -> SeriesSum:
    """Like :func:`rphi_s` but also returns the term magnitude and count."""
    x = complex(x)
    if spec.excess == 0 and x != 0 and abs(x) >= 1:
        raise ConvergenceError(f"{spec.r}phi{spec.s} needs |x| < 1, got |x| = {abs(x)}")
    return sum_series(spec.ratio, x, p)


def rphi_s(spec: HypergeometricSpec, x: complex, p: SeriesParams | None = None) -> complex:
    """Basic hypergeometric series

    ``sum_n (a;q)_n / ((b;q)_n (q;q)_n) [(-1)^n q^(n(n-1)/2)]^(1+s-r) x^n``

    summed term by term through the one-step ratio.
    """
    return rphi_s_sum(spec, x, p).value


def psi_check(q, p: SeriesParams | None = None) -> float:
    """Relative gap between ``sum q**(n(n+1)/2)`` and ``(q^2;q^2)_oo / (q;q^2)_oo``."""
    q = as_qbase(q)
    qv = q.value
    series = sum_series(lambda n: qv ** n, 1.0, p).value
    q2 = q.squared()
    product = qpochhammer_infinite(q2.value, q2, p) / qpochhammer_infinite(qv, q2, p)
    return abs(series - product) / abs(product)


# --------------------------------------------------------------------------- #
# Theta identities as residuals
# --------------------------------------------------------------------------- #

def triple_product_residual(x: complex, q, p: SeriesParams | None = None) -> float:
    series, mag = theta_series_sum(x, q, p)
    return scaled_residual(series, theta_product(x, q, p), mag)


def theta_shift_residual(x: complex, k: int, q, p: SeriesParams | None = None) -> float:
    """Residual of ``theta(q**k x) = q**(-k(k-1)/2) x**(-k) theta(x)``."""
    q = as_qbase(q)
    x = complex(x)
    lhs, lmag = theta_series_sum(q.value ** k * x, q, p)
    th, tmag = theta_series_sum(x, q, p)
    factor = q.value ** (-k * (k - 1) // 2) * x ** (-k)
    return scaled_residual(lhs, factor * th, lmag, abs(factor) * tmag)


def theta_inversion_residual(x: complex, q, p: SeriesParams | None = None) -> float:
    """Residual of ``x theta(1/x) = theta(x)``."""
    x = complex(x)
    inv, imag = theta_series_sum(1.0 / x, q, p)
    th, tmag = theta_series_sum(x, q, p)
    return scaled_residual(x * inv, th, abs(x) * imag, tmag)


def sign_flip_ratio(x: complex, lam: complex, q, p: SeriesParams | None = None) -> complex:
    """``theta(-lam x) / theta(lam x)``, a solution of ``u(q x) = -u(x)``."""
    den = theta(lam * x, q, p)
    if den == 0 or theta_zero_index(lam * x, q) is not None:
        raise DomainError(f"theta(lam*x) vanishes at lam*x={lam * x}")
    return theta(-lam * x, q, p) / den


def sign_flip_residual(x: complex, lam: complex, q, p: SeriesParams | None = None) -> float:
    """Residual of ``r(q x) = -r(x)`` for ``r = theta(-lam x)/theta(lam x)``."""
    q = as_qbase(q)
    return scaled_residual(sign_flip_ratio(q.value * x, lam, q, p), -sign_flip_ratio(x, lam, q, p))
