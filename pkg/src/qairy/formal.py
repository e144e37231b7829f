"""Formal power and Laurent series over a base q.

Coefficient-level machinery: truncated series with trusted-index
bookkeeping, q-difference operators acting on coefficients, the q-Borel
map, the shearing substitution ``t^2 = x`` and formal checks of the
structural identities that lead to the connection formula.  Divergent series
only ever exist here as coefficient arrays; they are never summed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OverflowGuard, ShapeError
from .operators import QOperator, linear_k_operator, ramanujan_operator, sheared_k_operator
from .qcore import (
    QBase,
    SeriesParams,
    as_qbase,
    qpochhammer_finite,
    scaled_residual,
    theta,
    theta_zero_index,
)

FormalOperator = QOperator

# Largest coefficient magnitude allowed; leaves headroom for convolutions.
OVERFLOW_LIMIT = 1e250
_TINY = 1e-300


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """Coefficients ``a_0..a_N`` of a power series in one variable.

    ``trusted`` is the highest index known to agree with the underlying
    infinite series; indices above it are truncation artefacts.
    """

    coeffs: np.ndarray
    base: QBase
    trusted: int | None = None

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=complex).ravel()
        if arr.size == 0:
            raise ShapeError("a truncated series needs at least one coefficient")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "base", as_qbase(self.base))
        top = arr.size - 1
        trusted = top if self.trusted is None else min(int(self.trusted), top)
        object.__setattr__(self, "trusted", trusted)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def __len__(self):
        return self.coeffs.size

    def __getitem__(self, n):
        return self.coeffs[n]

    def _like(self, coeffs, trusted) -> "TruncatedSeries":
        return TruncatedSeries(coeffs, self.base, trusted)

    def _aligned(self, other: "TruncatedSeries"):
        if other.base != self.base:
            raise ShapeError("series over different bases cannot be combined")
        n = max(len(self), len(other))
        a = np.zeros(n, dtype=complex)
        b = np.zeros(n, dtype=complex)
        a[: len(self)] = self.coeffs
        b[: len(other)] = other.coeffs
        return a, b, min(self.trusted, other.trusted)

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        a, b, t = self._aligned(other)
        return self._like(a + b, t)

    def __sub__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        a, b, t = self._aligned(other)
        return self._like(a - b, t)

    def __neg__(self):
        return self._like(-self.coeffs, self.trusted)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            if other.base != self.base:
                raise ShapeError("series over different bases cannot be combined")
            n = min(len(self), len(other))
            prod = np.convolve(self.coeffs, other.coeffs)[:n]
            return self._like(prod, min(self.trusted, other.trusted))
        try:
            c = complex(other)
        except TypeError:
            return NotImplemented
        return self._like(c * self.coeffs, self.trusted)

    __rmul__ = __mul__

    def shift(self, m: int) -> "TruncatedSeries":
        """Multiply by ``t**m`` (m >= 0); the series grows by m coefficients."""
        if m < 0:
            raise ShapeError("shift needs m >= 0")
        return self._like(np.concatenate([np.zeros(m, dtype=complex), self.coeffs]), self.trusted + m)

    def sigma(self, k: int = 1) -> "TruncatedSeries":
        """``sigma_q**k``: ``a_n -> q**(k n) a_n`` for any integer k."""
        return self._like(_qpowers(self.base, k, len(self)) * self.coeffs, self.trusted)

    def truncate(self, order: int) -> "TruncatedSeries":
        return self._like(self.coeffs[: order + 1], min(self.trusted, order))

    def trusted_coeffs(self) -> np.ndarray:
        return self.coeffs[: self.trusted + 1]

    def __call__(self, x):
        """Evaluate the polynomial formed by the stored coefficients."""
        return np.polynomial.polynomial.polyval(x, self.coeffs)

    def to_json(self) -> str:
        return json.dumps([[float(c.real), float(c.imag)] for c in self.coeffs])

    @classmethod
    def from_json(cls, text: str, base, trusted: int | None = None) -> "TruncatedSeries":
        pairs = json.loads(text)
        return cls([complex(re, im) for re, im in pairs], base, trusted)


def _qpowers(q: QBase, k: int, n: int) -> np.ndarray:
    return q.value ** (k * np.arange(n))


@dataclass(frozen=True, eq=False)
class LaurentWindow:
    """Coefficients of a bilateral series on indices ``low .. low + len - 1``.

    ``exact`` is the index range on which the stored values agree with the
    untruncated object.
    """

    coeffs: np.ndarray
    low: int
    base: QBase
    exact: tuple[int, int]

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=complex).ravel()
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "base", as_qbase(self.base))

    @property
    def high(self) -> int:
        return self.low + self.coeffs.size - 1

    def indices(self) -> np.ndarray:
        return np.arange(self.low, self.high + 1)

    def coeff(self, j: int) -> complex:
        if self.low <= j <= self.high:
            return self.coeffs[j - self.low]
        return 0j

    @classmethod
    def theta(cls, q, half_width: int) -> "LaurentWindow":
        """``theta(x)`` truncated to ``-M <= n <= M``."""
        q = as_qbase(q)
        coeffs = [q.value ** (n * (n - 1) // 2) for n in range(-half_width, half_width + 1)]
        return cls(coeffs, -half_width, q, (-half_width, half_width))

    def times_polynomial(self, s: TruncatedSeries) -> "LaurentWindow":
        """Product with the polynomial ``sum_{n<=N} s_n x^n``.

        Index j is exact when every ``j - n`` (0 <= n <= N) is exact here.
        """
        coeffs = np.convolve(self.coeffs, s.coeffs)
        lo, hi = self.exact
        return LaurentWindow(coeffs, self.low, self.base, (lo + s.order, hi))

    def shift(self, m: int) -> "LaurentWindow":
        lo, hi = self.exact
        return LaurentWindow(self.coeffs, self.low + m, self.base, (lo + m, hi + m))

    def apply(self, op: QOperator) -> "LaurentWindow":
        """Coefficient action: term (c, m, l) sends ``d_j`` to ``c q^(l j) d_j`` at index ``j + m``."""
        out, low, _ = _laurent_terms(self, op)
        lo, hi = self.exact
        exact = (lo + op.max_x_power, hi + op.min_x_power)
        return LaurentWindow(sum(out), low, self.base, exact)


def _laurent_terms(w: LaurentWindow, op: QOperator):
    """Per-term contributions of ``op`` applied to ``w`` on a common index range."""
    low = w.low + op.min_x_power
    high = w.high + op.max_x_power
    idx = w.indices()
    out = []
    for c, m, l in op.terms:
        arr = np.zeros(high - low + 1, dtype=complex)
        start = w.low + m - low
        arr[start: start + idx.size] = c * w.base.value ** (l * idx) * w.coeffs
        out.append(arr)
    return out, low, high


# --------------------------------------------------------------------------- #
# Operators on truncated series
# --------------------------------------------------------------------------- #

def _operator_terms(op: QOperator, s: TruncatedSeries) -> list[np.ndarray]:
    if op.min_x_power < 0:
        raise ShapeError("negative x powers do not act on power series")
    size = len(s) + op.max_x_power
    out = []
    for c, m, l in op.terms:
        arr = np.zeros(size, dtype=complex)
        arr[m: m + len(s)] = c * _qpowers(s.base, l, len(s)) * s.coeffs
        out.append(arr)
    return out


def apply_operator(op: QOperator, s: TruncatedSeries) -> TruncatedSeries:
    """Apply ``sum c x^m sigma^l`` to the coefficients of ``s``.

    The result carries ``max_x_power`` extra coefficients; trust ends at
    ``s.trusted + min_x_power``.
    """
    terms = _operator_terms(op, s)
    return TruncatedSeries(sum(terms), s.base, s.trusted + op.min_x_power)


def operator_residual(op: QOperator, s: TruncatedSeries) -> float:
    """Largest trusted coefficient of ``op s`` relative to its term magnitudes."""
    terms = _operator_terms(op, s)
    total = sum(terms)
    scale = np.maximum(sum(np.abs(t) for t in terms), _TINY)
    top = s.trusted + op.min_x_power
    return float(np.max(np.abs(total[: top + 1]) / scale[: top + 1]))


# --------------------------------------------------------------------------- #
# q-Borel map
# --------------------------------------------------------------------------- #

def _borel_factors(q: QBase, n: int, sign: int) -> np.ndarray:
    k = np.arange(n)
    expo = k * (k - 1) // 2
    if sign < 0 and n > 1:
        growth = expo[-1] * -math.log(q.modulus)
        if growth > math.log(OVERFLOW_LIMIT):
            raise OverflowGuard(f"|q|^(-N(N-1)/2) exceeds {OVERFLOW_LIMIT:g} for N = {n - 1}")
    return q.value ** (sign * expo)


def q_borel(s: TruncatedSeries) -> TruncatedSeries:
    """``a_n -> a_n q**(-n(n-1)/2)``."""
    return TruncatedSeries(_borel_factors(s.base, len(s), -1) * s.coeffs, s.base, s.trusted)


def q_borel_inverse(s: TruncatedSeries) -> TruncatedSeries:
    """Formal inverse of :func:`q_borel`: ``a_n -> a_n q**(n(n-1)/2)``."""
    return TruncatedSeries(_borel_factors(s.base, len(s), 1) * s.coeffs, s.base, s.trusted)


def _relative_gap(a: TruncatedSeries, b: TruncatedSeries) -> float:
    top = min(a.trusted, b.trusted)
    x = a.coeffs[: top + 1]
    y = b.coeffs[: top + 1]
    scale = np.maximum(np.maximum(np.abs(x), np.abs(y)), _TINY)
    return float(np.max(np.abs(x - y) / scale))


def borel_operational_check(m: int, l: int, s: TruncatedSeries) -> float:
    """Compare ``B(t^m sigma^l s)`` with ``q^(-m(m-1)/2) tau^m sigma^(l-m) B(s)``.

    Returns the largest relative coefficient gap over trusted indices.
    """
    if m < 0 or l < 0:
        raise DomainError("m and l must be non-negative")
    lhs = q_borel(apply_operator(QOperator(((1, m, l),)), s))
    pre = s.base.value ** (-(m * (m - 1) // 2))
    rhs = apply_operator(QOperator(((pre, m, l - m),)), q_borel(s))
    return _relative_gap(lhs, rhs)


def borel_transform_operator(op: QOperator, q) -> QOperator:
    """Push ``op`` through the q-Borel map term by term."""
    qv = as_qbase(q).value
    return QOperator(tuple((c * qv ** (-(m * (m - 1) // 2)), m, l - m) for c, m, l in op.terms))


def derive_g_equation(op: QOperator, q) -> QOperator:
    """First-order equation for ``g = B_q f`` when ``(K t^2 sigma^2 - sigma + 1) f = 0``.

    Returns ``sigma - (1 + K q^-1 tau^2)``, i.e. ``g(q tau) = (1 + K tau^2 / q) g(tau)``;
    for ``K = -q^5`` this is ``(1 + q^2 tau)(1 - q^2 tau)``.
    """
    coeffs = {(m, l): c for c, m, l in op.terms}
    if len(op.terms) != 3 or set(coeffs) != {(2, 2), (0, 1), (0, 0)}:
        raise ShapeError(f"expected K t^2 sigma^2 - sigma + 1, got terms {op.terms}")
    lead = coeffs[(0, 1)]
    if lead == 0 or coeffs[(0, 0)] != -lead:
        raise ShapeError("sigma and identity coefficients must be opposite and nonzero")
    pushed = borel_transform_operator(op, q)
    return QOperator(tuple((c / lead, m, l) for c, m, l in pushed.terms))


# --------------------------------------------------------------------------- #
# Coefficient tables
# --------------------------------------------------------------------------- #

def aq_coefficients(q, order: int, scale: complex = 1.0) -> TruncatedSeries:
    """Coefficients of ``A_q(scale * x)``: ``q^(n^2) (-scale)^n / (q;q)_n``."""
    q = as_qbase(q)
    c = [q.value ** (n * n) * (-scale) ** n / qpochhammer_finite(q.value, q, n) for n in range(order + 1)]
    return TruncatedSeries(c, q)


def f_coefficients(q, order: int) -> TruncatedSeries:
    """Coefficients in t of ``f(t) = A_{q^2}(-q^3 t^2)``, computed from the definition."""
    q = as_qbase(q)
    q2 = q.squared()
    c = np.zeros(order + 1, dtype=complex)
    for n in range(order // 2 + 1):
        c[2 * n] = q2.value ** (n * n) * q.value ** (3 * n) / qpochhammer_finite(q2.value, q2, n)
    return TruncatedSeries(c, q)


def reciprocal_pochhammer_coefficients(z: complex, q, order: int) -> TruncatedSeries:
    """Coefficients of ``1/(z tau; q)_oo = sum z^n tau^n / (q;q)_n`` (Euler)."""
    q = as_qbase(q)
    c = [z ** n / qpochhammer_finite(q.value, q, n) for n in range(order + 1)]
    return TruncatedSeries(c, q)


def g_product_coefficients(q, order: int) -> TruncatedSeries:
    """Taylor coefficients of ``1/((-q^2 tau; q)_oo (q^2 tau; q)_oo)``."""
    q = as_qbase(q)
    return reciprocal_pochhammer_coefficients(q.q2, q, order) * reciprocal_pochhammer_coefficients(-q.q2, q, order)


def phi20_coefficients(q, order: int, argument: complex) -> TruncatedSeries:
    """Coefficients of ``2phi0(0, 0; -; q, argument * x)``, a divergent series.

    ``c_n = [(-1)^n q^(n(n-1)/2)]^(-1) argument^n / (q;q)_n``.
    """
    q = as_qbase(q)
    growth = (order * (order - 1) / 2) * -math.log(q.modulus) + order * math.log(max(abs(argument), _TINY))
    if growth > math.log(OVERFLOW_LIMIT):
        raise OverflowGuard(f"2phi0 coefficients exceed {OVERFLOW_LIMIT:g} by order {order}")
    c = [
        argument ** n / ((-1) ** n * q.value ** (n * (n - 1) // 2) * qpochhammer_finite(q.value, q, n))
        for n in range(order + 1)
    ]
    return TruncatedSeries(c, q)


def second_solution_coefficients(q, order: int) -> TruncatedSeries:
    """Coefficients ``q^(-n(n+1)/2) / (q;q)_n`` of the divergent factor h in the
    second solution ``theta(x) h(x)`` of ``(q x sigma^2 - sigma + 1) u = 0``.

    This is ``2phi0(0, 0; -; q, -x/q)``.
    """
    q = as_qbase(q)
    return phi20_coefficients(q, order, -1.0 / q.value)


# --------------------------------------------------------------------------- #
# Shearing
# --------------------------------------------------------------------------- #

def shearing_map(u: TruncatedSeries) -> TruncatedSeries:
    """``v(t) = u(t^2)`` over the base ``p = sqrt(q)`` (principal branch)."""
    c = np.zeros(2 * len(u) - 1, dtype=complex)
    c[::2] = u.coeffs
    return TruncatedSeries(c, u.base.sqrt_base(), 2 * u.trusted)


def shear_operator(op: QOperator) -> QOperator:
    """``a(x) sigma_q^l -> a(t^2) sigma_p^l``: x powers double, shift powers stay."""
    return QOperator(tuple((c, 2 * m, l) for c, m, l in op.terms))


def shearing_check(q, order: int = 15) -> dict[str, float]:
    """Formal check that shearing carries the Ramanujan-type equation to the
    t-equation solved by ``f``.

    ``u(x) = A_{q^2}(-q^3 x)`` solves ``(K x sigma_{q^2}^2 - sigma_{q^2} + 1) u = 0``
    with ``K = -q^5``; after shearing ``v(t) = u(t^2)`` must solve
    ``(K t^2 sigma_q^2 - sigma_q + 1) v = 0`` and coincide with ``f``.
    """
    q = as_qbase(q)
    k = -q.value ** 5
    u = aq_coefficients(q.squared(), order, -q.value ** 3)
    v = shearing_map(u)
    source = operator_residual(linear_k_operator(k), u)
    sheared = operator_residual(shear_operator(linear_k_operator(k)), v)
    f = f_coefficients(q, v.order)
    same_op = max(
        abs(a[0] - b[0]) for a, b in zip(sorted(shear_operator(linear_k_operator(k)).terms, key=lambda t: t[1:]),
                                         sorted(sheared_k_operator(k).terms, key=lambda t: t[1:]))
    )
    return {
        "source": source,
        "sheared": sheared,
        "matches_f": _relative_gap(v, f),
        "odd_max": float(np.max(np.abs(v.coeffs[1::2]))) if v.order > 0 else 0.0,
        "operator_gap": float(same_op),
        "base_gap": abs(v.base.value - q.value),
    }


# --------------------------------------------------------------------------- #
# Divergent second solution
# --------------------------------------------------------------------------- #

def theta_conjugate(op: QOperator, q) -> tuple[QOperator, int]:
    """Write ``op(theta h) = theta * x^shift * G(h)``; returns ``(G, shift)``.

    Uses ``theta(q^l x) = q^(-l(l-1)/2) x^(-l) theta(x)``.
    """
    qv = as_qbase(q).value
    raw = [(c * qv ** (-(l * (l - 1) // 2)), m - l, l) for c, m, l in op.terms]
    shift = min(m for _, m, _ in raw)
    return QOperator(tuple((c, m - shift, l) for c, m, l in raw)), shift


@dataclass(frozen=True)
class LaurentCheck:
    residual: float
    window: tuple[int, int]
    product: LaurentWindow
    image: LaurentWindow


def divergent_second_solution_check(q, half_width: int = 25, order: int = 12,
                                    h: TruncatedSeries | None = None,
                                    op: QOperator | None = None) -> LaurentCheck:
    """Formal check that ``theta(x) h(x)`` is annihilated by ``op``.

    ``op`` defaults to ``q x sigma^2 - sigma + 1`` and ``h`` to
    :func:`second_solution_coefficients`.  The Laurent product of the theta
    window with the truncation ``h_N`` is pushed through ``op``.  Truncating h
    leaves a remainder: the part of ``G(h_N)`` above the trusted order, where
    ``op theta = theta x^shift G``.  That remainder, multiplied back by theta,
    is subtracted before measuring; whatever is left must vanish on the exact
    window when h solves the gauged equation.  Each index is scaled by the
    magnitude of the operator terms feeding it.
    """
    q = as_qbase(q)
    if half_width < order + 5:
        raise DomainError("window half-width must be at least order + 5")
    op = op or ramanujan_operator(q)
    if h is None:
        h = second_solution_coefficients(q, order)
    if np.max(np.abs(h.coeffs)) > OVERFLOW_LIMIT:
        raise OverflowGuard("coefficients of h exceed the overflow guard")
    th = LaurentWindow.theta(q, half_width)
    prod = th.times_polynomial(h)
    parts, low, _ = _laurent_terms(prod, op)
    image = LaurentWindow(sum(parts), low, q, (prod.exact[0] + op.max_x_power, prod.exact[1] + op.min_x_power))

    gauge, shift = theta_conjugate(op, q)
    gh = apply_operator(gauge, h)
    spill = np.array(gh.coeffs)
    spill[: gh.trusted + 1] = 0
    predicted = th.times_polynomial(TruncatedSeries(spill, q)).shift(shift)

    lo = max(image.exact[0], predicted.exact[0])
    hi = min(image.exact[1], predicted.exact[1])
    scale = sum(np.abs(p) for p in parts)
    worst = 0.0
    for j in range(lo, hi + 1):
        gap = abs(image.coeff(j) - predicted.coeff(j))
        worst = max(worst, gap / max(scale[j - low], abs(predicted.coeff(j)), _TINY))
    return LaurentCheck(worst, (lo, hi), prod, image)


# --------------------------------------------------------------------------- #
# Gauge factor E(t) = 1 / theta(-q^2 t)
# --------------------------------------------------------------------------- #

def gauge_factor(t: complex, q, p: SeriesParams | None = None) -> complex:
    q = as_qbase(q)
    y = -q.q2 * complex(t)
    th = theta(y, q, p) if y != 0 else 0
    if y == 0 or theta_zero_index(y, q) is not None or abs(th) < 1e-250:
        raise DomainError(f"theta(-q^2 t) vanishes at t = {t}")
    return 1.0 / th


def gauge_lemma_check(t: complex, q, p: SeriesParams | None = None) -> tuple[float, float]:
    """Residuals of ``E(qt) = -q^2 t E(t)`` and ``E(q^2 t) = q^5 t^2 E(t)``."""
    q = as_qbase(q)
    t = complex(t)
    qv = q.value
    e0 = gauge_factor(t, q, p)
    e1 = gauge_factor(qv * t, q, p)
    e2 = gauge_factor(qv * qv * t, q, p)
    return (
        scaled_residual(e1, -qv ** 2 * t * e0),
        scaled_residual(e2, qv ** 5 * t * t * e0),
    )


def gauge_composition_residual(t: complex, q, p: SeriesParams | None = None) -> float:
    """``E(q^2 t)`` from the one-step rule applied twice versus the two-step rule."""
    q = as_qbase(q)
    t = complex(t)
    qv = q.value
    e0 = gauge_factor(t, q, p)
    twice = (-qv ** 2 * (qv * t)) * (-qv ** 2 * t * e0)
    return scaled_residual(twice, qv ** 5 * t * t * e0)
