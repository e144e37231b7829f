"""Named q-special functions and the identities relating them.

Ramanujan's function ``A_q``, the q-Airy function ``Ai_q``, the three
q-Bessel functions, Watson's two-term connection formula for ``2phi1`` and
the connection formula between ``A_{q^2}`` and ``Ai_q``.  Identities are
exposed as scaled residuals so they can be swept over parameter grids.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Callable

from .errors import BranchError, ConvergenceError, DomainError
from .operators import QOperator, qairy_operator, ramanujan_operator
from .qcore import (
    HypergeometricSpec,
    SeriesParams,
    SeriesSum,
    as_qbase,
    lattice_exponent,
    qpochhammer_infinite,
    qpochhammer_multi,
    rphi_s_sum,
    scaled_residual,
    sum_series,
    theta,
)

QDiffOperatorSpec = QOperator

# Theta prefactors below this magnitude are treated as exact zeros.
THETA_ZERO = 1e-250


def ramanujan_Aq_sum(x: complex, q, p: SeriesParams | None = None) -> SeriesSum:
    qv = as_qbase(q).value
    return sum_series(lambda n: -qv ** (2 * n - 1) / (1.0 - qv ** n), x, p)


def ramanujan_Aq(x: complex, q, p: SeriesParams | None = None) -> complex:
    """Ramanujan's function ``A_q(x) = sum_n q**(n^2) (-x)**n / (q;q)_n``."""
    return ramanujan_Aq_sum(x, q, p).value


def qairy_Aiq_sum(x: complex, q, p: SeriesParams | None = None) -> SeriesSum:
    qv = as_qbase(q).value

    def ratio(n):
        qn = qv ** n
        return qv ** (n - 1) / ((1.0 + qn) * (1.0 - qn))

    return sum_series(ratio, x, p)


def qairy_Aiq(x: complex, q, p: SeriesParams | None = None) -> complex:
    """q-Airy function ``Ai_q(x) = sum_n q**(n(n-1)/2) x**n / (-q, q; q)_n``."""
    return qairy_Aiq_sum(x, q, p).value


def qairy_second_solution(x: complex, q, p: SeriesParams | None = None) -> complex:
    """``theta(-x)/theta(x) * Ai_q(-x)``, a second solution of the q-Airy equation.

    The theta ratio stands in for ``exp(pi i log x / log q)``; both satisfy
    ``u(q x) = -u(x)``.
    """
    return theta(-x, q, p) / theta(x, q, p) * qairy_Aiq(-x, q, p)


def qdiff_residual(op: QOperator, u: Callable, x: complex, q) -> float:
    """``|sum of terms| / max |term|`` for ``op`` applied to ``u`` at ``x``.

    ``u`` may return a plain number or a :class:`SeriesSum`; for the latter the
    summed term magnitude of each evaluation is folded into the scale.
    """
    qv = as_qbase(q).value
    total = 0j
    scale = 1e-300
    for c, m, l in op.terms:
        val = u(qv ** l * x)
        weight = abs(c * x ** m)
        if isinstance(val, SeriesSum):
            scale = max(scale, weight * val.magnitude)
            val = val.value
        term = c * x ** m * val
        total += term
        scale = max(scale, abs(term))
    return abs(total) / scale


def eq3_residual(x: complex, q, p: SeriesParams | None = None) -> float:
    """Residual of ``A_q`` in ``(q x sigma^2 - sigma + 1) u = 0``."""
    return qdiff_residual(ramanujan_operator(q), lambda y: ramanujan_Aq_sum(y, q, p), x, q)


def eq4_residual(x: complex, q, p: SeriesParams | None = None) -> float:
    """Residual of ``Ai_q`` in ``(sigma^2 + x sigma - 1) u = 0``."""
    return qdiff_residual(qairy_operator(q), lambda y: qairy_Aiq_sum(y, q, p), x, q)


# --------------------------------------------------------------------------- #
# q-Bessel functions
# --------------------------------------------------------------------------- #

GENERIC = "generic"
QNU_MINUS_ONE = "qnu_equals_minus_one"


@dataclass(frozen=True)
class BesselOrder:
    """Order ``nu``.  With ``mode=QNU_MINUS_ONE`` the symbol ``q**nu`` is
    replaced by ``-1`` and the power ``x**nu`` is left out of the result."""

    nu: complex = 0.0
    mode: str = GENERIC

    def __post_init__(self):
        if self.mode not in (GENERIC, QNU_MINUS_ONE):
            raise DomainError(f"unknown Bessel order mode {self.mode!r}")
        object.__setattr__(self, "nu", complex(self.nu))


def _is_integer(z: complex) -> bool:
    return z.imag == 0 and float(z.real).is_integer()


def _principal_power(base: complex, nu: complex) -> complex:
    if base == 0:
        if nu == 0:
            return 1.0 + 0j
        if nu.real > 0:
            return 0j
        raise DomainError(f"0**{nu} is undefined")
    if _is_integer(nu):
        return base ** int(nu.real)
    if base.imag == 0 and base.real < 0:
        raise BranchError(f"x = {base} lies on the branch cut of x**nu for nu = {nu}")
    return cmath.exp(nu * cmath.log(base))


def _bessel_parts(kind: int, order: BesselOrder, x: complex, q, p, with_power: bool = True) -> tuple[complex, complex, SeriesSum]:
    """Return ``(prefactor, power, series)`` with ``J = prefactor * power * series``."""
    q = as_qbase(q)
    x = complex(x)
    if kind not in (1, 2, 3):
        raise DomainError(f"q-Bessel kind must be 1, 2 or 3, got {kind}")
    power = 1.0 + 0j
    if order.mode == QNU_MINUS_ONE:
        a = -q.value
    else:
        a = cmath.exp((order.nu + 1) * cmath.log(q.value))
        if with_power:
            power = _principal_power(x / 2 if kind in (1, 2) else x, order.nu)
    pref = qpochhammer_infinite(a, q, p) / qpochhammer_infinite(q.value, q, p)
    x2 = x * x
    if kind == 1:
        if abs(x2 / 4) >= 1:
            raise ConvergenceError(f"J1 series needs |x^2/4| < 1, got {abs(x2 / 4)}")
        series = rphi_s_sum(HypergeometricSpec((0, 0), (a,), q), -x2 / 4, p)
    elif kind == 2:
        series = rphi_s_sum(HypergeometricSpec((), (a,), q), -a * x2 / 4, p)
    else:
        series = rphi_s_sum(HypergeometricSpec((0,), (a,), q), q.value * x2, p)
    return pref, power, series


def qbessel(kind: int, order: BesselOrder, x: complex, q, p: SeriesParams | None = None) -> complex:
    """Jackson's first (kind 1), second (kind 2) and Hahn-Exton (kind 3) q-Bessel functions.

    ``J1 = (q^{nu+1};q)_oo/(q;q)_oo (x/2)^nu sum (-x^2/4)^n / (q, q^{nu+1}; q)_n``
    ``J2 = ... (x/2)^nu sum q^{n(n+nu)} (-x^2/4)^n / (q, q^{nu+1}; q)_n``
    ``J3 = ... x^nu sum q^{n(n+1)/2} (-x^2)^n / (q, q^{nu+1}; q)_n``
    """
    pref, power, series = _bessel_parts(kind, order, x, q, p)
    return pref * power * series.value


def hahn_residual(order: BesselOrder, x: complex, q, p: SeriesParams | None = None) -> float:
    """Residual of ``J2(x) = (-x^2/4; q)_oo J1(x)``; the common power of x is dropped."""
    pref2, _, s2 = _bessel_parts(2, order, x, q, p, with_power=False)
    pref1, _, s1 = _bessel_parts(1, order, x, q, p, with_power=False)
    factor = qpochhammer_infinite(-complex(x) ** 2 / 4, q, p)
    lhs = pref2 * s2.value
    rhs = factor * pref1 * s1.value
    return scaled_residual(lhs, rhs, abs(pref2) * s2.magnitude, abs(factor * pref1) * s1.magnitude)


def hahn_exton_residual(x: complex, q, p: SeriesParams | None = None, order: BesselOrder | None = None) -> float:
    """Residual of ``J3(x) = (-q;q)_oo/(q;q)_oo x^nu Ai_q(-q x^2)`` when ``q^nu = -1``.

    The default order uses the symbolic substitution and cancels ``x^nu``;
    a generic order with ``q**nu == -1`` keeps the power on both sides.
    """
    q = as_qbase(q)
    order = order or BesselOrder(0, QNU_MINUS_ONE)
    x = complex(x)
    pref, power, series = _bessel_parts(3, order, x, q, p)
    lhs = pref * power * series.value
    ai = qairy_Aiq_sum(-q.value * x * x, q, p)
    const = qpochhammer_infinite(-q.value, q, p) / qpochhammer_infinite(q.value, q, p)
    rhs = const * power * ai.value
    return scaled_residual(
        lhs, rhs, abs(pref * power) * series.magnitude, abs(const * power) * ai.magnitude
    )


# --------------------------------------------------------------------------- #
# Watson's connection formula
# --------------------------------------------------------------------------- #

def _check_not_lattice(name: str, z: complex, q):
    m = lattice_exponent(z, q)
    if m is not None and m <= 0:
        raise DomainError(f"{name} = {z} lies on q^m, m = {m}: a Pochhammer denominator vanishes")


def watson_sides(a, b, c, x, q, p: SeriesParams | None = None) -> tuple[complex, complex, float]:
    """Evaluate both sides of Watson's formula; returns ``(lhs, rhs, magnitude)``."""
    q = as_qbase(q)
    a, b, c, x = complex(a), complex(b), complex(c), complex(x)
    if a == 0 or b == 0 or c == 0 or x == 0:
        raise DomainError("Watson's formula needs a, b, c, x all nonzero")
    qv = q.value
    for name, z in (("a/b", a / b), ("b/a", b / a), ("c", c), ("x", x), ("q/x", qv / x)):
        _check_not_lattice(name, z, q)
    if abs(x) >= 1:
        raise ConvergenceError(f"left side needs |x| < 1, got {abs(x)}")
    z = c * qv / (a * b * x)
    if abs(z) >= 1:
        raise ConvergenceError(f"right side needs |cq/(abx)| < 1, got {abs(z)}")

    lhs = rphi_s_sum(HypergeometricSpec((a, b), (c,), q), x, p)
    den = qpochhammer_multi((c, x, qv / x), q, p)
    pre1 = qpochhammer_multi((b, c / a, a * x, qv / (a * x)), q, p) / (den * qpochhammer_infinite(b / a, q, p))
    pre2 = qpochhammer_multi((a, c / b, b * x, qv / (b * x)), q, p) / (den * qpochhammer_infinite(a / b, q, p))
    s1 = rphi_s_sum(HypergeometricSpec((a, a * qv / c), (a * qv / b,), q), z, p)
    s2 = rphi_s_sum(HypergeometricSpec((b, b * qv / c), (b * qv / a,), q), z, p)
    rhs = pre1 * s1.value + pre2 * s2.value
    mag = max(lhs.magnitude, abs(pre1) * s1.magnitude + abs(pre2) * s2.magnitude)
    return lhs.value, rhs, mag


def watson_residual(a, b, c, x, q, p: SeriesParams | None = None) -> float:
    """Scaled residual of Watson's two-term formula for ``2phi1(a, b; c; q, x)``."""
    lhs, rhs, mag = watson_sides(a, b, c, x, q, p)
    return scaled_residual(lhs, rhs, mag)


# --------------------------------------------------------------------------- #
# Connection formula between A_{q^2} and Ai_q
# --------------------------------------------------------------------------- #

def connection_sides(x: complex, q, p: SeriesParams | None = None) -> tuple[complex, complex, float]:
    """Both sides of

    ``A_{q^2}(-q^3/x^2) = {theta(x/q) Ai_q(-x) + theta(-x/q) Ai_q(x)} / (q, -1; q)_oo``

    returned as ``(lhs, rhs, magnitude)`` where ``magnitude`` is the larger
    summed term size of the two sides.
    """
    q = as_qbase(q)
    x = complex(x)
    if x == 0:
        raise DomainError("the connection formula is stated for x != 0")
    qv = q.value
    lhs = ramanujan_Aq_sum(-qv ** 3 / (x * x), q.squared(), p)
    th_plus = theta(x / qv, q, p)
    th_minus = theta(-x / qv, q, p)
    const = qpochhammer_multi((qv, -1.0), q, p)
    rhs = 0j
    rmag = 0.0
    for th, arg in ((th_plus, -x), (th_minus, x)):
        if abs(th) < THETA_ZERO:
            continue
        ai = qairy_Aiq_sum(arg, q, p)
        rhs += th * ai.value
        rmag += abs(th) * ai.magnitude
    rhs /= const
    rmag /= abs(const)
    return lhs.value, rhs, max(lhs.magnitude, rmag)


def connection_residual(x: complex, q, p: SeriesParams | None = None) -> float:
    """Scaled residual of the connection formula at ``x``."""
    lhs, rhs, mag = connection_sides(x, q, p)
    return scaled_residual(lhs, rhs, mag)
