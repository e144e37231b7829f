"""q-Laplace resummation of ``f(t) = A_{q^2}(-q^3 t^2)``.

Three independent routes to the same function: trapezoidal quadrature of
the q-Laplace contour integral of ``g = B_q f``, the sum of residues of the
integrand at the poles ``tau = +-q^(-2-k)``, and direct summation of the
Ramanujan series.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceError, DomainError, PoleError, TruncationExhausted
from .formal import TruncatedSeries, q_borel
from .qcore import (
    HypergeometricSpec,
    SeriesParams,
    _params,
    as_qbase,
    lattice_exponent,
    qpochhammer_finite,
    qpochhammer_infinite,
    qpochhammer_infinite_array,
    qpochhammer_multi,
    rphi_s_sum,
    scaled_residual,
    theta,
    theta_array,
)
from .special import ramanujan_Aq_sum


@dataclass(frozen=True)
class ContourConfig:
    """Circle ``|tau| = radius`` sampled at ``nodes`` equispaced points."""

    radius: float
    nodes: int = 512

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainError(f"contour radius must be positive, got {self.radius}")
        if self.nodes < 64 or self.nodes % 2:
            raise DomainError(f"contour needs an even node count >= 64, got {self.nodes}")

    @classmethod
    def default(cls, q, nodes: int = 512) -> "ContourConfig":
        """Halfway between the origin and the first poles ``+-q^-2``."""
        return cls(0.5 * as_qbase(q).pole_radius, nodes)

    def check(self, q) -> None:
        if not self.radius < as_qbase(q).pole_radius:
            raise DomainError(
                f"contour radius {self.radius} must stay inside the poles at |tau| = {as_qbase(q).pole_radius}"
            )


def _pole_index(tau: complex, q, tol: float = 1e-12) -> int | None:
    """Return k if ``tau = +-q^(-2-k)``."""
    for sign in (1, -1):
        m = lattice_exponent(sign * tau, q, tol)
        if m is not None and m <= -2:
            return -2 - m
    return None


def g_eval(tau: complex, q, p: SeriesParams | None = None) -> complex:
    """``g(tau) = 1 / ((-q^2 tau; q)_oo (q^2 tau; q)_oo)``."""
    q = as_qbase(q)
    tau = complex(tau)
    if tau != 0 and _pole_index(tau, q) is not None:
        raise PoleError(f"g has a pole at tau = {tau}")
    return 1.0 / qpochhammer_multi((-q.q2 * tau, q.q2 * tau), q, p)


def g_eval_array(tau, q, p: SeriesParams | None = None) -> np.ndarray:
    q = as_qbase(q)
    tau = np.asarray(tau, dtype=complex)
    return 1.0 / (qpochhammer_infinite_array(-q.q2 * tau, q, p) * qpochhammer_infinite_array(q.q2 * tau, q, p))


def g_functional_residual(tau: complex, q, p: SeriesParams | None = None) -> float:
    """Residual of ``g(q tau) = (1 + q^2 tau)(1 - q^2 tau) g(tau)``."""
    q = as_qbase(q)
    qv = q.value
    rhs = (1 + qv * qv * tau) * (1 - qv * qv * tau) * g_eval(tau, q, p)
    return scaled_residual(g_eval(qv * tau, q, p), rhs)


class ContourResult(NamedTuple):
    value: complex
    est_err: float  # |I_M - I_{M/2}|, the half-node rule reusing every other node
    magnitude: float  # mean |integrand|, the quadrature's rounding scale


def _theta_inverted(y: np.ndarray, q, p) -> np.ndarray:
    """theta(y), switching to ``y theta(1/y)`` where ``|y| > 1``."""
    big = np.abs(y) > 1
    out = np.empty_like(y)
    if np.any(~big):
        out[~big] = theta_array(y[~big], q, p)
    if np.any(big):
        out[big] = y[big] * theta_array(1.0 / y[big], q, p)
    return out


def q_laplace(g: Callable[[np.ndarray], np.ndarray], t: complex, q, config: ContourConfig | None = None,
              p: SeriesParams | None = None) -> ContourResult:
    """``(1/2 pi i) \\oint_{|tau|=r} g(tau) theta(t/tau) dtau/tau`` by the trapezoidal rule.

    ``g`` is evaluated on an array of nodes.  The rule is spectrally accurate
    for this periodic analytic integrand.
    """
    q = as_qbase(q)
    t = complex(t)
    if t == 0:
        raise DomainError("the q-Laplace transform is evaluated at t != 0")
    config = config or ContourConfig.default(q)
    config.check(q)
    phase = np.exp(2j * np.pi * np.arange(config.nodes) / config.nodes)
    tau = config.radius * phase
    vals = g(tau) * _theta_inverted(t / tau, q, p)
    full = vals.mean()
    half = vals[::2].mean()
    return ContourResult(complex(full), float(abs(full - half)), float(np.abs(vals).mean()))


def q_laplace_contour(t: complex, q, config: ContourConfig | None = None,
                      p: SeriesParams | None = None) -> ContourResult:
    """q-Laplace transform of ``g``, which reproduces ``f(t)``."""
    return q_laplace(lambda tau: g_eval_array(tau, q, p), t, q, config, p)


def flattest_radius(g: Callable[[np.ndarray], np.ndarray], t: complex, q, lowest: float,
                    p: SeriesParams | None = None, candidates: int = 60, probe: int = 64) -> float:
    """Radius in ``[lowest, 0.99 / |q|^2]`` where ``max |g(tau) theta(t/tau)|`` is smallest.

    For entire ``g`` the integral does not depend on the radius, but its
    rounding error is proportional to the largest integrand value, so the
    flattest circle gives the most accurate trapezoidal sum.
    """
    q = as_qbase(q)
    phase = np.exp(2j * np.pi * np.arange(probe) / probe)
    best, best_r = math.inf, None
    for r in np.geomspace(lowest, 0.99 * q.pole_radius, candidates):
        tau = r * phase
        with np.errstate(over="ignore", invalid="ignore"):
            peak = float(np.max(np.abs(g(tau) * _theta_inverted(complex(t) / tau, q, p))))
        if math.isfinite(peak) and peak < best:
            best, best_r = peak, float(r)
    if best_r is None:
        raise ConvergenceError(f"no contour radius keeps the integrand finite at t={t}")
    return best_r


def laplace_of_borel(poly: TruncatedSeries, t: complex, config: ContourConfig | None = None,
                     p: SeriesParams | None = None, nodes: int = 512) -> ContourResult:
    """``L_q(B_q P)(t)`` for a polynomial ``P``; equals ``P(t)``.

    ``B_q P`` is entire, so without an explicit ``config`` the circle is the
    flattest one inside ``|tau| < 1/|q|^2`` (see :func:`flattest_radius`).
    The fixed radius used for ``g`` is badly conditioned here: Borel
    coefficients grow like ``|q|^(-n(n-1)/2)`` and the trapezoidal sum then
    cancels many digits.
    """
    q = poly.base
    g = q_borel(poly)
    if config is None:
        lowest = min(1e-3, abs(complex(t)) * q.modulus ** (poly.order + 1))
        config = ContourConfig(flattest_radius(g, t, q, lowest, p), nodes)
    return q_laplace(g, t, q, config, p)


def f_direct(t: complex, q, p: SeriesParams | None = None) -> complex:
    """``f(t) = A_{q^2}(-q^3 t^2)`` by direct summation."""
    q = as_qbase(q)
    t = complex(t)
    return ramanujan_Aq_sum(-q.value ** 3 * t * t, q.squared(), p).value


# --------------------------------------------------------------------------- #
# Residues
# --------------------------------------------------------------------------- #

def simple_pole_residue(k: int, q, p: SeriesParams | None = None) -> complex:
    """``Res{1/((tau/lam; q)_oo tau); tau = lam q^-k} = (-1)^(k+1) q^(k(k+1)/2) / ((q;q)_k (q;q)_oo)``.

    Independent of ``lam``.
    """
    q = as_qbase(q)
    qv = q.value
    return (-1) ** (k + 1) * qv ** (k * (k + 1) // 2) / (
        qpochhammer_finite(qv, q, k) * qpochhammer_infinite(qv, q, p)
    )


def shifted_reciprocal(lam: complex, k: int, q, p: SeriesParams | None = None) -> complex:
    """``1/(lam q^-k; q)_oo = (-lam)^-k q^(k(k+1)/2) / ((lam; q)_oo (q/lam; q)_k)``, lam not in q^Z."""
    q = as_qbase(q)
    lam = complex(lam)
    if lam == 0 or lattice_exponent(lam, q) is not None:
        raise DomainError(f"lam = {lam} must avoid q^Z")
    qv = q.value
    return (-lam) ** (-k) * qv ** (k * (k + 1) // 2) / (
        qpochhammer_infinite(lam, q, p) * qpochhammer_finite(qv / lam, q, k)
    )


def contour_residue(func: Callable[[np.ndarray], np.ndarray], center: complex, radius: float,
                    nodes: int = 256) -> complex:
    """``(1/2 pi i) \\oint func`` on a small circle, by the trapezoidal rule."""
    offs = radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    return complex(np.mean(func(center + offs) * offs))


def residue_at_pole(sign: int, k: int, t: complex, q, p: SeriesParams | None = None) -> complex:
    """``-Res{g(tau) theta(t/tau) / tau; tau = sign q^(-2-k)}``.

    The pole comes from the factor ``(tau/lam; q)_oo`` with ``lam = sign q^-2``
    (first residue rule); the other factor of g is ``1/(-q^-k; q)_oo`` there
    (second rule with ``lam = -1``).
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    q = as_qbase(q)
    t = complex(t)
    if t == 0:
        raise DomainError("t must be nonzero")
    tau = sign * q.value ** (-2 - k)
    vanishing = simple_pole_residue(k, q, p)
    spectator = shifted_reciprocal(-1.0, k, q, p)
    return -vanishing * spectator * theta(t / tau, q, p)


@dataclass
class ResidueTermLedger:
    """Per-pole contributions to ``f(t)`` in summation order (increasing k, then sign)."""

    k_max: int
    terms: list = field(default_factory=list)  # (tau, residue) pairs
    total: complex = 0j
    closed_form: complex = 0j
    mismatch: float = 0.0

    def magnitude(self) -> float:
        return float(sum(abs(r) for _, r in self.terms))

    def to_dict(self) -> dict:
        pair = lambda z: [float(z.real), float(z.imag)]  # noqa: E731
        return {
            "poles": [{"tau": pair(tau), "residue": pair(res)} for tau, res in self.terms],
            "sum": pair(self.total),
            "closed_form": pair(self.closed_form),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def residue_closed_form(t: complex, q, p: SeriesParams | None = None) -> tuple[complex, float]:
    """``[theta(q^2 t) 1phi1(0;-q;q,1/t) + theta(-q^2 t) 1phi1(0;-q;q,-1/t)] / (q,-1;q)_oo``."""
    q = as_qbase(q)
    t = complex(t)
    qv = q.value
    spec = HypergeometricSpec((0,), (-qv,), q)
    const = qpochhammer_multi((qv, -1.0), q, p)
    value = 0j
    mag = 0.0
    for s in (1, -1):
        th = theta(s * qv * qv * t, q, p)
        ser = rphi_s_sum(spec, s / t, p)
        value += th * ser.value
        mag += abs(th) * ser.magnitude
    return value / const, mag / abs(const)


def residue_sum_f(t: complex, q, p: SeriesParams | None = None, k_max: int = 60,
                  match_tol: float = 1e-8) -> tuple[complex, ResidueTermLedger]:
    """Sum residues pole by pole; cross-checked against the two-term closed form.

    Raises :class:`TruncationExhausted` if the terms have not died out by
    ``k_max`` and :class:`ConvergenceError` if the sum and closed form differ
    by more than ``match_tol`` (scaled by term magnitudes).
    """
    p = _params(p)
    q = as_qbase(q)
    t = complex(t)
    ledger = ResidueTermLedger(k_max)
    total = 0j
    peak = 0.0
    run = 0
    for k in range(k_max + 1):
        step = 0.0
        for sign in (1, -1):
            res = residue_at_pole(sign, k, t, q, p)
            ledger.terms.append((sign * q.value ** (-2 - k), res))
            total += res
            step = max(step, abs(res))
        peak = max(peak, step, abs(total))
        if step < p.rel_tol * peak:
            run += 1
            if run >= p.stop_run:
                break
        else:
            run = 0
    else:
        raise TruncationExhausted(f"residue sum at t={t} not converged by k = {k_max}")
    closed, cmag = residue_closed_form(t, q, p)
    ledger.total = total
    ledger.closed_form = closed
    ledger.mismatch = scaled_residual(total, closed, ledger.magnitude(), cmag)
    if ledger.mismatch > match_tol:
        raise ConvergenceError(f"residue sum and closed form disagree by {ledger.mismatch:.3g} at t={t}")
    return total, ledger
