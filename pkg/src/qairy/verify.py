"""Identity-verification suites over seeded random grids.

Each suite evaluates one family of identities at sampled points and returns
per-point records; :func:`run_suite` wraps them into a :class:`Report`.
Records are deterministic functions of the :class:`RunConfig`, so equal
configurations give byte-identical serialized reports.
"""
from __future__ import annotations

import cmath
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError
from .formal import (
    TruncatedSeries,
    borel_operational_check,
    derive_g_equation,
    divergent_second_solution_check,
    f_coefficients,
    gauge_composition_residual,
    gauge_factor,
    operator_residual,
    q_borel,
    shearing_check,
)
from .operators import laplace_side_operator, qairy_operator, ramanujan_operator
from .qcore import (
    QBase,
    SeriesParams,
    as_qbase,
    lattice_exponent,
    psi_check,
    qpochhammer_infinite,
    scaled_residual,
    sign_flip_ratio,
    theta_product,
    theta_series_sum,
)
from .resum import ContourConfig, f_direct, g_eval, laplace_of_borel, q_laplace_contour, residue_sum_f
from .special import (
    QNU_MINUS_ONE,
    BesselOrder,
    connection_sides,
    hahn_exton_residual,
    hahn_residual,
    qairy_Aiq_sum,
    qairy_second_solution,
    qbessel,
    qdiff_residual,
    ramanujan_Aq_sum,
    watson_sides,
)

log = logging.getLogger(__name__)

SAMPLE_LOW = 0.05
SAMPLE_HIGH = 10.0
LATTICE_CLEARANCE = 1e-6


@dataclass(frozen=True)
class RunConfig:
    q: complex = 0.5
    trunc: int = 1000
    tol: float = 1e-16
    seed: int = 0
    format: str = "json"
    points: int = 100
    radius: float | None = None
    nodes: int = 512

    def __post_init__(self):
        as_qbase(self.q)
        if self.format not in ("json", "csv"):
            raise DomainError(f"unknown format {self.format!r}")
        if self.points < 1:
            raise DomainError("points must be positive")

    @property
    def params(self) -> SeriesParams:
        return SeriesParams(max_terms=self.trunc, rel_tol=self.tol)

    @property
    def base(self) -> QBase:
        return as_qbase(self.q)

    def contour(self) -> ContourConfig:
        if self.radius is None:
            return ContourConfig.default(self.q, self.nodes)
        return ContourConfig(self.radius, self.nodes)


class Record(NamedTuple):
    x: complex
    lhs: complex
    rhs: complex
    residual: float
    tag: str = ""


@dataclass
class Report:
    suite: str
    q: complex
    threshold: float
    records: list
    resampled: int = 0
    elapsed: float = 0.0
    passed: bool = field(init=False)
    max_residual: float = field(init=False)

    def __post_init__(self):
        self.records = sorted(self.records, key=lambda r: -_sort_key(r.residual))
        worst = self.records[0].residual if self.records else 0.0
        self.max_residual = worst
        self.passed = bool(math.isfinite(worst) and worst <= self.threshold)

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "suite": self.suite,
            "q": _pair(self.q),
            "pass": self.passed,
            "threshold": self.threshold,
            "max_residual": self.max_residual,
            "resampled": self.resampled,
            "records": [
                {"x": _pair(r.x), "lhs": _pair(r.lhs), "rhs": _pair(r.rhs), "residual": r.residual, "tag": r.tag}
                for r in self.records
            ],
        }
        if timing:
            out["elapsed"] = self.elapsed
        return out

    def to_json(self, timing: bool = False) -> str:
        return dumps(self.to_dict(timing))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x_re,x_im,lhs_re,lhs_im,rhs_re,rhs_im,residual,tag\n")
        for r in self.records:
            cells = [*_pair(r.x), *_pair(r.lhs), *_pair(r.rhs), r.residual]
            buf.write(",".join(format_number(c) for c in cells) + f",{r.tag}\n")
        return buf.getvalue()


def _sort_key(v: float) -> float:
    return math.inf if math.isnan(v) else v


def _pair(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def format_number(v) -> str:
    """17 significant digits; non-finite values become ``null``."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    v = float(v)
    if not math.isfinite(v):
        return "null"
    return "%.17g" % v


def dumps(obj) -> str:
    """Compact JSON with floats at 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (bool, int, float, np.floating, np.integer)):
        return format_number(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(f"{dumps(str(k))}:{dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# --------------------------------------------------------------------------- #
# Sampling
# --------------------------------------------------------------------------- #

class Sampler:
    """Log-uniform modulus, uniform phase; points near ``+-q^Z`` are redrawn."""

    def __init__(self, seed: int, q):
        self.rng = np.random.default_rng(seed)
        self.q = as_qbase(q)
        self.resampled = 0

    def _near_lattice(self, z: complex) -> bool:
        return any(lattice_exponent(s * z, self.q, LATTICE_CLEARANCE) is not None for s in (1, -1))

    def point(self, low: float = SAMPLE_LOW, high: float = SAMPLE_HIGH) -> complex:
        while True:
            r = math.exp(self.rng.uniform(math.log(low), math.log(high)))
            z = r * cmath.exp(1j * self.rng.uniform(0.0, 2 * math.pi))
            if not self._near_lattice(z):
                return z
            self.resampled += 1

    def points(self, n: int, low: float = SAMPLE_LOW, high: float = SAMPLE_HIGH) -> list[complex]:
        return [self.point(low, high) for _ in range(n)]


# --------------------------------------------------------------------------- #
# Suites
# --------------------------------------------------------------------------- #

def _triple_product(cfg: RunConfig, s: Sampler) -> list[Record]:
    out = []
    for x in s.points(cfg.points, high=20.0):
        series, mag = theta_series_sum(x, cfg.q, cfg.params)
        prod = theta_product(x, cfg.q, cfg.params)
        out.append(Record(x, series, prod, scaled_residual(series, prod, mag)))
    return out


def _theta_shift(cfg: RunConfig, s: Sampler) -> list[Record]:
    qv, p = cfg.base.value, cfg.params
    out = []
    for x in s.points(cfg.points):
        th, tmag = theta_series_sum(x, cfg.q, p)
        for k in range(-5, 6):
            lhs, lmag = theta_series_sum(qv ** k * x, cfg.q, p)
            factor = qv ** (-k * (k - 1) // 2) * x ** (-k)
            rhs = factor * th
            out.append(Record(x, lhs, rhs, scaled_residual(lhs, rhs, lmag, abs(factor) * tmag), f"k={k}"))
    return out


def _inversion(cfg: RunConfig, s: Sampler) -> list[Record]:
    out = []
    for x in s.points(cfg.points):
        inv, imag = theta_series_sum(1 / x, cfg.q, cfg.params)
        th, tmag = theta_series_sum(x, cfg.q, cfg.params)
        out.append(Record(x, x * inv, th, scaled_residual(x * inv, th, abs(x) * imag, tmag)))
    return out


def _sign_flip(cfg: RunConfig, s: Sampler) -> list[Record]:
    out = []
    for x in s.points(cfg.points):
        lam = s.point(0.5, 2.0)
        if s._near_lattice(lam * x) or s._near_lattice(cfg.base.value * lam * x):
            s.resampled += 1
            continue
        lhs = sign_flip_ratio(cfg.base.value * x, lam, cfg.q, cfg.params)
        rhs = -sign_flip_ratio(x, lam, cfg.q, cfg.params)
        out.append(Record(x, lhs, rhs, scaled_residual(lhs, rhs), f"lambda={lam:.6g}"))
    return out


def _operator_record(op, u, x, q, tag="") -> Record:
    qv = as_qbase(q).value
    total = 0j
    for c, m, l in op.terms:
        val = u(qv ** l * x)
        total += c * x ** m * (val.value if hasattr(val, "value") else val)
    return Record(x, total, 0j, qdiff_residual(op, u, x, q), tag)


def _eq3(cfg: RunConfig, s: Sampler) -> list[Record]:
    op = ramanujan_operator(cfg.q)
    u = lambda y: ramanujan_Aq_sum(y, cfg.q, cfg.params)  # noqa: E731
    return [_operator_record(op, u, x, cfg.q) for x in s.points(cfg.points)]


def _eq4(cfg: RunConfig, s: Sampler) -> list[Record]:
    op = qairy_operator(cfg.q)
    u = lambda y: qairy_Aiq_sum(y, cfg.q, cfg.params)  # noqa: E731
    v = lambda y: qairy_second_solution(y, cfg.q, cfg.params)  # noqa: E731
    out = []
    for x in s.points(cfg.points):
        out.append(_operator_record(op, u, x, cfg.q, "Ai_q"))
        if not any(s._near_lattice(cfg.base.value ** l * x) for l in (1, 2)):
            out.append(_operator_record(op, v, x, cfg.q, "second"))
    return out


HAHN_ORDERS = (0.0, 0.5, 1.0, 2.3)


def _hahn(cfg: RunConfig, s: Sampler) -> list[Record]:
    out = []
    for x in s.points(cfg.points, high=1.0):
        for nu in HAHN_ORDERS:
            order = BesselOrder(nu)
            j2 = qbessel(2, order, x, cfg.q, cfg.params)
            j1 = qbessel(1, order, x, cfg.q, cfg.params)
            factor = qpochhammer_infinite(-x * x / 4, cfg.q, cfg.params)
            out.append(Record(x, j2, factor * j1, hahn_residual(order, x, cfg.q, cfg.params), f"nu={nu}"))
    return out


def _oyama(cfg: RunConfig, s: Sampler) -> list[Record]:
    q = cfg.base
    nu = 1j * math.pi / cmath.log(q.value)
    orders = (("symbolic", BesselOrder(0, QNU_MINUS_ONE)), ("generic", BesselOrder(nu)))
    const = qpochhammer_infinite(-q.value, q, cfg.params) / qpochhammer_infinite(q.value, q, cfg.params)
    out = []
    for x in s.points(cfg.points, high=3.0):
        for tag, order in orders:
            j3 = qbessel(3, order, x, q, cfg.params)
            power = 1.0 if order.mode == QNU_MINUS_ONE else x ** order.nu
            rhs = const * power * qairy_Aiq_sum(-q.value * x * x, q, cfg.params).value
            out.append(Record(x, j3, rhs, hahn_exton_residual(x, q, cfg.params, order), tag))
    return out


def _watson(cfg: RunConfig, s: Sampler) -> list[Record]:
    qv = cfg.base.value
    out = []
    while len(out) < cfg.points:
        a, b, c = s.point(0.3, 3.0), s.point(0.3, 3.0), s.point(0.05, 1.0)
        low = max(1.25 * abs(c * qv / (a * b)), 0.02)
        if low >= 0.8:
            s.resampled += 1
            continue
        x = s.point(low, 0.8)
        lhs, rhs, mag = watson_sides(a, b, c, x, cfg.q, cfg.params)
        out.append(Record(x, lhs, rhs, scaled_residual(lhs, rhs, mag), f"a={a:.6g} b={b:.6g} c={c:.6g}"))
    return out


def _borel_laplace(cfg: RunConfig, s: Sampler) -> list[Record]:
    per_poly = max(1, cfg.points // 10)
    out = []
    for i in range(10):
        deg = int(s.rng.integers(0, 13))
        coeffs = s.rng.normal(size=deg + 1) + 1j * s.rng.normal(size=deg + 1)
        poly = TruncatedSeries(coeffs, cfg.q)
        config = None if cfg.radius is None else cfg.contour()
        for t in s.points(per_poly):
            val = laplace_of_borel(poly, t, config, cfg.params, cfg.nodes).value
            exact = poly(t)
            scale = float(np.sum(np.abs(coeffs) * abs(t) ** np.arange(deg + 1)))
            out.append(Record(t, val, exact, scaled_residual(val, exact, scale), f"poly={i} deg={deg}"))
    return out


def _g_equation(cfg: RunConfig, s: Sampler) -> list[Record]:
    q = cfg.base
    qv = q.value
    out = []
    for tau in s.points(cfg.points):
        lhs = g_eval(qv * tau, q, cfg.params)
        rhs = (1 + qv * qv * tau) * (1 - qv * qv * tau) * g_eval(tau, q, cfg.params)
        out.append(Record(tau, lhs, rhs, scaled_residual(lhs, rhs), "functional"))
    g = q_borel(f_coefficients(q, 20)).coeffs
    for n in range(2, 21):
        lhs = qv ** n * g[n]
        rhs = g[n] - qv ** 4 * g[n - 2]
        scale = max(abs(g[n]), abs(qv ** 4 * g[n - 2]))
        out.append(Record(n, lhs, rhs, scaled_residual(lhs, rhs, scale), "recurrence"))
    eq = derive_g_equation(laplace_side_operator(q), q)
    want = {(0, 1): 1.0, (0, 0): -1.0, (2, 0): qv ** 4}
    got = {(m, l): c for c, m, l in eq.terms}
    for key, value in want.items():
        c = got.get(key, 0j)
        out.append(Record(0j, c, value, scaled_residual(c, value), f"derived x^{key[0]} sigma^{key[1]}"))
    return out


def _residues(cfg: RunConfig, s: Sampler) -> list[Record]:
    out = []
    config = cfg.contour()
    for t in s.points(cfg.points, low=0.1):
        contour = q_laplace_contour(t, cfg.q, config, cfg.params).value
        residue, ledger = residue_sum_f(t, cfg.q, cfg.params)
        direct = f_direct(t, cfg.q, cfg.params)
        # the pole sum cancels heavily for small |t| as |q| -> 1; its term size is the scale
        mag = ledger.magnitude()
        out.append(Record(t, contour, residue, scaled_residual(contour, residue, mag), "contour-residue"))
        out.append(Record(t, contour, direct, scaled_residual(contour, direct), "contour-direct"))
        out.append(Record(t, residue, direct, scaled_residual(residue, direct, mag), "residue-direct"))
    return out


def _connection(cfg: RunConfig, s: Sampler) -> list[Record]:
    out = []
    for x in s.points(cfg.points):
        lhs, rhs, mag = connection_sides(x, cfg.q, cfg.params)
        out.append(Record(x, lhs, rhs, scaled_residual(lhs, rhs, mag)))
    return out


def _psi(cfg: RunConfig, s: Sampler) -> list[Record]:
    q = cfg.base
    q2 = q.squared()
    product = qpochhammer_infinite(q2.value, q2, cfg.params) / qpochhammer_infinite(q.value, q2, cfg.params)
    return [Record(q.value, product, product, psi_check(q, cfg.params), "psi")]


def _gauge(cfg: RunConfig, s: Sampler) -> list[Record]:
    q = cfg.base
    qv = q.value
    out = []
    for t in s.points(cfg.points):
        e0 = gauge_factor(t, q, cfg.params)
        e1 = gauge_factor(qv * t, q, cfg.params)
        e2 = gauge_factor(qv * qv * t, q, cfg.params)
        out.append(Record(t, e1, -qv ** 2 * t * e0, scaled_residual(e1, -qv ** 2 * t * e0), "one-step"))
        out.append(Record(t, e2, qv ** 5 * t * t * e0, scaled_residual(e2, qv ** 5 * t * t * e0), "two-step"))
        out.append(Record(t, e2, e2, gauge_composition_residual(t, q, cfg.params), "composition"))
    return out


def _divergent_formal(cfg: RunConfig, s: Sampler) -> list[Record]:
    check = divergent_second_solution_check(cfg.q)
    return [Record(0j, check.residual, 0j, check.residual, "second solution")]


def _shearing(cfg: RunConfig, s: Sampler) -> list[Record]:
    out = [Record(0j, r, 0j, r, name) for name, r in shearing_check(cfg.q).items()]
    q = cfg.base
    r6 = operator_residual(laplace_side_operator(q), f_coefficients(q, 30))
    out.append(Record(0j, r6, 0j, r6, "t-equation annihilates f"))
    for m, l in ((1, 2), (2, 2), (0, 1)):
        series = TruncatedSeries(s.rng.normal(size=16) + 1j * s.rng.normal(size=16), q)
        r = borel_operational_check(m, l, series)
        out.append(Record(complex(m, l), r, 0j, r, f"borel m={m} l={l}"))
    return out


@dataclass(frozen=True)
class Suite:
    run: Callable[[RunConfig, Sampler], list]
    threshold: float


SUITES: dict[str, Suite] = {
    "triple-product": Suite(_triple_product, 1e-10),
    "theta-shift": Suite(_theta_shift, 1e-9),
    "inversion": Suite(_inversion, 1e-10),
    "sign-flip": Suite(_sign_flip, 1e-9),
    "eq3": Suite(_eq3, 1e-9),
    "eq4": Suite(_eq4, 1e-9),
    "hahn": Suite(_hahn, 1e-9),
    "oyama": Suite(_oyama, 1e-9),
    "watson": Suite(_watson, 1e-8),
    "borel-laplace": Suite(_borel_laplace, 1e-9),
    "g-equation": Suite(_g_equation, 1e-11),
    "residues": Suite(_residues, 1e-8),
    "connection": Suite(_connection, 1e-9),
    "psi": Suite(_psi, 1e-10),
    "gauge": Suite(_gauge, 1e-9),
    "divergent-formal": Suite(_divergent_formal, 1e-10),
    "shearing": Suite(_shearing, 1e-12),
}


def run_suite(name: str, cfg: RunConfig) -> Report:
    """Run one suite.  Unknown names raise ``KeyError``."""
    suite = SUITES[name]
    sampler = Sampler(cfg.seed, cfg.q)
    start = time.perf_counter()
    records = suite.run(cfg, sampler)
    elapsed = time.perf_counter() - start
    if sampler.resampled:
        log.info("%s: resampled %d lattice-adjacent points", name, sampler.resampled)
    log.info("%s: %d records in %.3f s", name, len(records), elapsed)
    return Report(name, complex(cfg.q), suite.threshold, records, sampler.resampled, elapsed)
