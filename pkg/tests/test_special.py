from __future__ import annotations

import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import Q_GRID, annulus, rel
from qairy.errors import BranchError, ConvergenceError, DomainError
from qairy.operators import qairy_operator, ramanujan_operator
from qairy.qcore import qpochhammer_finite, qpochhammer_infinite, theta
from qairy.special import (
    QNU_MINUS_ONE,
    BesselOrder,
    connection_residual,
    connection_sides,
    eq3_residual,
    eq4_residual,
    hahn_exton_residual,
    hahn_residual,
    qairy_Aiq,
    qairy_second_solution,
    qbessel,
    qdiff_residual,
    ramanujan_Aq,
    watson_residual,
)

QC = 0.5 * cmath.exp(0.3j)

# mpmath, 40 digits: direct sums with mp.qp, and mp.qhyper for Ai_q
AQ_1 = 0.1607637889320887257158096758899519908617
AQ_M25 = 4.636620021420246055347553246532815845041
AQ_C = 1.356870426061055201246303704501434073735 - 0.6122505049977984309288118721804243219859j  # x=0.7i, q=QC
AIQ_1 = 3.249170445963655999926907513487103646024
AIQ_3 = 18.49032971752638228530742474195371269035
AIQ_C = 0.9812161699728441366787584278016645276115 + 2.304456794653558078209502125499475074084j  # x=1+i, q=QC
# q-Bessel with (q;q)_n in the denominators, q=0.5
J_NU05_X04 = {
    1: 0.6070465806247578595266327864816349238452,
    2: 0.6569202192931362424780921798835830722971,
    3: 0.7460691809301968201739930900881871991578,
}
J_NU23_XC = {  # nu=2.3, x=0.7+0.2i
    1: 0.1891625492990077604148836018650796905295 + 0.101790182541511703268018003359489578283j,
    2: 0.2171827317272705169953189685907953277182 + 0.1563600903444520988985621017146820156976j,
    3: 0.7733496574750131846552596223471346395442 + 0.2026926158286204654562085841312914232859j,
}


class TestRamanujan:
    def test_origin(self):
        assert ramanujan_Aq(0, 0.5) == 1

    def test_direct_fifty_terms(self):
        q = 0.5
        direct = sum(q ** (n * n) * (-1) ** n / qpochhammer_finite(q, q, n) for n in range(50))
        assert rel(ramanujan_Aq(1, q), direct) < 1e-15

    def test_frozen(self):
        assert rel(ramanujan_Aq(1, 0.5), AQ_1) < 1e-14
        assert rel(ramanujan_Aq(-2.5, 0.5), AQ_M25) < 1e-14
        assert rel(ramanujan_Aq(0.7j, QC), AQ_C) < 1e-14

    def test_equation(self):
        assert eq3_residual(0.7, 0.5) < 1e-10
        assert qdiff_residual(ramanujan_operator(0.5), lambda y: ramanujan_Aq(y, 0.5), 0.3, 0.5) < 1e-10

    @pytest.mark.parametrize("q", Q_GRID)
    def test_equation_grid(self, q):
        assert max(eq3_residual(x, q) for x in annulus(7, 100)) <= 1e-9


class TestQAiry:
    def test_origin(self):
        assert qairy_Aiq(0, 0.5) == 1

    def test_direct_fifty_terms(self):
        q = 0.5
        direct = sum(
            q ** (n * (n - 1) // 2) / (qpochhammer_finite(q, q, n) * qpochhammer_finite(-q, q, n))
            for n in range(50)
        )
        assert rel(qairy_Aiq(1, q), direct) < 1e-15

    def test_frozen(self):
        assert rel(qairy_Aiq(1, 0.5), AIQ_1) < 1e-14
        assert rel(qairy_Aiq(3, 0.5), AIQ_3) < 1e-14
        assert rel(qairy_Aiq(1 + 1j, QC), AIQ_C) < 1e-14

    def test_equation(self):
        assert eq4_residual(0.7, 0.5) < 1e-10
        assert eq4_residual(0.3, 0.5) < 1e-10

    @pytest.mark.parametrize("q", Q_GRID)
    def test_equation_grid(self, q):
        assert max(eq4_residual(x, q) for x in annulus(7, 100)) <= 1e-9

    def test_second_solution(self):
        op = qairy_operator()
        assert qdiff_residual(op, lambda y: qairy_second_solution(y, 0.5), 0.3, 0.5) < 1e-9

    @given(x=st.complex_numbers(min_magnitude=0.05, max_magnitude=5))
    def test_second_solution_antiperiodic_factor(self, x):
        assume(min(abs(theta(x * 0.5 ** k, 0.5)) for k in range(3)) > 1e-8)
        r = lambda y: theta(-y, 0.5) / theta(y, 0.5)  # noqa: E731
        assert abs(r(0.5 * x) + r(x)) <= 1e-9 * abs(r(x))


class TestBessel:
    def test_origin(self):
        assert qbessel(1, BesselOrder(0), 0, 0.5) == 1

    @pytest.mark.parametrize("kind", [1, 2, 3])
    def test_frozen(self, kind):
        assert rel(qbessel(kind, BesselOrder(0.5), 0.4, 0.5), J_NU05_X04[kind]) < 1e-14
        assert rel(qbessel(kind, BesselOrder(2.3), 0.7 + 0.2j, 0.5), J_NU23_XC[kind]) < 1e-13

    def test_relation_one(self):
        assert hahn_residual(BesselOrder(0.5), 0.4, 0.5) < 1e-9

    @pytest.mark.parametrize("nu", [0, 0.5, 1, 2.3])
    @pytest.mark.parametrize("q", Q_GRID)
    def test_relation_one_grid(self, nu, q):
        xs = annulus(11, 30, high=1.0)
        assert max(hahn_residual(BesselOrder(nu), x, q) for x in xs) <= 1e-9

    def test_relation_two(self):
        assert hahn_exton_residual(0.3, 0.5) < 1e-9

    @pytest.mark.parametrize("q", Q_GRID)
    def test_relation_two_grid(self, q):
        xs = annulus(13, 30, high=3.0)
        nu = 1j * math.pi / cmath.log(q)
        assert max(hahn_exton_residual(x, q) for x in xs) <= 1e-9
        assert max(hahn_exton_residual(x, q, order=BesselOrder(nu)) for x in xs) <= 1e-9

    def test_symbolic_order_drops_power(self):
        order = BesselOrder(0, QNU_MINUS_ONE)
        want = qpochhammer_infinite(-0.5, 0.5) / qpochhammer_infinite(0.5, 0.5) * qairy_Aiq(-0.5 * 0.09, 0.5)
        assert rel(qbessel(3, order, 0.3, 0.5), want) < 1e-14

    def test_first_kind_region(self):
        with pytest.raises(ConvergenceError):
            qbessel(1, BesselOrder(0), 2.5, 0.5)

    def test_branch_cut(self):
        with pytest.raises(BranchError):
            qbessel(2, BesselOrder(0.5), -0.4, 0.5)
        assert qbessel(2, BesselOrder(2), -0.4, 0.5) == pytest.approx(qbessel(2, BesselOrder(2), 0.4, 0.5))

    def test_bad_kind(self):
        with pytest.raises(DomainError):
            qbessel(4, BesselOrder(0), 0.3, 0.5)


class TestWatson:
    def test_example(self):
        assert abs(0.2 * 0.3 / (0.3 * 0.7 * 0.5)) == pytest.approx(0.5714, abs=1e-4)
        assert watson_residual(0.3, 0.7, 0.2, 0.5, 0.3) < 1e-8

    def test_degenerate(self):
        with pytest.raises(DomainError):
            watson_residual(0.4, 0.4, 0.2, 0.5, 0.3)

    def test_outside_region(self):
        with pytest.raises(ConvergenceError):
            watson_residual(0.3, 0.7, 0.9, 0.1, 0.5)
        with pytest.raises(ConvergenceError):
            watson_residual(0.3, 0.7, 0.2, 1.2, 0.5)

    def test_against_direct_sum(self):
        a, b, c, x, q = 0.3, 0.7, 0.2, 0.5, 0.3
        with mp.workdps(30):
            direct = mp.nsum(
                lambda n: mp.qp(a, q, n) * mp.qp(b, q, n) / (mp.qp(c, q, n) * mp.qp(q, q, n)) * x ** n, [0, mp.inf]
            )
        from qairy.special import watson_sides

        lhs, rhs, _ = watson_sides(a, b, c, x, q)
        assert rel(lhs, float(direct)) < 1e-14
        assert rel(rhs, float(direct)) < 1e-12

    @pytest.mark.parametrize("q", Q_GRID)
    def test_random_admissible(self, q):
        rng = np.random.default_rng(5)

        def draw(lo, hi):
            return math.exp(rng.uniform(math.log(lo), math.log(hi))) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))

        worst, n = 0.0, 0
        while n < 50:
            a, b, c = draw(0.3, 3), draw(0.3, 3), draw(0.05, 1)
            low = max(1.25 * abs(c * q / (a * b)), 0.02)
            if low >= 0.8:
                continue
            worst = max(worst, watson_residual(a, b, c, draw(low, 0.8), q))
            n += 1
        assert worst <= 1e-8


class TestConnection:
    def test_examples(self):
        assert connection_residual(1, 0.5) < 1e-10
        assert connection_residual(10, 0.5) < 1e-10
        lhs, _, _ = connection_sides(10, 0.5)
        assert abs(lhs - 1) < 1e-3

    @pytest.mark.parametrize("m", [-2, 0, 3])
    def test_on_theta_zero(self, m):
        x = -0.5 * 0.5 ** m
        assert abs(theta(x / 0.5, 0.5)) < 1e-12
        assert connection_residual(x, 0.5) < 1e-9

    def test_rejects_origin(self):
        with pytest.raises(DomainError):
            connection_residual(0, 0.5)

    @pytest.mark.parametrize("q", Q_GRID)
    def test_grid(self, q, grid_points):
        assert max(connection_residual(x, q) for x in grid_points) <= 1e-9

    @pytest.mark.parametrize("q", Q_GRID)
    def test_parity(self, q):
        for x in annulus(3, 20):
            lp, _, _ = connection_sides(x, q)
            lm, _, _ = connection_sides(-x, q)
            assert lp == lm
            assert connection_residual(-x, q) <= 1e-9

    @settings(max_examples=60)
    @given(
        r=st.floats(math.log(0.05), math.log(10)),
        a=st.floats(-math.pi, math.pi),
        qr=st.floats(0.05, 0.9),
        qa=st.floats(-math.pi, math.pi),
    )
    def test_property(self, r, a, qr, qa):
        x = math.exp(r) * cmath.exp(1j * a)
        q = qr * cmath.exp(1j * qa)
        assert connection_residual(x, q) <= 1e-9
