from __future__ import annotations

import json
import subprocess
import sys

import pytest

from qairy import cli
from qairy.special import qairy_Aiq
from qairy.verify import SUITES, Record, Report, RunConfig, Sampler, dumps, format_number, run_suite


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestEval:
    def test_aq_origin(self, capsys):
        code, out, _ = run(capsys, "eval", "Aq", "--x", "0")
        data = json.loads(out)
        assert code == 0
        assert data["re"] == 1.0 and data["im"] == 0.0 and "est_err" in data

    def test_theta_zero(self, capsys):
        code, out, _ = run(capsys, "eval", "theta", "--x", "-1")
        data = json.loads(out)
        assert abs(complex(data["re"], data["im"])) < 1e-12

    def test_aiq_matches_library(self, capsys):
        _, out, _ = run(capsys, "eval", "Aiq", "--x", "1", "--q", "0.5")
        data = json.loads(out)
        assert complex(data["re"], data["im"]) == qairy_Aiq(1, 0.5)

    @pytest.mark.parametrize("name", sorted(cli.FUNCTIONS))
    def test_every_function(self, capsys, name):
        code, out, _ = run(capsys, "eval", name, "--x", "0.3+0.1i", "--q", "0.5", "--nu", "0.5")
        assert code == 0
        data = json.loads(out)
        assert data["est_err"] < 1e-10

    def test_complex_q(self, capsys):
        code, out, _ = run(capsys, "eval", "qpoch", "--x", "0.5", "--q", "0.4+0.2i")
        assert code == 0

    def test_finite_qpoch(self, capsys):
        _, out, _ = run(capsys, "eval", "qpoch", "--x", "0.5", "--q", "0.5", "--n", "2")
        assert json.loads(out)["re"] == 0.375

    def test_domain(self, capsys):
        code, _, err = run(capsys, "eval", "g", "--x", "4", "--q", "0.5")
        assert code == 2 and "pole" in err

    def test_convergence(self, capsys):
        code, _, err = run(capsys, "eval", "J1", "--x", "3")
        assert code == 3 and err

    def test_unknown_function(self, capsys):
        code, _, _ = run(capsys, "eval", "Bi", "--x", "1")
        assert code == 4


class TestVerify:
    def test_connection(self, capsys):
        code, out, _ = run(capsys, "verify", "connection", "--q", "0.5", "--points", "100", "--seed", "7")
        data = json.loads(out)
        assert code == 0 and data["pass"] and data["max_residual"] < 1e-9
        assert len(data["records"]) == 100

    def test_triple_product_high_q(self, capsys):
        code, _, _ = run(capsys, "verify", "triple-product", "--q", "0.8")
        assert code == 0

    def test_suite_flag(self, capsys):
        code, _, _ = run(capsys, "verify", "--suite", "psi", "--q", "0.3")
        assert code == 0

    def test_q_out_of_range(self, capsys):
        code, _, err = run(capsys, "verify", "connection", "--q", "1.5")
        assert code == 2 and "q out of range" in err

    def test_unknown_suite(self, capsys):
        code, _, _ = run(capsys, "verify", "nonsense")
        assert code == 4

    def test_bad_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["verify", "connection", "--format", "xml"])
        assert exc.value.code == 4

    def test_missing_command(self, capsys):
        assert cli.main([]) == 4

    def test_unparsable_q(self, capsys):
        code, _, _ = run(capsys, "verify", "connection", "--q", "half")
        assert code == 4

    def test_truncation_budget_exit(self, capsys):
        code, _, err = run(capsys, "verify", "psi", "--q", "0.9", "--trunc", "50")
        assert code == 3 and "factors" in err

    def test_failing_suite_exit(self, capsys):
        # small |q| makes L_q B_q of degree-12 polynomials ill-conditioned in doubles
        code, out, _ = run(capsys, "verify", "borel-laplace", "--q", "0.2", "--seed", "7", "--points", "50")
        assert code == 1 and not json.loads(out)["pass"]

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "verify", "inversion", "--points", "5", "--format", "csv")
        lines = out.strip().splitlines()
        assert lines[0].startswith("x_re,x_im")
        assert len(lines) == 6

    def test_deterministic(self, capsys):
        _, a, _ = run(capsys, "verify", "connection", "--seed", "7")
        _, b, _ = run(capsys, "verify", "connection", "--seed", "7")
        _, c, _ = run(capsys, "verify", "connection", "--seed", "8")
        assert a == b and a != c

    def test_timing_opt_in(self, capsys):
        _, out, _ = run(capsys, "verify", "psi", "--timing")
        assert "elapsed" in json.loads(out)
        _, out, _ = run(capsys, "verify", "psi")
        assert "elapsed" not in json.loads(out)


class TestSweep:
    def test_three_rows(self, capsys):
        code, out, _ = run(capsys, "sweep", "connection", "--q", "0.2,0.5,0.8")
        lines = out.strip().splitlines()
        assert code == 0
        assert lines[0] == "q,suite,max_residual,pass"
        assert [ln.split(",")[0] for ln in lines[1:]] == ["0.2", "0.5", "0.8"]
        assert all(ln.endswith(",true") for ln in lines[1:])

    def test_repeated_flag(self, capsys):
        _, out, _ = run(capsys, "sweep", "eq4", "--q", "0.3", "--q", "0.4-0.1i")
        assert out.splitlines()[2].startswith("0.4-0.1i,eq4,")

    def test_empty(self, capsys):
        code, out, _ = run(capsys, "sweep", "connection")
        assert code == 0 and out == "q,suite,max_residual,pass\n"

    def test_invalid_q(self, capsys):
        code, _, _ = run(capsys, "sweep", "connection", "--q", "0.5,2")
        assert code == 2

    def test_json(self, capsys):
        _, out, _ = run(capsys, "sweep", "psi", "--q", "0.5", "--format", "json")
        assert json.loads(out)[0]["suite"] == "psi"


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qairy", "eval", "Aq", "--x", "0"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["re"] == 1.0


class TestReport:
    def test_sorted_and_pass(self):
        recs = [Record(1, 0, 0, 1e-12), Record(2, 0, 0, 1e-3), Record(3, 0, 0, 1e-9)]
        rep = Report("x", 0.5, 1e-8, recs)
        assert [r.residual for r in rep.records] == [1e-3, 1e-9, 1e-12]
        assert not rep.passed
        assert Report("x", 0.5, 1e-2, recs).passed

    def test_nan_fails(self):
        rep = Report("x", 0.5, 1.0, [Record(1, 0, 0, 0.1), Record(1, 0, 0, float("nan"))])
        assert not rep.passed
        assert json.loads(rep.to_json())["max_residual"] is None

    def test_number_format(self):
        assert format_number(0.1) == "0.10000000000000001"
        assert float(format_number(1 / 3)) == 1 / 3
        assert dumps({"a": [1.0, True, None, "s"]}) == '{"a":[1,true,null,"s"]}'


class TestSampler:
    def test_reproducible(self):
        a = Sampler(3, 0.5).points(20)
        b = Sampler(3, 0.5).points(20)
        assert a == b

    def test_bounds(self):
        pts = Sampler(4, 0.5).points(500)
        assert all(0.05 <= abs(z) <= 10 for z in pts)

    def test_resamples_lattice(self):
        s = Sampler(0, 0.5)
        assert s._near_lattice(-0.25)
        assert s._near_lattice(4.0 * (1 + 1e-8))
        assert not s._near_lattice(0.3)


@pytest.mark.parametrize("name", sorted(SUITES))
def test_every_suite_passes_at_half(name):
    assert run_suite(name, RunConfig(q=0.5, seed=1, points=20)).passed


def test_config_validation():
    from qairy.errors import DomainError

    with pytest.raises(DomainError):
        RunConfig(q=1.2)
    with pytest.raises(DomainError):
        RunConfig(points=0)
