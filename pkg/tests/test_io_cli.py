import json
import math
import subprocess
import sys

import numpy as np
import pytest

from gaugewave.cli import EXIT_ASSUMPTION, EXIT_ERROR, EXIT_OK, EXIT_USAGE, main, quadratic_fit
from gaugewave.io import (
    SolutionFileError, canonical_dumps, load_solution, load_solution_with_model, read_document,
    save_solution, write_csv,
)

Q0_SIGMA2 = "102.130165075406"


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    d = tmp_path_factory.mktemp("solve")
    out = d / "sol.json"
    code = main(["solve", "--q", "0.05", "--sigma2", Q0_SIGMA2, "--out", str(out)])
    assert code == EXIT_OK
    return out


class TestCanonicalJson:
    def test_floats(self):
        assert canonical_dumps(1.0) == "1.0" and canonical_dumps(0.1) == "0.10000000000000001"
        assert canonical_dumps(2) == "2" and canonical_dumps(float("nan")) == "NaN"
        assert json.loads(canonical_dumps({"b": [1.5, True], "a": None})) == {"a": None, "b": [1.5, True]}

    def test_sorted_keys(self):
        s = canonical_dumps({"z": 1, "a": 2})
        assert s.index('"a"') < s.index('"z"')

    def test_csv(self, tmp_path):
        p = write_csv(tmp_path / "t.csv", ["a", "b"], [(1.0, "true"), (0.25, "false")])
        assert p.read_bytes() == b"a,b\n1.0,true\n0.25,false\n"


class TestSolutionFiles:
    def test_byte_identical_round_trip(self, solutions, saturable, tmp_path):
        sol = solutions[0.05]
        a = save_solution(sol, saturable, tmp_path / "a.json", {"q": 0.05})
        sol2, model2, cfg = load_solution_with_model(a)
        b = save_solution(sol2, model2, tmp_path / "b.json", cfg)
        assert a.read_bytes() == b.read_bytes()
        assert np.array_equal(sol2.u.values, sol.u.values) and sol2.omega2 == sol.omega2

    def test_truncated(self, solved, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(solved.read_text()[:500])
        with pytest.raises(SolutionFileError):
            load_solution(bad)

    def test_wrong_format(self, tmp_path):
        p = tmp_path / "x.json"
        p.write_text('{"format": "other"}')
        with pytest.raises(SolutionFileError):
            load_solution(p)
        p.write_text("[1, 2]")
        with pytest.raises(SolutionFileError):
            read_document(p)


class TestSolveValidate:
    def test_artifacts(self, solved):
        rec = read_document(solved.with_name("sol.record.json"))
        for key in ("tool_version", "config_echo", "model_echo", "assumptions",
                    "solution_summary", "check_results", "artifact_paths"):
            assert key in rec
        assert rec["status"] == "ok"
        header = solved.with_name("sol.csv").read_text().splitlines()[0]
        assert header == "r,u,phi,energy_density"

    def test_quiet_on_success(self, solved, capsys):
        assert main(["validate", "--in", str(solved)]) == EXIT_OK
        assert capsys.readouterr().err == ""

    def test_perturbed_fails(self, solved, tmp_path, capsys):
        doc = read_document(solved)
        doc["u"] = [1.1 * x for x in doc["u"]]
        bad = tmp_path / "pert.json"
        bad.write_text(json.dumps(doc))
        assert main(["validate", "--in", str(bad)]) != EXIT_OK
        assert "residual_matter" in capsys.readouterr().err

    def test_truncated_exit(self, solved, tmp_path):
        bad = tmp_path / "trunc.json"
        bad.write_text(solved.read_text()[:300])
        assert main(["validate", "--in", str(bad)]) == EXIT_ERROR

    def test_quadratic_assumption_exit(self, tmp_path):
        code = main(["solve", "--q", "0", "--sigma2", "10", "--w", "quadratic",
                     "--out", str(tmp_path / "s.json")])
        assert code == EXIT_ASSUMPTION
        assert read_document(tmp_path / "s.record.json")["status"] == "assumption_failure"

    def test_usage_exit(self):
        with pytest.raises(SystemExit) as e:
            main(["solve", "--q", "0.1", "--out", "x.json"])
        assert e.value.code == EXIT_USAGE

    def test_module_entry_point(self, tmp_path):
        p = subprocess.run([sys.executable, "-m", "gaugewave", "check-w", "--w", "saturable"],
                           capture_output=True, text=True)
        assert p.returncode == EXIT_OK and p.stderr == ""


class TestBoostCli:
    def test_light_speed_rejected(self, solved, tmp_path):
        assert main(["boost", "--in", str(solved), "--v", "1", "--out",
                     str(tmp_path / "f.npz")]) == EXIT_USAGE

    @pytest.mark.slow
    def test_refine(self, solved, tmp_path):
        out = tmp_path / "f.npz"
        code = main(["boost", "--in", str(solved), "--v", "0.5", "--grid", "48",
                     "--halfwidth", "10", "--out", str(out), "--refine"])
        assert code == EXIT_OK and out.exists()
        rep = read_document(tmp_path / "f.report.json")
        assert all(c["passed"] for c in rep["refinement"].values())


class TestSweep:
    def test_empty_range(self, tmp_path):
        assert main(["sweep-q", "--qmin", "0.2", "--qmax", "0.1", "--steps", "3",
                     "--sigma2", "100", "--out", str(tmp_path / "s.csv")]) == EXIT_USAGE

    def test_single_point(self, tmp_path):
        out = tmp_path / "s.csv"
        code = main(["sweep-q", "--qmin", "0.05", "--qmax", "0.05", "--steps", "1",
                     "--sigma2", Q0_SIGMA2, "--out", str(out)])
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "q,omega2,J,residual,converged" and len(lines) == 2
        assert (tmp_path / "s.svg").read_text().startswith("<svg")

    def test_quadratic_fit(self):
        qs = np.array([0.1, 0.2, 0.3])
        a, r2 = quadratic_fit(qs, 2.5 * qs**2)
        assert a == pytest.approx(2.5) and r2 == pytest.approx(1.0)


class TestCheckW:
    def test_saturable(self, capsys):
        assert main(["check-w", "--w", "saturable"]) == EXIT_OK

    def test_quadratic(self):
        assert main(["check-w", "--w", "quadratic"]) == EXIT_ASSUMPTION

    def test_malformed_table(self, tmp_path):
        p = tmp_path / "w.csv"
        p.write_text("s,W\n0,0\n1,abc\n")
        assert main(["check-w", "--w", "tabulated", "--table", str(p)]) == EXIT_ERROR


class TestPlot:
    def test_profile_svg(self, solved, tmp_path):
        out = tmp_path / "p.svg"
        assert main(["plot", "--in", str(solved), "--out", str(out)]) == EXIT_OK
        text = out.read_text()
        assert text.startswith("<svg") and "polyline" in text

    def test_missing_input(self, tmp_path):
        assert main(["plot", "--in", str(tmp_path / "none.json"),
                     "--out", str(tmp_path / "p.svg")]) == EXIT_ERROR
