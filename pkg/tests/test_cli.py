import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import S1, S2, S3
from stroboscopic.cli import EXIT_INPUT, EXIT_INVARIANT, EXIT_MATH, EXIT_OK, main
from stroboscopic.jsonio import decode_matrix, encode_matrix
from stroboscopic.reconstruction import MeasurementRecord


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        p = tmp_path / name
        p.write_text(json.dumps(obj))
        return str(p)

    return {
        "deph": write("deph.json", {"model": "dephasing", "gamma": 1.0}),
        "depol": write("depol.json", {"model": "depolarizing", "gamma": 1.0}),
        "fam": write("fam.json", {"model": "one_parametric", "gamma": 1.0, "a": 0.7}),
        "fam05": write("fam05.json", {"model": "one_parametric", "gamma": 1.0, "a": 0.5}),
        "good_qs": write("good.json", [encode_matrix(S1), encode_matrix(S2 + S3)]),
        "bad_qs": write("bad.json", [encode_matrix(S1), encode_matrix(S2)]),
        "nonherm": write("nonherm.json", [encode_matrix(np.array([[0, 1], [0, 0]]))]),
        "state": write("state.json", {"bloch": [0.3, 0.4, 0.5]}),
        "bad_state": write("bad_state.json", {"matrix": encode_matrix(np.diag([1.5, -0.5]))}),
        "dir": tmp_path,
        "write": write,
    }


def run_json(capsys, argv):
    code = main(argv + ["--json"])
    return code, json.loads(capsys.readouterr().out)


class TestAnalyze:
    def test_dephasing(self, files, capsys):
        code, out = run_json(capsys, ["analyze", files["deph"]])
        assert code == EXIT_OK
        assert out["eta"] == 2 and out["mu"] == 2 and out["degenerate"]
        assert out["trace_preserving"]["ok"] and out["hermiticity_preserving"]["ok"]

    def test_depolarizing(self, files, capsys):
        code, out = run_json(capsys, ["analyze", files["depol"]])
        assert code == EXIT_OK and out["eta"] == 3

    def test_family(self, files, capsys):
        code, out = run_json(capsys, ["analyze", files["fam"]])
        assert code == EXIT_OK and out["eta"] == 1 and out["mu"] == 4

    def test_text_report(self, files, capsys):
        assert main(["analyze", files["deph"]]) == EXIT_OK
        out = capsys.readouterr().out
        assert "eta = 2" in out and "mu = 2" in out

    def test_non_trace_preserving_generator(self, files, capsys):
        m = files["write"]("gen.json", {"generator": encode_matrix(-np.eye(4))})
        code, out = run_json(capsys, ["analyze", m])
        assert code == EXIT_INVARIANT
        assert not out["trace_preserving"]["ok"]

    def test_parse_errors(self, files, capsys):
        assert main(["analyze", str(files["dir"] / "missing.json")]) == EXIT_INPUT
        assert main(["analyze", files["write"]("x.json", {"model": "dephasing"})]) == EXIT_INPUT
        assert main(["analyze", files["write"]("y.json", {"model": "dephasing", "gamma": -1})]) == EXIT_INVARIANT
        assert main(["bogus"]) == EXIT_INPUT
        assert main([]) == EXIT_INPUT
        assert main(["analyze", files["deph"], "--tol-rank", "0"]) == EXIT_INPUT


class TestObservables:
    def test_check_good(self, files, capsys):
        code, out = run_json(capsys, ["observables", files["deph"], "--check", files["good_qs"]])
        assert code == EXIT_OK
        assert (out["ok"], out["achieved_dim"], out["required_dim"], out["krylov_dims"]) == (True, 4, 4, [1, 2])

    def test_check_bad(self, files, capsys):
        code, out = run_json(capsys, ["observables", files["deph"], "--check", files["bad_qs"]])
        assert code == EXIT_MATH
        assert not out["ok"] and out["achieved_dim"] == 3

    def test_suggest_family(self, files, capsys):
        code, out = run_json(capsys, ["observables", files["fam05"], "--suggest"])
        assert code == EXIT_OK and out["ok"] and len(out["observables"]) == 1

    def test_suggest_round_trips_into_check(self, files, capsys):
        _, out = run_json(capsys, ["observables", files["depol"], "--suggest"])
        path = files["write"]("sugg.json", out)
        code, back = run_json(capsys, ["observables", files["depol"], "--check", path])
        assert code == EXIT_OK and back["ok"] and len(back["observables"]) == 3

    def test_non_hermitian(self, files, capsys):
        assert main(["observables", files["deph"], "--check", files["nonherm"]]) == EXIT_INVARIANT

    def test_needs_mode(self, files):
        assert main(["observables", files["deph"]]) == EXIT_INPUT


class TestPlan:
    def test_valid(self, files, capsys):
        code, out = run_json(capsys, ["plan", files["deph"], "--times", "0.5,1.0"])
        assert code == EXIT_OK and out["valid"]
        assert abs(out["determinant"] - (np.exp(-0.5) - np.exp(-1.0))) < 1e-12

    def test_coincident(self, files, capsys):
        code, out = run_json(capsys, ["plan", files["deph"], "--times", "1.0,1.0"])
        assert code == EXIT_MATH and not out["valid"]

    def test_family(self, files, capsys):
        code, out = run_json(capsys, ["plan", files["fam05"], "--times", "0,0.5,1,1.5"])
        assert code == EXIT_OK and out["valid"] and out["determinant"] != 0
        assert np.array(out["alpha_matrix"]).shape == (4, 4)

    def test_wrong_count(self, files):
        assert main(["plan", files["deph"], "--times", "0.5,1.0,2.0"]) == EXIT_INPUT
        assert main(["plan", files["deph"], "--times", "a,b"]) == EXIT_INPUT


class TestSimulateReconstruct:
    def test_simulate_values(self, files, capsys):
        code = main(["simulate", files["deph"], "--state", files["state"], "--observables", files["good_qs"], "--times", "0,1"])
        assert code == EXIT_OK
        rec = MeasurementRecord.from_dict(json.loads(capsys.readouterr().out))
        assert abs(rec.values[0, 0] - 0.3) < 1e-15
        assert abs(rec.values[0, 1] - 0.3 * np.exp(-1)) < 1e-14
        assert abs(rec.values[1, 1] - (0.4 * np.exp(-1) + 0.5)) < 1e-14

    def test_seed_is_bit_identical(self, files, capsys):
        argv = ["simulate", files["deph"], "--state", files["state"], "--observables", files["good_qs"],
                "--times", "0.5,1", "--noise", "0.01", "--seed", "42"]
        main(argv)
        a = capsys.readouterr().out
        main(argv)
        b = capsys.readouterr().out
        assert a == b
        main(argv[:-1] + ["43"])
        assert capsys.readouterr().out != a

    def test_out_file(self, files, capsys):
        out = str(files["dir"] / "rec.json")
        argv = ["simulate", files["deph"], "--state", files["state"], "--observables", files["good_qs"],
                "--times", "0.5,1", "--out", out]
        assert main(argv) == EXIT_OK
        assert MeasurementRecord.from_dict(json.loads(open(out).read())).values.shape == (2, 2)

    def test_invalid_state(self, files):
        argv = ["simulate", files["deph"], "--state", files["bad_state"], "--observables", files["good_qs"], "--times", "1"]
        assert main(argv) == EXIT_INVARIANT

    @pytest.mark.parametrize("method", ["alpha", "direct", "closed-form"])
    def test_reconstruct_methods(self, files, capsys, method):
        out = str(files["dir"] / "rec.json")
        main(["simulate", files["deph"], "--state", files["state"], "--observables", files["good_qs"],
              "--times", "0.5,1", "--out", out])
        code, res = run_json(capsys, ["reconstruct", files["deph"], "--record", out, "--method", method])
        assert code == EXIT_OK and res["method"] == method
        assert np.abs(np.array(res["bloch"]) - [0.3, 0.4, 0.5]).max() < 1e-9
        assert res["residual"] >= 0

    def test_alpha_equals_direct(self, files, capsys):
        out = str(files["dir"] / "rec.json")
        main(["simulate", files["fam05"], "--state", files["state"], "--observables", files["write"]("q.json", [encode_matrix(S1 + S2 + S3)]),
              "--times", "0,0.5,1,1.5", "--out", out])
        _, a = run_json(capsys, ["reconstruct", files["fam05"], "--record", out, "--method", "alpha"])
        _, d = run_json(capsys, ["reconstruct", files["fam05"], "--record", out, "--method", "direct"])
        assert np.abs(decode_matrix(a["matrix"]) - decode_matrix(d["matrix"])).max() < 1e-9

    def test_insufficient_observables(self, files, capsys):
        out = str(files["dir"] / "rec.json")
        main(["simulate", files["deph"], "--state", files["state"], "--observables", files["bad_qs"],
              "--times", "0.5,1", "--out", out])
        assert main(["reconstruct", files["deph"], "--record", out]) == EXIT_MATH
        assert "observability condition" in capsys.readouterr().err

    def test_singular_grid(self, files, capsys):
        out = str(files["dir"] / "rec.json")
        main(["simulate", files["deph"], "--state", files["state"], "--observables", files["good_qs"],
              "--times", "1,1", "--out", out])
        assert main(["reconstruct", files["deph"], "--record", out]) == EXIT_MATH
        assert "time-grid condition" in capsys.readouterr().err

    def test_closed_form_needs_dephasing(self, files):
        out = str(files["dir"] / "rec.json")
        main(["simulate", files["depol"], "--state", files["state"], "--observables", files["good_qs"],
              "--times", "0,1", "--out", out])
        assert main(["reconstruct", files["depol"], "--record", out, "--method", "closed-form"]) == EXIT_INPUT

    def test_shell_pipe(self, files):
        sim = subprocess.run(
            [sys.executable, "-m", "stroboscopic", "simulate", files["deph"], "--state", files["state"],
             "--observables", files["good_qs"], "--times", "0.5,1"],
            capture_output=True, text=True, check=True,
        )
        rec = subprocess.run(
            [sys.executable, "-m", "stroboscopic", "reconstruct", files["deph"], "--record", "-", "--json"],
            input=sim.stdout, capture_output=True, text=True, check=True,
        )
        assert np.abs(np.array(json.loads(rec.stdout)["bloch"]) - [0.3, 0.4, 0.5]).max() < 1e-9


class TestSweep:
    def test_grid(self, files, capsys):
        code, out = run_json(capsys, ["sweep", files["fam"], "--a-range", "0:2:0.25"])
        assert code == EXIT_OK
        etas = {row["a"]: row["eta"] for row in out["rows"]}
        assert len(etas) == 9
        assert all(eta == (2 if a in (0.0, 1.0, 2.0) else 1) for a, eta in etas.items())

    def test_single_point(self, files, capsys):
        _, out = run_json(capsys, ["sweep", files["fam"], "--a-range", "1"])
        assert out["rows"][0]["eta"] == 2

    def test_a_half_eigenvalues(self, files, capsys):
        _, out = run_json(capsys, ["sweep", files["fam"], "--a-range", "0.5"])
        eig = sorted(re for re, _ in out["rows"][0]["eigenvalues"])
        assert np.abs(np.array(eig) - [-4 / 3, -1, -1 / 3, 0]).max() < 1e-10

    def test_text_marks_degenerate(self, files, capsys):
        main(["sweep", files["fam"], "--a-range", "0.5:1:0.5"])
        lines = capsys.readouterr().out.splitlines()
        assert not lines[-2].endswith("*") and lines[-1].endswith("*")

    def test_errors(self, files):
        assert main(["sweep", files["fam"], "--a-range", "0:3:0.5"]) == EXIT_INPUT
        assert main(["sweep", files["deph"], "--a-range", "0:1:0.5"]) == EXIT_INPUT
        assert main(["sweep", files["fam"], "--a-range", "0:1"]) == EXIT_INPUT


class TestDemo:
    def test_json(self, capsys):
        code, out = run_json(capsys, ["demo", "dephasing"])
        assert code == EXIT_OK
        assert out["eta"] == 2 and out["mu"] == 2 and out["krylov_dims"] == [1, 2]
        assert np.abs(np.array(out["closed_form_bloch"]) - [0.3, 0.4, 0.5]).max() < 1e-12
        assert np.abs(np.array(out["alpha_pipeline_bloch"]) - [0.3, 0.4, 0.5]).max() < 1e-9
        gen = decode_matrix(out["generator"])
        assert np.abs(gen + np.diag([0, 1, 1, 0])).max() == 0

    def test_text(self, capsys):
        assert main(["demo", "dephasing", "--gamma", "2"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "eta = 2" in out and "-0." not in out.split("spectrum")[0]
