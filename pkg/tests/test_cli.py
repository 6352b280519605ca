import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sympsens.cli import main
from sympsens.reports import (MatrixFormatError, Report, ReportFormatError, digest, format_matrix,
                              load_matrix, parse_matrix, parse_report, payload_equal)

from conftest import write_matrix


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    mats = {
        "a14": np.diag([1.0, 4.0]),
        "i2": np.eye(2),
        "i4": np.eye(4),
        "b24": np.diag([2.0, 4.0]),
        "b1212": np.diag([1.0, 2.0, 1.0, 2.0]),
        "c": np.diag([1.0, 9.0, 4.0, 16.0]),
        "npd": np.diag([1.0, -1.0]),
        "near_singular": np.diag([1.0, 1e-10]),
    }
    return {k: write_matrix(tmp_path / f"{k}.txt", v) for k, v in mats.items()}


class TestMatrixFiles:
    def test_plain(self):
        np.testing.assert_array_equal(parse_matrix("2\n1 0\n0 4\n"), np.diag([1.0, 4.0]))

    def test_json(self):
        a = parse_matrix(json.dumps({"dim": 2, "rows": [[1, 0.5], [0.5, 2]]}))
        np.testing.assert_array_equal(a, [[1, 0.5], [0.5, 2]])

    @pytest.mark.parametrize("text, msg", [
        ("", "empty"),
        ("3\n1 0 0\n0 1 0\n0 0 1\n", "even"),
        ("2\n1 0\n", "expected 2 rows"),
        ("2\n1 0 0\n0 1\n", "line 2"),
        ("2 2\n1 0\n0 1\n", "dimension only"),
        ("x\n", "bad dimension"),
        ("2\n1 a\n0 1\n", "could not convert"),
        ("2\n1 nan\n0 1\n", "non-finite"),
        ('{"dim": 4, "rows": [[1, 0], [0, 1]]}', "declared dim"),
        ('{"rows": [[1]]}', "invalid JSON"),
    ])
    def test_errors(self, text, msg):
        with pytest.raises(MatrixFormatError, match=msg):
            parse_matrix(text)

    def test_symmetrised_on_load(self, tmp_path):
        path = tmp_path / "asym.txt"
        path.write_text("2\n1 2\n0 1\n")
        loaded = load_matrix(path)
        assert loaded.asymmetry == 2.0
        np.testing.assert_array_equal(loaded.matrix, [[1, 1], [1, 1]])

    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5), fmt=st.sampled_from(["plain", "json"]))
    def test_round_trip(self, seed, n, fmt):
        a = np.random.default_rng(seed).standard_normal((2 * n, 2 * n)) * 10.0 ** np.random.default_rng(seed).integers(-300, 300)
        np.testing.assert_array_equal(parse_matrix(format_matrix(a, fmt)), a)

    def test_digest(self):
        assert digest(np.eye(2)) == digest(np.eye(2).copy())
        assert digest(np.eye(2)) != digest(np.eye(2), extra="x")
        assert digest(np.eye(4)) != digest(np.eye(2))


class TestReport:
    def _report(self):
        return Report(command="sympsens x", seed=3, digest="sha256:00",
                      payload={"d": np.array([0.1, 1 / 3]), "s": 2.0, "M": np.arange(6.0).reshape(2, 3) / 7,
                               "verdict": "a: b c"},
                      residuals={"r": 1e-17}, tolerances={"tol": 1e-9}, flags={"ok": True, "bad": False},
                      warnings=["careful: here"])

    @pytest.mark.parametrize("fmt", ["text", "json"])
    def test_round_trip(self, fmt):
        rep = self._report()
        text = rep.to_text() if fmt == "text" else rep.to_json()
        back = parse_report(text)
        assert (back.command, back.seed, back.digest) == (rep.command, rep.seed, rep.digest)
        assert back.payload.keys() == rep.payload.keys()
        assert all(payload_equal(back.payload[k], v) for k, v in rep.payload.items())
        assert back.residuals == rep.residuals and back.tolerances == rep.tolerances
        assert back.flags == rep.flags and back.warnings == rep.warnings

    def test_text_layout(self):
        text = self._report().to_text()
        assert "d: 0.10000000000000001 0.33333333333333331\n" in text
        assert "M[2x3]: " in text and "flag ok: true" in text and "seed: 3" in text

    def test_bad_text(self):
        with pytest.raises(ReportFormatError):
            parse_report("no separator here")
        with pytest.raises(ReportFormatError):
            parse_report("bogus key: 1")

    def test_seedless(self):
        assert parse_report(Report(command="c").to_text()).seed is None


class TestCommands:
    @pytest.mark.parametrize("name, expected", [("a14", "d: 2\n"), ("i4", "d: 1 1\n"), ("c", "d: 2 12\n")])
    def test_spectrum(self, capsys, files, name, expected):
        code, out, _ = run(capsys, "spectrum", files[name])
        assert code == 0 and expected in out

    def test_spectrum_not_pd(self, capsys, files):
        code, out, err = run(capsys, "spectrum", files["npd"])
        assert code == 3 and out == "" and "smallest eigenvalue -1" in err

    def test_parse_failure(self, capsys, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("2\n1 0\n")
        assert run(capsys, "spectrum", bad)[0] == 2
        assert run(capsys, "spectrum", tmp_path / "missing.txt")[0] == 2

    def test_argparse_failure(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["dderiv", "only-one-file"])
        assert info.value.code == 2

    @pytest.mark.parametrize("name", ["a14", "i4"])
    def test_decompose(self, capsys, files, name):
        code, out, _ = run(capsys, "decompose", files[name])
        rep = parse_report(out)
        assert code == 0
        assert rep.residuals["symplectic"] <= 1e-12 and rep.residuals["diagonal_relative"] <= 1e-12
        assert rep.tolerances["residual"] == 1e-8 and rep.flags["residuals_within_tol"]

    def test_decompose_near_singular(self, capsys, files):
        code, out, err = run(capsys, "decompose", files["near_singular"])
        rep = parse_report(out)
        assert "ill-conditioned" in err and any("ill-conditioned" in w for w in rep.warnings)
        assert rep.payload["kappa"] == pytest.approx(1e10)
        assert code == (0 if rep.flags["residuals_within_tol"] else 4)

    def test_decompose_residual_exit(self, capsys, files):
        code, out, _ = run(capsys, "decompose", files["c"], "--tol", "0")
        assert code == 4 and "flag residuals_within_tol: false" in out

    @pytest.mark.parametrize("a, b, m, which, value", [
        ("i2", "b24", 1, "d", 3.0), ("i4", "b1212", 2, "d", 2.0), ("i4", "b1212", 1, "sigma", -2.0),
        ("i4", "b1212", 0, "sigma", 0.0),
    ])
    def test_dderiv(self, capsys, files, a, b, m, which, value):
        code, out, _ = run(capsys, "dderiv", files[a], files[b], "--m", m, "--which", which, "--fd-check")
        rep = parse_report(out)
        assert code == 0
        assert rep.payload["value"] == pytest.approx(value, abs=1e-14)
        assert rep.residuals["fd_discrepancy"] <= 1e-4 and rep.flags["fd_agrees"]

    def test_dderiv_fd_mismatch(self, capsys, files, monkeypatch):
        import sympsens.cli as cli
        monkeypatch.setattr(cli, "FD_MISMATCH_TOL", 0.0)
        code, out, _ = run(capsys, "dderiv", files["i2"], files["b24"], "--m", "1", "--fd-check")
        assert code == 5 and "flag fd_agrees: false" in out

    def test_dderiv_bad_index(self, capsys, files):
        assert run(capsys, "dderiv", files["i2"], files["b24"], "--m", "2")[0] == 2
        assert run(capsys, "dderiv", files["i2"], files["b1212"], "--m", "1")[0] == 2

    def test_subdiff_direction(self, capsys, files):
        code, out, _ = run(capsys, "subdiff", files["i2"], "--m", "1", "--direction", files["b24"])
        rep = parse_report(out)
        assert code == 0 and rep.payload["support"] == pytest.approx(-3.0, abs=1e-14)
        assert abs(rep.payload["gap"]) <= 1e-9 and len(rep.payload["inner_products"]) == 3

    def test_subdiff_extreme_points(self, capsys, files):
        code, out, _ = run(capsys, "subdiff", files["a14"], "--m", "1", "--count", "3")
        rep = parse_report(out)
        points = [v for k, v in rep.payload.items() if k.startswith("extreme_point_")]
        assert code == 0 and len(points) == 3
        for g in points:
            np.testing.assert_allclose(g, -np.diag([1.0, 0.25]), atol=1e-10)

    def test_subdiff_exact_only(self, capsys, files):
        code, out, _ = run(capsys, "subdiff", files["i4"], "--m", "1", "--count", "0",
                           "--direction", files["b1212"])
        rep = parse_report(out)
        assert code == 0 and rep.payload["support"] == pytest.approx(-1.0, abs=1e-14)
        assert not any(k.startswith(("extreme_point", "inner")) for k in rep.payload)

    def test_verify_example1(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "example1")
        rep = parse_report(out)
        assert code == 0
        assert rep.payload["example1.midpoint_offdiagonal"] == pytest.approx(np.sqrt(10) / 2, abs=1e-12)
        assert rep.payload["example1.verdict"].startswith("indefinite")

    def test_verify_monotonicity(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "monotonicity", "--trials", "100")
        rep = parse_report(out)
        assert code == 0 and rep.payload["monotonicity.passed"] == 100 and rep.payload["monotonicity.total"] == 100

    def test_verify_failure_exit(self, capsys, monkeypatch):
        import sympsens.cli as cli
        from sympsens.suites import SuiteResult

        def failing(name, trials, seed, n):
            return SuiteResult(name, total=1, failed=1, failures=["trial 0: x=1>0"])
        monkeypatch.setattr(cli, "run_suite", failing)
        code, out, _ = run(capsys, "verify", "--suite", "williamson")
        assert code == 4 and "flag williamson: false" in out

    def test_gen(self, capsys, tmp_path):
        out1, out2 = tmp_path / "g1.txt", tmp_path / "g2.txt"
        assert run(capsys, "gen", "--spectrum", "2", "--seed", "5", "-o", out1)[0] == 0
        assert run(capsys, "gen", "--spectrum", "2", "--seed", "5", "-o", out2)[0] == 0
        assert out1.read_bytes() == out2.read_bytes()
        code, out, _ = run(capsys, "spectrum", out1)
        assert parse_report(out).payload["d"] == pytest.approx(2.0, rel=1e-8)

    def test_gen_json_degenerate(self, capsys, tmp_path):
        path = tmp_path / "g.json"
        assert run(capsys, "gen", "--spectrum", "1,1", "--spread", "0.5", "--matrix-format", "json", "-o", path)[0] == 0
        d = parse_report(run(capsys, "spectrum", path)[1]).payload["d"]
        np.testing.assert_allclose(d, [1.0, 1.0], rtol=1e-8)

    @pytest.mark.parametrize("values", ["0,1", "-2", "a", ""])
    def test_gen_bad_spectrum(self, tmp_path, values):
        with pytest.raises(SystemExit) as info:
            main(["gen", "--spectrum", values, "-o", str(tmp_path / "x.txt")])
        assert info.value.code == 2

    def test_json_flag(self, capsys, files):
        code, out, _ = run(capsys, "spectrum", files["c"], "--json")
        obj = json.loads(out)
        assert code == 0 and obj["payload"]["d"] == [2.0, 12.0] and obj["seed"] is None
        assert obj["tolerances"]["pd"] == 1e-12
