import csv
import io
import json
import subprocess
import sys

import pytest

from ramsphere.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestConstants:
    def test_values_and_methods(self, capsys):
        code, out, _ = run_cli(capsys, "constants")
        assert code == 0
        rep = json.loads(out)
        assert rep["p_star"]["value"] == pytest.approx(0.454997, abs=1e-4)
        assert rep["delta_star"]["value"] == pytest.approx(0.383796, abs=1e-5)
        assert abs(rep["delta_half"]["value"] - 0.375) < 1e-12
        for entry in rep.values():
            assert entry["method"]

    def test_csv_format(self, capsys):
        code, out, _ = run_cli(capsys, "constants", "--format", "csv")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert {r["name"] for r in rows} >= {"p_star", "delta_star", "c_star", "a_star"}


class TestValidation:
    def test_unknown_flag_fails_fast(self):
        proc = subprocess.run(
            [sys.executable, "-m", "ramsphere.cli", "constants", "--bogus"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 2
        assert "--bogus" in proc.stderr

    def test_out_of_range_names_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["analyze", "--t", "1"])
        assert exc.value.code == 2
        err = capsys.readouterr().err
        assert json.loads(err)["error"]["flag"] == "--t"

    def test_simulate_requires_seed(self):
        proc = subprocess.run(
            [sys.executable, "-m", "ramsphere.cli", "simulate"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 2
        assert "--seed" in proc.stderr


class TestAnalyze:
    def test_epsilon_positive(self, capsys):
        code, out, _ = run_cli(
            capsys, "analyze", "--t", "100", "--D", "100", "--C", "1", "--eta", "0",
            "--D0", "10",
        )
        assert code == 0
        rep = json.loads(out)
        assert rep["results"]["epsilon"] > 0
        assert rep["certificate"]["min_margin"] >= 0

    def test_huge_D_approaches_limit(self, capsys):
        code, out, _ = run_cli(capsys, "analyze", "--D", "1e9")
        rep = json.loads(out)
        assert rep["certificate"]["exponent_coefficient"] == pytest.approx(
            -rep["constants"]["delta_star"], abs=1e-7
        )

    def test_eta_with_closed_fprime_errors(self, capsys):
        code, out, err = run_cli(
            capsys, "analyze", "--eta", "0.5", "--fprime0", "closed"
        )
        assert code == 1
        assert "h" in json.loads(err)["error"]["message"]


class TestDeterminism:
    def test_simulate_byte_identical(self, capsys):
        args = ("simulate", "--k", "50", "--r-max", "3", "--samples", "5000", "--seed", "9")
        _, out1, _ = run_cli(capsys, *args)
        _, out2, _ = run_cli(capsys, *args)
        assert out1 == out2

    def test_construct_byte_identical(self, capsys, tmp_path):
        args = ("construct", "--t", "4", "--ell", "3", "--M", "8", "--n", "60", "--seed", "5")
        _, out1, _ = run_cli(capsys, *args)
        _, out2, _ = run_cli(capsys, *args)
        assert out1 == out2

    def test_different_seed_differs(self, capsys):
        _, out1, _ = run_cli(capsys, "simulate", "--k", "50", "--r-max", "2",
                             "--samples", "5000", "--seed", "1")
        _, out2, _ = run_cli(capsys, "simulate", "--k", "50", "--r-max", "2",
                             "--samples", "5000", "--seed", "2")
        assert out1 != out2


class TestCache:
    def test_cache_roundtrip(self, capsys, tmp_path):
        cache = str(tmp_path / "cache")
        args = ("simulate", "--k", "30", "--r-max", "2", "--samples", "2000",
                "--seed", "4", "--cache", cache)
        _, out1, _ = run_cli(capsys, *args)
        files = list((tmp_path / "cache").iterdir())
        assert len(files) == 1
        _, out2, _ = run_cli(capsys, *args)
        assert out1 == out2
        # alter the cached file: a hit must reproduce the altered bytes,
        # proving the second run came from the cache
        files[0].write_text("CACHED\n")
        _, out3, _ = run_cli(capsys, *args)
        assert out3 == "CACHED\n"

    def test_no_cache_bypasses(self, capsys, tmp_path):
        cache = str(tmp_path / "cache")
        args = ("simulate", "--k", "30", "--r-max", "2", "--samples", "2000",
                "--seed", "4", "--cache", cache)
        _, out1, _ = run_cli(capsys, *args)
        next(iter((tmp_path / "cache").iterdir())).write_text("CACHED\n")
        _, out2, _ = run_cli(capsys, *args, "--no-cache")
        assert out2 == out1

    def test_env_var_cache_dir(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("RAMSPHERE_CACHE", str(tmp_path / "envcache"))
        args = ("constants",)
        run_cli(capsys, *args)
        assert (tmp_path / "envcache").exists()


class TestConstructVerify:
    def test_planted_fault_reported(self, capsys, tmp_path):
        from ramsphere.coloring import import_coloring

        col_path = str(tmp_path / "planted.txt")
        code, out, _ = run_cli(
            capsys, "construct", "--t", "4", "--ell", "3", "--M", "8", "--n", "60",
            "--seed", "5", "--plant-fault", "--out-coloring", col_path,
        )
        assert code == 0
        rep = json.loads(out)
        assert rep["planted_fault"]["color"] == 1
        color1 = next(v for v in rep["verification"] if v["color"] == 1)
        assert color1["kt_found"]
        # the witness must be a genuine monochromatic K_4 in color 1
        col = import_coloring(col_path)
        wit = color1["witness"]
        assert len(set(wit)) == 4
        for i, u in enumerate(wit):
            for v in wit[i + 1 :]:
                assert col.color_of(u, v) == 1

    def test_roundtrip_verification_identical(self, capsys, tmp_path):
        col_path = str(tmp_path / "col.txt")
        code, out, _ = run_cli(
            capsys, "construct", "--t", "4", "--ell", "3", "--M", "8", "--n", "60",
            "--seed", "5", "--out-coloring", col_path,
        )
        rep = json.loads(out)
        code2, out2, _ = run_cli(capsys, "verify", col_path, "--t", "4")
        assert code2 == 0
        rep2 = json.loads(out2)
        got = [(v["color"], v["kt_found"], v["witness"]) for v in rep2["verification"]]
        want = [(v["color"], v["kt_found"], v["witness"]) for v in rep["verification"]]
        assert got == want

    def test_retry_exhaustion_is_clean_error(self, capsys):
        # M=120 at t=3 essentially always contains a triangle
        code, out, err = run_cli(
            capsys, "construct", "--t", "3", "--ell", "3", "--M", "120", "--n", "20",
            "--seed", "1", "--retries", "2",
        )
        assert code == 1
        msg = json.loads(err)["error"]["message"]
        assert "resampled" in msg


class TestTable:
    def test_rows_and_ordering(self, capsys):
        code, out, _ = run_cli(capsys, "table", "--ell-max", "12")
        rep = json.loads(out)
        assert len(rep["coefficients"]) == 10
        for row in rep["coefficients"]:
            assert row["sphere"] > row["sawin"] > max(row["random"], row["abbott"])

    def test_explicit_epsilon(self, capsys):
        code, out, _ = run_cli(capsys, "table", "--ell-max", "3", "--epsilon", "0.01")
        rep = json.loads(out)
        assert rep["epsilon"] == 0.01
        assert rep["coefficients"][0]["sphere"] == pytest.approx(
            rep["coefficients"][0]["sawin"] + 0.01, abs=1e-12
        )

    def test_csv(self, capsys):
        code, out, _ = run_cli(capsys, "table", "--ell-max", "4", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 2
        assert rows[0]["ell"] == "3"


def test_out_file_matches_stdout(capsys, tmp_path):
    out_path = tmp_path / "report.json"
    code = main(["constants", "--out", str(out_path)])
    out = capsys.readouterr().out
    assert out_path.read_text() == out


def test_entry_point_script():
    proc = subprocess.run(["ramsphere", "constants"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["p_star"]["value"] == pytest.approx(0.454997, abs=1e-4)


def test_cross_process_determinism():
    argv = ["ramsphere", "simulate", "--k", "40", "--r-max", "2", "--samples", "2000",
            "--seed", "13", "--no-cache"]
    first = subprocess.run(argv, capture_output=True)
    second = subprocess.run(argv, capture_output=True)
    assert first.returncode == second.returncode == 0
    assert first.stdout == second.stdout


def test_simulate_points_method(capsys):
    code, out, _ = run_cli(
        capsys, "simulate", "--k", "40", "--r-max", "2", "--samples", "2000",
        "--seed", "13", "--method", "points",
    )
    assert code == 0
    rep = json.loads(out)
    assert rep["params"]["method"] == "points"
    r2 = next(e for e in rep["estimates"] if e["r"] == 2 and e["mode"] == "clique")
    assert abs(r2["estimate"] - rep["density_check"]["p"]) <= 4 * r2["half_width_95"]


def test_analyze_natural_base(capsys):
    code, out, _ = run_cli(capsys, "analyze", "--log-base", "natural")
    assert code == 0
    rep = json.loads(out)
    assert rep["results"]["f0"] == pytest.approx(0.26603, abs=1e-5)
    assert rep["results"]["fprime0_closed"] == pytest.approx(0.565 * 0.020763, rel=1e-3)
    assert rep["results"]["epsilon"] > 0


def test_analyze_csv_fallback(capsys):
    code, out, _ = run_cli(capsys, "analyze", "--format", "csv")
    assert code == 0
    rows = {r["key"]: r["value"] for r in csv.DictReader(io.StringIO(out))}
    assert float(rows["results.epsilon"]) > 0
    assert "params.t" in rows
