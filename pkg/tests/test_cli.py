"""CLI: parsing, reports, caching, determinism."""

import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest

from eslab.errors import ConfigError
from eslab.cli import (
    RunConfig,
    emit_report,
    farey_fractions,
    main,
    parse_config,
    run_scan,
)


def run_cli(args, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "eslab.cli", *args],
        capture_output=True,
        text=True,
        env=env,
    )


class TestParse:
    def test_expsum_theta_derives_H(self):
        cfg = parse_config(
            ["expsum", "--N", "10000000", "--theta", "0.7", "--k", "2", "--alpha", "1/3"]
        )
        assert cfg.subcommand == "expsum"
        from eslab.cli import _resolve_window

        assert _resolve_window(cfg.params).length == 79432

    def test_missing_required_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            parse_config(["scan"])
        assert exc.value.code == 2

    def test_H_theta_conflict(self):
        with pytest.raises(SystemExit) as exc:
            parse_config(["expsum", "--N", "100", "--H", "5", "--theta", "0.5"])
        assert exc.value.code == 2

    def test_waring_feasibility(self):
        cfg = parse_config(
            ["waring", "--k", "2", "--s", "5", "--N", "5000000", "--theta", "0.8"]
        )
        from eslab.circle import WaringInstance

        inst = WaringInstance.create(
            cfg.params["k"], cfg.params["s"], cfg.params["N"], cfg.params["theta"]
        )
        assert inst.feasible

    def test_theta_note_on_stderr(self):
        r = run_cli(["sieve", "--N", "1000", "--theta", "0.6"])
        assert r.returncode == 0
        assert "exploratory" in r.stderr

    def test_exit_codes(self):
        assert run_cli(["scan"]).returncode == 2
        assert run_cli(["vmvt", "--t", "9", "--k", "2", "--H", "100"]).returncode == 3
        r = run_cli(["sieve", "--N", "100", "--H", "10", "--out", "/nope/x.csv"])
        assert r.returncode == 4


class TestFarey:
    def test_order_five_count(self):
        # 1 + sum_{q<=5} phi(q) = 11 fractions including both endpoints
        fr = farey_fractions(5)
        assert len(fr) == 11
        assert fr[0] == 0 and fr[-1] == 1

    def test_sorted_reduced(self):
        fr = farey_fractions(20)
        assert fr == sorted(fr)
        assert all(f.denominator <= 20 for f in fr)
        phi_sum = sum(
            sum(1 for a in range(1, q + 1) if math.gcd(a, q) == 1) for q in range(1, 21)
        )
        assert len(fr) == phi_sum + 1


class TestEmit:
    def test_header_only_when_empty_allowed(self, tmp_path):
        path = tmp_path / "r.csv"
        n = emit_report([], "csv", str(path), allow_empty=True)
        assert n == 0  # no rows -> nothing to write, by design
        assert path.read_bytes() == b""

    def test_empty_rejected_by_default(self):
        with pytest.raises(ConfigError):
            emit_report([], "csv", None)

    def test_json_array_length(self, tmp_path):
        path = tmp_path / "r.json"
        emit_report([{"a": 1}, {"a": 2}], "json", str(path))
        data = json.loads(path.read_text())
        assert isinstance(data, list) and len(data) == 2

    def test_round_trip_full_precision(self, tmp_path):
        rows = [
            {"x": 0.1 + 0.2, "y": 1 / 3, "z": 12345678901234567.0, "w": -2e-300},
            {"x": math.pi, "y": math.exp(1), "z": 0.0, "w": 5e300},
        ]
        path = tmp_path / "r.csv"
        emit_report(rows, "csv", str(path))
        with open(path, newline="") as fh:
            back = list(csv.DictReader(fh))
        for want, got in zip(rows, back):
            for key in want:
                assert float(got[key]) == want[key]
        jpath = tmp_path / "r.json"
        emit_report(rows, "json", str(jpath))
        for want, got in zip(rows, json.loads(jpath.read_text())):
            assert got == want

    def test_quoting(self, tmp_path):
        path = tmp_path / "r.csv"
        emit_report([{"a": 'he said "hi", twice', "b": 1}], "csv", str(path))
        with open(path, newline="") as fh:
            back = list(csv.reader(fh))
        assert back[1][0] == 'he said "hi", twice'

    def test_arity_check(self):
        with pytest.raises(ConfigError):
            emit_report([{"a": 1}, {"a": 1, "b": 2}], "csv", None)


def small_scan_cfg(tmp_path, workers=1, cache=None):
    return RunConfig(
        subcommand="scan",
        params={
            "N": 10**6,
            "H": None,
            "theta": 0.7,
            "kmax": 2,
            "farey": 3,
            "perturb": [0.0, 10.0],
            "qmax": 200,
            "arc_exponent": 2.0,
        },
        out=str(tmp_path / "scan.csv"),
        fmt="csv",
        cache_dir=cache,
        workers=workers,
    )


class TestScanRuns:
    def test_row_count_is_grid_size(self, tmp_path):
        cfg = small_scan_cfg(tmp_path)
        rows = run_scan(cfg)
        # kmax * |Farey(3)| * |perturb| = 2 * 5 * 2
        assert len(rows) == 20

    def test_exact_farey_points_when_no_perturbation(self, tmp_path):
        cfg = small_scan_cfg(tmp_path)
        cfg.params["perturb"] = [0.0]
        rows = run_scan(cfg)
        assert len(rows) == 10
        third = [r for r in rows if r["alpha"].startswith("1/3") and r["k"] == 1][0]
        assert third["arc_kind"] == "major"
        assert (third["arc_a"], third["arc_q"]) == (1, 3)
        assert third["normalized_lambda"] == pytest.approx(0.5, rel=0.1)

    def test_workers_do_not_change_report(self, tmp_path):
        rows1 = run_scan(small_scan_cfg(tmp_path, workers=1))
        rows8 = run_scan(small_scan_cfg(tmp_path, workers=8))
        assert rows1 == rows8

    def test_cache_warm_equals_cold(self, tmp_path):
        cache = tmp_path / "cache"
        cfg = small_scan_cfg(tmp_path, cache=str(cache))
        cold = run_scan(cfg)
        assert any(cache.iterdir())
        warm = run_scan(cfg)
        assert cold == warm


class TestEndToEnd:
    def test_expsum_json(self, tmp_path):
        out = tmp_path / "r.json"
        r = run_cli(
            ["expsum", "--N", "100000", "--H", "1000", "--alpha", "1/4",
             "--format", "json", "--out", str(out)]
        )
        assert r.returncode == 0
        rec = json.loads(out.read_text())[0]
        assert rec["op"] == "lambda_exp_sum"
        assert rec["terms"] == 1000

    def test_vmvt_csv(self):
        r = run_cli(["vmvt", "--t", "2", "--k", "1", "--H", "2", "--H", "5"])
        assert r.returncode == 0
        rows = list(csv.DictReader(io.StringIO(r.stdout)))
        assert [int(x["J"]) for x in rows] == [6, 85]

    def test_waring_json_fields(self):
        r = run_cli(
            ["waring", "--k", "2", "--s", "5", "--N", "4999997", "--theta", "0.8",
             "--qmax", "500", "--limit", "2"]
        )
        assert r.returncode == 0
        rec = json.loads(r.stdout)[0]
        for key in ("rho", "main_term", "series", "integral", "reps"):
            assert key in rec
        assert len(rec["reps"]) == 2

    def test_hb_verify(self):
        r = run_cli(["hb-verify", "--N", "20000", "--H", "500"])
        assert r.returncode == 0
        row = list(csv.DictReader(io.StringIO(r.stdout)))[0]
        assert float(row["rel_err"]) < 1e-9

    def test_nit_round_trip(self):
        r = run_cli(
            ["nit", "--N", "1000000", "--theta", "0.75", "--k", "3",
             "--t0", "250000", "--B", "2"]
        )
        assert r.returncode == 0
        rec = json.loads(r.stdout)[0]
        assert rec["t"] == pytest.approx(250000, rel=0.01)
        assert rec["max_dev"] <= 0.01

    def test_eslab_cache_env(self, tmp_path):
        cache = tmp_path / "envcache"
        r = run_cli(
            ["sieve", "--N", "5000", "--H", "100"],
            env_extra={"ESLAB_CACHE": str(cache)},
        )
        assert r.returncode == 0
        assert list(cache.glob("table_*.bin"))
