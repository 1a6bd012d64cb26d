"""End-to-end command-line checks.

Everything runs in-process through cli.main so exit codes and stdout are
asserted directly; one subprocess smoke test covers the `-m` entry point.
"""

import json
import math
import subprocess
import sys

import pytest

from graphpurify.cli import SEED_ENV_VAR, main
from graphpurify.graphs import path_graph, write_edge_list


def run_cli(capsys, *args):
    rc = main(list(args))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def envelope(stdout):
    doc = json.loads(stdout)
    assert set(doc) == {"command", "config", "results", "version"}
    return doc


class TestThreshold:
    def test_json_output(self, capsys):
        rc, out, _ = run_cli(capsys, "threshold", "--B", "1", "--json")
        assert rc == 0
        doc = envelope(out)
        assert doc["command"] == "threshold"
        res = doc["results"]
        assert res["t_crit"] == pytest.approx(1.134593, abs=1e-6)
        assert res["t_crit"] == pytest.approx(-1.0 / math.log(math.sqrt(2) - 1))
        assert res["p_star"] == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-12)
        verdicts = [row["purifiable"] for row in res["table"]]
        assert verdicts == [True, False]  # 0.99 T_crit vs 1.01 T_crit
        for row in res["table"]:
            assert set(row) == {"T", "p", "purifiable"}

    def test_field_scale_scales_linearly(self, capsys):
        _, out, _ = run_cli(capsys, "threshold", "--B", "2.5", "--json")
        t1 = envelope(out)["results"]["t_crit"]
        _, out, _ = run_cli(capsys, "threshold", "--B", "1.0", "--json")
        assert t1 == pytest.approx(2.5 * envelope(out)["results"]["t_crit"])

    def test_human_output(self, capsys):
        rc, out, _ = run_cli(capsys, "threshold", "--B", "1")
        assert rc == 0
        assert "T_crit = 1.134593" in out
        assert "purifiable: yes" in out and "purifiable: no" in out

    def test_negative_field_rejected(self, capsys):
        rc, _, err = run_cli(capsys, "threshold", "--B", "-1")
        assert rc == 2
        assert err.strip()


class TestSimulate:
    def test_worker_count_does_not_change_output_bytes(self, capsys):
        base = [
            "simulate", "--graph", "path:3", "--p", "0.1",
            "--shots", "5000", "--seed", "3", "--json",
        ]
        rc, one, _ = run_cli(capsys, *base, "--workers", "1")
        assert rc == 0
        rc, three, _ = run_cli(capsys, *base, "--workers", "3")
        assert rc == 0
        assert one == three
        res = envelope(one)["results"]
        assert res["shots"] == 5000
        assert res["converged"] is True
        assert 0.0 <= res["fidelity"] <= 1.0

    def test_repeat_run_identical(self, capsys):
        args = ["simulate", "--graph", "cycle:3", "--p", "0.08",
                "--shots", "400", "--seed", "9", "--json"]
        _, a, _ = run_cli(capsys, *args)
        _, b, _ = run_cli(capsys, *args)
        assert a == b

    def test_temperature_input_converts_to_error_prob(self, capsys):
        rc, out, _ = run_cli(
            capsys, "simulate", "--graph", "path:3", "--T", "1.0", "--B", "1.0",
            "--shots", "50", "--seed", "1", "--json",
        )
        assert rc == 0
        doc = envelope(out)
        expected = 1.0 / (1.0 + math.exp(1.0))
        assert doc["config"]["p"] == pytest.approx(expected, rel=1e-12)
        assert doc["results"]["p"] == pytest.approx(expected, rel=1e-12)

    def test_noise_must_be_specified_exactly_once(self, capsys):
        rc, _, _ = run_cli(
            capsys, "simulate", "--graph", "path:3", "--p", "0.1",
            "--T", "1.0", "--B", "1.0", "--shots", "10",
        )
        assert rc == 2
        rc, _, _ = run_cli(capsys, "simulate", "--graph", "path:3", "--shots", "10")
        assert rc == 2

    def test_error_prob_range_enforced(self, capsys):
        rc, _, _ = run_cli(
            capsys, "simulate", "--graph", "path:3", "--p", "0.6", "--shots", "10"
        )
        assert rc == 2

    def test_seed_env_var(self, capsys, monkeypatch):
        monkeypatch.setenv(SEED_ENV_VAR, "77")
        rc, out, _ = run_cli(
            capsys, "simulate", "--graph", "path:3", "--p", "0.1",
            "--shots", "20", "--json",
        )
        assert rc == 0
        assert envelope(out)["config"]["seed"] == 77

    def test_explicit_seed_beats_env_var(self, capsys, monkeypatch):
        monkeypatch.setenv(SEED_ENV_VAR, "77")
        _, out, _ = run_cli(
            capsys, "simulate", "--graph", "path:3", "--p", "0.1",
            "--shots", "20", "--seed", "5", "--json",
        )
        assert envelope(out)["config"]["seed"] == 5

    def test_bad_env_seed_rejected(self, capsys, monkeypatch):
        monkeypatch.setenv(SEED_ENV_VAR, "not-a-number")
        rc, _, _ = run_cli(
            capsys, "simulate", "--graph", "path:3", "--p", "0.1", "--shots", "20"
        )
        assert rc == 2


class TestScan:
    def test_verdict_flips_across_threshold(self, capsys):
        rc, out, _ = run_cli(
            capsys, "scan", "--graph", "path:3", "--p-grid", "0.28,0.30",
            "--shots", "500", "--seed", "2", "--json",
        )
        assert rc == 0
        rows = envelope(out)["results"]
        assert [r["p"] for r in rows] == [0.28, 0.30]
        assert [r["purifiable"] for r in rows] == [True, False]
        assert [r["converged"] for r in rows] == [True, False]
        assert rows[1]["fidelity"] is None
        assert all(r["temperature"] is None for r in rows)

    def test_temperature_grid(self, capsys):
        rc, out, _ = run_cli(
            capsys, "scan", "--graph", "path:3", "--T-grid", "0.9,1.4",
            "--B", "1.0", "--shots", "200", "--seed", "2", "--json",
        )
        assert rc == 0
        rows = envelope(out)["results"]
        # rows come back ordered by error probability: hot end last
        assert [r["temperature"] for r in rows] == [0.9, 1.4]
        assert [r["purifiable"] for r in rows] == [True, False]

    def test_temperature_grid_needs_field_scale(self, capsys):
        rc, _, _ = run_cli(
            capsys, "scan", "--graph", "path:3", "--T-grid", "1.0", "--shots", "10"
        )
        assert rc == 2

    def test_exactly_one_grid(self, capsys):
        rc, _, _ = run_cli(
            capsys, "scan", "--graph", "path:3", "--p-grid", "0.1",
            "--T-grid", "1.0", "--B", "1.0", "--shots", "10",
        )
        assert rc == 2
        rc, _, _ = run_cli(capsys, "scan", "--graph", "path:3", "--shots", "10")
        assert rc == 2


class TestRatesAndPlan:
    def test_rates_star_family(self, capsys):
        rc, out, _ = run_cli(
            capsys, "rates", "--family", "ghz:5", "--p", "0.05", "--json"
        )
        assert rc == 0
        res = envelope(out)["results"]
        assert res["n_geo_formula"] == 4
        assert res["n_geo_plan"] == 4
        assert res["r2"] > 0.0
        assert res["r_psi_lower"] == pytest.approx(res["r2"] / 4)
        assert res["r_psi_lower"] <= res["r_psi_upper"] <= res["r2"]

    def test_rates_requires_one_source(self, capsys):
        rc, _, _ = run_cli(
            capsys, "rates", "--graph", "path:3", "--family", "path:3", "--p", "0.1"
        )
        assert rc == 2
        rc, _, _ = run_cli(capsys, "rates", "--p", "0.1")
        assert rc == 2

    def test_rates_family_must_parse(self, capsys):
        rc, _, _ = run_cli(capsys, "rates", "--family", "some/file.txt", "--p", "0.1")
        assert rc == 2

    def test_plan_path(self, capsys):
        rc, out, _ = run_cli(capsys, "plan", "--graph", "path:4", "--json")
        assert rc == 0
        res = envelope(out)["results"]
        assert res["n_geo_plan"] == 3
        assert res["n_geo_formula"] == 3
        rounds = res["rounds"]
        assert len(rounds) == 3
        edges = [tuple(item["edge"]) for rnd in rounds for item in rnd]
        assert sorted(edges) == [(0, 1), (1, 2), (2, 3)]
        for rnd in rounds:
            for item in rnd:
                assert set(item) == {"edge", "z_measure_set"}

    def test_plan_from_edge_list_file(self, capsys, tmp_path):
        f = tmp_path / "chain.edges"
        f.write_text(write_edge_list(path_graph(3)))
        rc, out, _ = run_cli(capsys, "plan", "--graph", str(f), "--json")
        assert rc == 0
        res = envelope(out)["results"]
        assert res["n_geo_plan"] == 2
        assert res["n_geo_formula"] is None  # file input carries no family hint

    def test_missing_graph_file(self, capsys):
        rc, _, _ = run_cli(capsys, "plan", "--graph", "no/such/file.edges")
        assert rc == 2


class TestVerifyOracle:
    def test_small_sweep_passes(self, capsys):
        rc, out, err = run_cli(capsys, "verify-oracle", "--max-n", "2", "--json")
        assert rc == 0
        res = envelope(out)["results"]
        assert res["ok"] is True
        assert res["mismatches"] == 0
        assert res["graphs"] == 3
        assert res["failures"] == []
        assert "done" in err  # progress goes to stderr, not stdout


class TestCheckOptimality:
    def test_triangle_is_negative_everywhere(self, capsys):
        rc, out, _ = run_cli(
            capsys, "check-optimality", "--graph", "cycle:3", "--json"
        )
        assert rc == 0  # a clean negative result is still a success
        res = envelope(out)["results"]
        assert res["graph_ok"] is False
        assert len(res["edges"]) == 3
        assert all(row["reconstructable"] is False for row in res["edges"])

    def test_path_is_positive(self, capsys):
        rc, out, _ = run_cli(
            capsys, "check-optimality", "--graph", "path:3", "--json"
        )
        assert rc == 0
        res = envelope(out)["results"]
        assert res["graph_ok"] is True
        assert all(row["reconstructable"] is True for row in res["edges"])

    def test_capacity_exit_code(self, capsys):
        rc, _, _ = run_cli(capsys, "check-optimality", "--graph", "path:9")
        assert rc == 3


class TestOutputFile:
    def test_out_file_matches_stdout(self, capsys, tmp_path):
        f = tmp_path / "run.json"
        rc, out, _ = run_cli(
            capsys, "threshold", "--B", "1", "--json", "--out", str(f)
        )
        assert rc == 0
        assert f.read_text() == out

    def test_out_file_without_json_flag(self, capsys, tmp_path):
        f = tmp_path / "run.json"
        rc, out, _ = run_cli(capsys, "threshold", "--B", "1", "--out", str(f))
        assert rc == 0
        doc = json.loads(f.read_text())  # file always gets the JSON envelope
        assert doc["command"] == "threshold"
        assert "T_crit" in out  # stdout stays human-readable

    def test_unwritable_out_path(self, capsys, tmp_path):
        rc, _, _ = run_cli(
            capsys, "threshold", "--B", "1", "--out", str(tmp_path / "no" / "x.json")
        )
        assert rc == 2


class TestUsageErrors:
    def test_no_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_unknown_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_simulate_requires_graph(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--p", "0.1"])
        assert exc.value.code == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "graphpurify", "threshold", "--B", "1", "--json"],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["results"]["t_crit"] == pytest.approx(1.134593, abs=1e-6)
