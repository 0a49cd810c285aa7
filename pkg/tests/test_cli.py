import json
import subprocess
import sys

import numpy as np
import pytest

from rvonemax import AlgorithmKind, MetricKind, StepOperatorKind
from rvonemax.cli import (AGGREGATE_COLUMNS, aggregate_rows, main, parse_args,
                          render_rows, load_plan_file)
from rvonemax.experiments import AggregateResult


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parse_args_direct_mapping():
    cfg = parse_args(["run", "--n", "20", "--r", "4", "--algo", "rls", "--op", "uniform",
                      "--metric", "interval", "--reps", "2000", "--seed", "42"])
    assert cfg.subcommand == "run"
    assert cfg.n == (20,)
    assert cfg.r == (4,)
    assert cfg.algorithms == (AlgorithmKind.RLS,)
    assert cfg.operators == (StepOperatorKind.UNIFORM,)
    assert cfg.metric == MetricKind.INTERVAL
    assert cfg.replicates == 2000
    assert cfg.seed == 42


def test_parse_args_rejects_r_below_two(capsys):
    with pytest.raises(SystemExit) as err:
        parse_args(["run", "--n", "5", "--r", "1", "--seed", "1"])
    assert err.value.code == 1
    assert "r must be >= 2" in capsys.readouterr().err


def test_unknown_flag_rejected(capsys):
    code, _, err = run_cli(capsys, ["run", "--n", "5", "--r", "3", "--seed", "1",
                                    "--frobnicate", "7"])
    assert code == 1
    assert "frobnicate" in err


def test_help_exits_zero(capsys):
    code, out, _ = run_cli(capsys, ["--help"])
    assert code == 0
    for sub in ("run", "drift", "token", "fit", "pmf"):
        assert sub in out
    code, out, _ = run_cli(capsys, ["run", "--help"])
    assert code == 0
    for flag in ("--n", "--r", "--algo", "--op", "--metric", "--target", "--start",
                 "--reps", "--seed", "--cap", "--format", "--out", "--plan"):
        assert flag in out


def test_seed_is_required(capsys):
    for argv in (["run", "--n", "5", "--r", "3"],
                 ["token", "--r", "7"],
                 ["drift", "--n", "5", "--r", "3", "--levels", "1"]):
        code, _, err = run_cli(capsys, argv)
        assert code == 1, argv
        assert "seed" in err.lower()


def test_conflicting_and_malformed_flags(capsys):
    code, _, err = run_cli(capsys, ["run", "--n", "5", "--r", "3", "--seed", "1",
                                    "--hamming-k", "2"])
    assert code == 1
    assert "--start hamming" in err
    code, _, err = run_cli(capsys, ["run", "--n", "5", "--r", "3", "--seed", "1",
                                    "--start", "hamming"])
    assert code == 1
    assert "--hamming-k" in err
    code, _, _ = run_cli(capsys, ["run", "--n", "5", "--r", "3", "--seed", "1",
                                  "--reps", "many"])
    assert code == 1


def test_pmf_output_values(capsys):
    code, out, _ = run_cli(capsys, ["pmf", "--r", "4"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "j,probability"
    probs = [float(line.split(",")[1]) for line in lines[1:]]
    assert probs == pytest.approx([6 / 11, 3 / 11, 2 / 11], abs=1e-9)
    code, out, _ = run_cli(capsys, ["pmf", "--r", "4", "--format", "json"])
    rows = json.loads(out)
    assert [row["j"] for row in rows] == [1, 2, 3]


def test_run_output_deterministic_and_schema(capsys):
    argv = ["run", "--n", "8", "--r", "3", "--algo", "rls,ea", "--op", "uniform,pm1",
            "--metric", "ring", "--reps", "5", "--seed", "9"]
    code, first, _ = run_cli(capsys, argv)
    assert code == 0
    code, second, _ = run_cli(capsys, argv)
    assert first == second  # byte-identical rerun
    lines = first.strip().splitlines()
    assert lines[0] == ",".join(AGGREGATE_COLUMNS)
    assert len(lines) == 1 + 4  # one row per algorithm x operator
    assert first.endswith("\n")
    row = lines[1].split(",")
    assert row[:5] == ["8", "3", "rls", "uniform", "ring"]


def test_json_round_trip_random_result_sets():
    rng = np.random.default_rng(123)
    for _ in range(100):
        aggs = [AggregateResult(n=int(rng.integers(1, 500)), r=int(rng.integers(2, 1000)),
                                algorithm=AlgorithmKind.RLS, operator=StepOperatorKind.HARMONIC,
                                metric=MetricKind.INTERVAL,
                                mean=float(rng.exponential(1000.0)),
                                std_error=float(rng.exponential(10.0)),
                                median=float(rng.exponential(900.0)),
                                replicates=int(rng.integers(1, 10**6)),
                                capped_count=int(rng.integers(0, 5)))
                for _ in range(rng.integers(1, 6))]
        rows = aggregate_rows(aggs)
        text = render_rows(rows, "json")
        parsed = json.loads(text)
        for row, back in zip(rows, parsed):
            for key, value in row.items():
                if isinstance(value, float):
                    assert back[key] == float(f"{value:.10g}")
                else:
                    assert back[key] == value
        assert render_rows(parsed, "json") == text  # idempotent re-emission


def test_output_to_file_and_io_error(tmp_path, capsys):
    dest = tmp_path / "out.csv"
    code, out, _ = run_cli(capsys, ["pmf", "--r", "3", "--out", str(dest)])
    assert code == 0
    assert out == ""
    assert dest.read_text().startswith("j,probability\n")
    code, _, err = run_cli(capsys, ["pmf", "--r", "3", "--out",
                                    str(tmp_path / "missing_dir" / "x.csv")])
    assert code == 2
    assert "error" in err.lower()


def test_censored_aggregates_warn_but_exit_zero(capsys):
    code, out, err = run_cli(capsys, ["run", "--n", "30", "--r", "16", "--algo", "rls",
                                      "--op", "pm1", "--start", "maxdist",
                                      "--reps", "3", "--seed", "5", "--cap", "10"])
    assert code == 0
    assert "right-censored" in err
    row = out.strip().splitlines()[1].split(",")
    assert row[-1] == "3"  # capped count
    assert row[5] == "nan"  # mean of an all-capped cell


def test_token_cli_and_capacity_exit(capsys):
    code, out, _ = run_cli(capsys, ["token", "--r", "15", "--dist", "harmonic",
                                    "--reps", "500", "--seed", "4"])
    assert code == 0
    header, row = out.strip().splitlines()
    values = dict(zip(header.split(","), row.split(",")))
    assert float(values["exact"]) == pytest.approx(6.1577, abs=1e-3)
    assert abs(float(values["mean"]) - float(values["exact"])) < 1.0
    code, _, err = run_cli(capsys, ["token", "--r", "5000", "--dist", "unit",
                                    "--reps", "10", "--seed", "1"])
    assert code == 3
    assert "4096" in err


def test_drift_cli_smoke(capsys):
    code, out, _ = run_cli(capsys, ["drift", "--n", "10", "--r", "4", "--algo", "rls",
                                    "--op", "uniform", "--levels", "1,5", "--samples", "500",
                                    "--seed", "3", "--format", "json"])
    assert code == 0
    rows = json.loads(out)
    assert [row["level"] for row in rows] == [1.0, 5.0]
    assert all(row["samples"] == 500 for row in rows)


def test_fit_cli_reads_run_output(tmp_path, capsys):
    data = tmp_path / "agg.csv"
    code, _, _ = run_cli(capsys, ["run", "--n", "6", "--r", "3,4,5,6", "--algo", "rls",
                                  "--op", "uniform", "--reps", "30", "--seed", "11",
                                  "--out", str(data)])
    assert code == 0
    code, out, _ = run_cli(capsys, ["fit", "--model", "uniform_rnlogn",
                                    "--input", str(data)])
    assert code == 0
    header, row = out.strip().splitlines()
    assert header == "model,term,coefficient,r_squared"
    fields = dict(zip(header.split(","), row.split(",")))
    assert 1.0 < float(fields["coefficient"]) < 2.0  # RLS constant is 1, not e
    # same fit from json input
    data_json = tmp_path / "agg.json"
    run_cli(capsys, ["run", "--n", "6", "--r", "3,4,5,6", "--algo", "rls",
                     "--op", "uniform", "--reps", "30", "--seed", "11",
                     "--format", "json", "--out", str(data_json)])
    code, out_json, _ = run_cli(capsys, ["fit", "--model", "uniform_rnlogn",
                                         "--input", str(data_json)])
    assert code == 0
    assert out_json == out


def test_fit_cli_missing_input_is_io_error(tmp_path, capsys):
    code, _, err = run_cli(capsys, ["fit", "--model", "linear_r",
                                    "--input", str(tmp_path / "nope.csv")])
    assert code == 2


def test_plan_file_with_inline_override(tmp_path, capsys):
    plan = tmp_path / "plan.txt"
    plan.write_text("# small sweep\n"
                    "n = [6]\n"
                    "r = [3, 4]\n"
                    "algorithms = rls\n"
                    "operators = [uniform, pm1]\n"
                    "metric = interval\n"
                    "target = zero\n"
                    "start = random\n"
                    "replicates = 4\n"
                    "seed = 21\n")
    code, out, _ = run_cli(capsys, ["run", "--plan", str(plan)])
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 1 + 4  # (r=3, r=4) x (uniform, pm1)
    # inline --r overrides the plan grid
    code, out, _ = run_cli(capsys, ["run", "--plan", str(plan), "--r", "5"])
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 1 + 2
    assert all(line.split(",")[1] == "5" for line in lines[1:])
    loaded = load_plan_file(str(plan))
    assert loaded["r"] == [3, 4]
    assert loaded["replicates"] == 4


def test_plan_file_syntax_error(tmp_path, capsys):
    broken = tmp_path / "broken.txt"
    broken.write_text("replicates 4\n")
    code, _, err = run_cli(capsys, ["run", "--plan", str(broken), "--n", "5",
                                    "--r", "3", "--seed", "1"])
    assert code == 1
    assert "key = value" in err


def test_module_entry_point():
    result = subprocess.run([sys.executable, "-m", "rvonemax", "pmf", "--r", "3"],
                            capture_output=True, text=True)
    assert result.returncode == 0
    assert result.stdout.splitlines()[0] == "j,probability"
