"""Command-line front end: run plans, estimate drift, simulate the token
process, fit scaling models, and print the harmonic step-size law.

Data goes to the chosen destination (file or stdout) as CSV or JSON with a
stable column order and numbers formatted to 10 significant digits, so
fixed-seed invocations are byte-identical. Progress and warnings go to
stderr.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 capacity error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from .algorithms import AlgorithmKind, DEFAULT_ITERATION_CAP, RunConfig
from .drift import estimate_drift
from .experiments import (AggregateResult, ExperimentPlan, StartPolicy, TargetPolicy,
                          build_target, execute_plan, fit_scaling, MODELS, stable_seed)
from .operators import StepOperatorKind, harmonic_pmf
from .potentials import Potential
from .space import MetricKind, ProblemInstance, SpaceParams
from .token_process import (CapacityError, NAMED_DISTRIBUTIONS, TokenConfig,
                            token_expected_hitting_time_exact, token_run_batch)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_CAPACITY = 3

AGGREGATE_COLUMNS = ("n", "r", "algorithm", "operator", "metric", "mean",
                     "std_error", "median", "replicates", "capped")
DRIFT_COLUMNS = ("n", "r", "algorithm", "operator", "metric", "potential",
                 "level", "mean_drop", "ci95_halfwidth", "samples")
TOKEN_COLUMNS = ("r", "distribution", "mean", "std_error", "median",
                 "replicates", "capped", "exact")
FIT_COLUMNS = ("model", "term", "coefficient", "r_squared")
PMF_COLUMNS = ("j", "probability")


class _Parser(argparse.ArgumentParser):
    # exit status 2 is taken by I/O errors, so usage errors exit 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class CliConfig:
    subcommand: str
    plan_file: str | None = None
    n: tuple[int, ...] | None = None
    r: tuple[int, ...] | None = None
    algorithms: tuple[AlgorithmKind, ...] | None = None
    operators: tuple[StepOperatorKind, ...] | None = None
    metric: MetricKind | None = None
    target: TargetPolicy | None = None
    start: StartPolicy | None = None
    replicates: int | None = None
    seed: int | None = None
    cap: int | None = None
    potential: Potential | None = None
    levels: tuple[int, ...] = ()
    samples: int | None = None
    distribution: str | None = None
    model: str | None = None
    input_path: str | None = None
    output_format: str = "csv"
    destination: str | None = None


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip() != "")


def build_parser() -> _Parser:
    parser = _Parser(prog="rvonemax",
                     description="Run-time and drift experiments for randomized search "
                                 "heuristics on r-valued OneMax functions.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_output(p):
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="output format (default: csv)")
        p.add_argument("--out", default=None, metavar="PATH",
                       help="destination file (default: stdout)")

    p_run = sub.add_parser("run", help="execute an experiment plan")
    p_run.add_argument("--plan", default=None, metavar="PATH",
                       help="plan file with flat key = value lines")
    p_run.add_argument("--n", default=None, metavar="LIST", help="dimension(s), e.g. 50 or 50,100")
    p_run.add_argument("--r", default=None, metavar="LIST", help="alphabet size(s), e.g. 4 or 4,8")
    p_run.add_argument("--algo", default=None, metavar="LIST", help="rls and/or ea")
    p_run.add_argument("--op", default=None, metavar="LIST", help="uniform, pm1 and/or harmonic")
    p_run.add_argument("--metric", default=None, choices=("interval", "ring"))
    p_run.add_argument("--target", default=None, choices=("zero", "center", "random"))
    p_run.add_argument("--start", default=None, choices=("random", "maxdist", "hamming"))
    p_run.add_argument("--hamming-k", type=int, default=None, metavar="K",
                       help="start Hamming distance (with --start hamming)")
    p_run.add_argument("--reps", type=int, default=None, metavar="N")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--cap", type=int, default=None, metavar="T",
                       help="iteration cap per run")
    add_output(p_run)

    p_drift = sub.add_parser("drift", help="estimate one-step drift at planted levels")
    p_drift.add_argument("--n", type=int, required=True)
    p_drift.add_argument("--r", type=int, required=True)
    p_drift.add_argument("--algo", default="rls")
    p_drift.add_argument("--op", default="uniform")
    p_drift.add_argument("--metric", default="interval", choices=("interval", "ring"))
    p_drift.add_argument("--target", default="zero", choices=("zero", "center", "random"))
    p_drift.add_argument("--potential", default="hamming",
                         help="hamming, fitness, or expweight[:base]")
    p_drift.add_argument("--levels", required=True, metavar="LIST",
                         help="comma-separated potential levels, e.g. 1,5,10")
    p_drift.add_argument("--samples", type=int, default=10000)
    p_drift.add_argument("--seed", type=int, required=True)
    add_output(p_drift)

    p_token = sub.add_parser("token", help="simulate the token-movement process")
    p_token.add_argument("--r", type=int, required=True)
    p_token.add_argument("--dist", default="harmonic", choices=NAMED_DISTRIBUTIONS)
    p_token.add_argument("--reps", type=int, default=10000)
    p_token.add_argument("--seed", type=int, required=True)
    p_token.add_argument("--cap", type=int, default=None)
    add_output(p_token)

    p_fit = sub.add_parser("fit", help="fit a named scaling model to aggregates")
    p_fit.add_argument("--model", required=True, choices=sorted(MODELS))
    p_fit.add_argument("--input", required=True, metavar="PATH",
                       help="aggregates as emitted by 'run' (csv or json)")
    add_output(p_fit)

    p_pmf = sub.add_parser("pmf", help="print the harmonic step-size law")
    p_pmf.add_argument("--r", type=int, required=True)
    add_output(p_pmf)

    return parser


def load_plan_file(path: str) -> dict:
    """Parse a flat plan document of 'key = value' lines.

    Values are integers, floats, bare or quoted strings, or [a, b, c] lists
    of these; '#' starts a comment.
    """
    values: dict = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, _, rhs = line.partition("=")
            values[key.strip()] = _parse_plan_value(rhs.strip())
    return values


def _parse_plan_value(text: str):
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        if not inner:
            return []
        return [_parse_plan_scalar(part.strip()) for part in inner.split(",")]
    return _parse_plan_scalar(text)


def _parse_plan_scalar(text: str):
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "'\"":
        return text[1:-1]
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_args(argv) -> CliConfig:
    """Parse and validate arguments; exits with status 1 on usage errors."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = CliConfig(subcommand=ns.subcommand,
                    output_format=getattr(ns, "format", "csv"),
                    destination=getattr(ns, "out", None))
    try:
        if ns.subcommand == "run":
            _fill_run_config(cfg, ns)
        elif ns.subcommand == "drift":
            _fill_drift_config(cfg, ns, parser)
        elif ns.subcommand == "token":
            cfg.r = (ns.r,)
            cfg.distribution = ns.dist
            cfg.replicates = ns.reps
            cfg.seed = ns.seed
            cfg.cap = ns.cap
            if ns.r < 1:
                parser.error("r must be >= 1")
        elif ns.subcommand == "fit":
            cfg.model = ns.model
            cfg.input_path = ns.input
        elif ns.subcommand == "pmf":
            cfg.r = (ns.r,)
            if ns.r < 2:
                parser.error("r must be >= 2")
    except ValueError as exc:
        parser.error(str(exc))
    if cfg.subcommand in ("run", "drift", "token") and cfg.seed is None:
        parser.error("--seed is required (runs must be reproducible)")
    if cfg.subcommand in ("run", "drift") and cfg.r is not None:
        bad = [r for r in cfg.r if r < 2]
        if bad:
            parser.error(f"r must be >= 2, got {bad[0]}")
    return cfg


def _as_list(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _fill_run_config(cfg: CliConfig, ns) -> None:
    plan = load_plan_file(ns.plan) if ns.plan else {}
    cfg.plan_file = ns.plan

    def pick(flag_value, key, default=None):
        # inline flags win over plan-file values
        if flag_value is not None:
            return flag_value
        return plan.get(key, default)

    n = pick(_int_list(ns.n) if ns.n else None, "n")
    r = pick(_int_list(ns.r) if ns.r else None, "r")
    if n is None or r is None:
        raise ValueError("run needs --n and --r (flags or plan file)")
    cfg.n = tuple(int(v) for v in _as_list(n))
    cfg.r = tuple(int(v) for v in _as_list(r))
    algos = pick(ns.algo, "algorithms", "rls")
    ops = pick(ns.op, "operators", "uniform")
    cfg.algorithms = tuple(AlgorithmKind.parse(a) for a in _split_names(algos))
    cfg.operators = tuple(StepOperatorKind.parse(o) for o in _split_names(ops))
    cfg.metric = MetricKind.parse(str(pick(ns.metric, "metric", "interval")))
    cfg.target = TargetPolicy.parse(str(pick(ns.target, "target", "zero")))
    start_name = str(pick(ns.start, "start", "random")).strip().lower()
    hamming_k = pick(ns.hamming_k, "hamming_k")
    if start_name == "hamming":
        if hamming_k is None:
            raise ValueError("--start hamming needs --hamming-k")
        cfg.start = StartPolicy.fixed_hamming(int(hamming_k))
    elif hamming_k is not None:
        raise ValueError("--hamming-k is only valid with --start hamming")
    elif start_name == "random":
        cfg.start = StartPolicy.uniform_random()
    elif start_name == "maxdist":
        cfg.start = StartPolicy.all_max_distance()
    else:
        raise ValueError(f"unknown start policy {start_name!r}")
    cfg.replicates = int(pick(ns.reps, "replicates", 100))
    seed = pick(ns.seed, "seed")
    cfg.seed = None if seed is None else int(seed)
    cap = pick(ns.cap, "cap", DEFAULT_ITERATION_CAP)
    cfg.cap = int(cap)


def _split_names(value) -> list[str]:
    if isinstance(value, list):
        return [str(v) for v in value]
    return [part for part in str(value).split(",") if part.strip()]


def _fill_drift_config(cfg: CliConfig, ns, parser) -> None:
    cfg.n = (ns.n,)
    cfg.r = (ns.r,)
    cfg.algorithms = (AlgorithmKind.parse(ns.algo),)
    cfg.operators = (StepOperatorKind.parse(ns.op),)
    cfg.metric = MetricKind.parse(ns.metric)
    cfg.target = TargetPolicy.parse(ns.target)
    cfg.potential = Potential.parse(ns.potential)
    if cfg.potential.kind == "exp_weight":
        parser.error("the drift subcommand supports hamming and fitness levels; "
                     "use the library API for exp_weight distance vectors")
    cfg.levels = _int_list(ns.levels)
    if not cfg.levels:
        parser.error("--levels must name at least one level")
    cfg.samples = ns.samples
    cfg.seed = ns.seed


# ---------------------------------------------------------------------------
# Output writers
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def _json_ready(value):
    if isinstance(value, float):
        return float(f"{value:.10g}")
    if isinstance(value, (int, np.integer)):
        return int(value)
    return value


def render_rows(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        payload = [{k: _json_ready(v) for k, v in row.items()} for row in rows]
        return json.dumps(payload, indent=1) + "\n"
    if not rows:
        return "\n"
    header = ",".join(rows[0].keys())
    lines = [header]
    lines.extend(",".join(_fmt(v) for v in row.values()) for row in rows)
    return "\n".join(lines) + "\n"


def emit_results(rows: list[dict], fmt: str, destination: str | None) -> int:
    """Write rows to the destination; returns the process exit status."""
    if not rows:
        print("nothing to emit", file=sys.stderr)
        return EXIT_IO
    text = render_rows(rows, fmt)
    if destination in (None, "-"):
        sys.stdout.write(text)
        return EXIT_OK
    with open(destination, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    return EXIT_OK


def _row(columns: tuple[str, ...], *values) -> dict:
    assert len(columns) == len(values)
    return dict(zip(columns, values))


def aggregate_rows(aggregates: list[AggregateResult]) -> list[dict]:
    return [_row(AGGREGATE_COLUMNS, agg.n, agg.r, agg.algorithm.value, agg.operator.value,
                 agg.metric.value, agg.mean, agg.std_error, agg.median, agg.replicates,
                 agg.capped_count)
            for agg in aggregates]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_run(cfg: CliConfig) -> int:
    plan = ExperimentPlan(grid=tuple((n, r) for n in cfg.n for r in cfg.r),
                          algorithms=cfg.algorithms, operators=cfg.operators,
                          metric=cfg.metric, target_policy=cfg.target,
                          start_policy=cfg.start, replicates=cfg.replicates,
                          base_seed=cfg.seed, iteration_cap=cfg.cap)
    cells = len(plan.grid) * len(plan.algorithms) * len(plan.operators)
    print(f"running {cells} cell(s) x {plan.replicates} replicate(s)", file=sys.stderr)
    aggregates = execute_plan(plan)
    rows = aggregate_rows(aggregates)
    censored = [agg for agg in aggregates if agg.censored]
    if censored:
        print(f"warning: {len(censored)} aggregate(s) are right-censored "
              f"(capped runs excluded from means)", file=sys.stderr)
    return emit_results(rows, cfg.output_format, cfg.destination)


def _cmd_drift(cfg: CliConfig) -> int:
    n, r = cfg.n[0], cfg.r[0]
    params = SpaceParams(n=n, r=r)
    target_rng = np.random.default_rng(stable_seed(cfg.seed, "target"))
    instance = ProblemInstance(params=params, metric=cfg.metric,
                               target=build_target(cfg.target, params, target_rng))
    config = RunConfig(algorithm=cfg.algorithms[0], operator=cfg.operators[0],
                       instance=instance, seed=cfg.seed)
    estimates = estimate_drift(config, cfg.potential, cfg.levels, cfg.samples)
    rows = [_row(DRIFT_COLUMNS, n, r, cfg.algorithms[0].value, cfg.operators[0].value,
                 cfg.metric.value, cfg.potential.label, est.level, est.mean_drop,
                 est.confidence_halfwidth, est.samples)
            for est in estimates]
    return emit_results(rows, cfg.output_format, cfg.destination)


def _cmd_token(cfg: CliConfig) -> int:
    r = cfg.r[0]
    exact = token_expected_hitting_time_exact(r, cfg.distribution)
    kwargs = {} if cfg.cap is None else {"iteration_cap": cfg.cap}
    records = token_run_batch(TokenConfig(r=r, distribution=cfg.distribution,
                                          seed=cfg.seed, **kwargs), cfg.replicates)
    times = np.array([rec.hitting_time for rec in records if not rec.capped], dtype=np.float64)
    capped = sum(1 for rec in records if rec.capped)
    if times.size == 0:
        mean = median = float("nan")
        std_error = 0.0
    else:
        mean = float(times.mean())
        median = float(np.median(times))
        std_error = float(times.std(ddof=1) / np.sqrt(times.size)) if times.size > 1 else 0.0
    rows = [_row(TOKEN_COLUMNS, r, cfg.distribution, mean, std_error, median,
                 cfg.replicates, capped, exact)]
    if capped:
        print(f"warning: {capped} run(s) hit the iteration cap", file=sys.stderr)
    return emit_results(rows, cfg.output_format, cfg.destination)


def read_aggregate_points(path: str) -> list[tuple[int, int, float]]:
    """Read (n, r, mean) triples from a CSV or JSON aggregates file."""
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    stripped = text.lstrip()
    if stripped.startswith("[") or stripped.startswith("{"):
        rows = json.loads(text)
    else:
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines:
            raise ValueError(f"{path}: empty aggregates file")
        header = lines[0].split(",")
        rows = [dict(zip(header, line.split(","))) for line in lines[1:]]
    points = []
    for row in rows:
        try:
            points.append((int(row["n"]), int(row["r"]), float(row["mean"])))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"{path}: rows need n, r and mean columns ({exc})") from exc
    return points


def _cmd_fit(cfg: CliConfig) -> int:
    points = read_aggregate_points(cfg.input_path)
    fit = fit_scaling(points, cfg.model)
    rows = [_row(FIT_COLUMNS, fit.model, term, coef, fit.r_squared)
            for term, coef in zip(fit.terms, fit.coefficients)]
    return emit_results(rows, cfg.output_format, cfg.destination)


def _cmd_pmf(cfg: CliConfig) -> int:
    pmf = harmonic_pmf(cfg.r[0])
    rows = [_row(PMF_COLUMNS, j, float(p)) for j, p in enumerate(pmf, start=1)]
    return emit_results(rows, cfg.output_format, cfg.destination)


def main(argv=None) -> int:
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {"run": _cmd_run, "drift": _cmd_drift, "token": _cmd_token,
                "fit": _cmd_fit, "pmf": _cmd_pmf}
    try:
        return handlers[cfg.subcommand](cfg)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
