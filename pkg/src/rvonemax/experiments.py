"""Replicated run-time studies over (n, r) grids and scaling-law fitting.

A plan sweeps a grid of problem sizes over chosen algorithms and step
operators, with declarative policies for the hidden target and the start
point. Every replicate derives its own seed from the plan's base seed via a
keyed hash of the cell identity, so results do not depend on execution
order or worker count.

Aggregates can be fed to a least-squares fitter with a small catalog of
named scaling models (all linear in their coefficients).
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .algorithms import (DEFAULT_ITERATION_CAP, AlgorithmKind, RunConfig, RunRecord, run)
from .drift import plant_state_at_hamming
from .operators import StepOperatorKind
from .space import MetricKind, ProblemInstance, SpaceParams

_MASK64 = 0xFFFFFFFFFFFFFFFF


def stable_seed(base_seed: int, key: str) -> int:
    """Platform-stable 64-bit seed for a named unit of work."""
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8,
                             key=(base_seed & _MASK64).to_bytes(8, "little")).digest()
    return int.from_bytes(digest, "little")


class TargetPolicy(Enum):
    ALL_ZERO = "zero"
    CENTER = "center"
    UNIFORM_RANDOM = "random"

    @classmethod
    def parse(cls, name: str) -> "TargetPolicy":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown target policy {name!r}") from None


class StartKind(Enum):
    UNIFORM_RANDOM = "random"
    FIXED_HAMMING = "hamming"
    ALL_MAX_DISTANCE = "maxdist"


@dataclass(frozen=True)
class StartPolicy:
    kind: StartKind
    hamming_k: int | None = None

    def __post_init__(self) -> None:
        if self.kind is StartKind.FIXED_HAMMING:
            if self.hamming_k is None or self.hamming_k < 0:
                raise ValueError("fixed-hamming start needs a non-negative k")
        elif self.hamming_k is not None:
            raise ValueError(f"start policy {self.kind.value!r} takes no k")

    @classmethod
    def uniform_random(cls) -> "StartPolicy":
        return cls(StartKind.UNIFORM_RANDOM)

    @classmethod
    def fixed_hamming(cls, k: int) -> "StartPolicy":
        return cls(StartKind.FIXED_HAMMING, k)

    @classmethod
    def all_max_distance(cls) -> "StartPolicy":
        return cls(StartKind.ALL_MAX_DISTANCE)


@dataclass(frozen=True)
class ExperimentPlan:
    grid: tuple[tuple[int, int], ...]
    algorithms: tuple[AlgorithmKind, ...]
    operators: tuple[StepOperatorKind, ...]
    metric: MetricKind
    target_policy: TargetPolicy = TargetPolicy.ALL_ZERO
    start_policy: StartPolicy = StartPolicy.uniform_random()
    replicates: int = 100
    base_seed: int = 0
    iteration_cap: int = DEFAULT_ITERATION_CAP

    def __post_init__(self) -> None:
        object.__setattr__(self, "grid", tuple((int(n), int(r)) for n, r in self.grid))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "operators", tuple(self.operators))
        if not self.grid:
            raise ValueError("grid must not be empty")
        if not self.algorithms or not self.operators:
            raise ValueError("need at least one algorithm and one operator")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.start_policy.kind is StartKind.FIXED_HAMMING:
            for n, _ in self.grid:
                if self.start_policy.hamming_k > n:
                    raise ValueError(f"fixed-hamming k={self.start_policy.hamming_k} exceeds n={n}")


@dataclass(frozen=True)
class AggregateResult:
    """Per-cell statistics of the uncapped hitting times."""

    n: int
    r: int
    algorithm: AlgorithmKind
    operator: StepOperatorKind
    metric: MetricKind
    mean: float
    std_error: float
    median: float
    replicates: int
    capped_count: int

    @property
    def censored(self) -> bool:
        return self.capped_count > 0


def build_target(policy: TargetPolicy, params: SpaceParams,
                 rng: np.random.Generator) -> np.ndarray:
    if policy is TargetPolicy.ALL_ZERO:
        return np.zeros(params.n, dtype=np.int64)
    if policy is TargetPolicy.CENTER:
        return np.full(params.n, params.r // 2, dtype=np.int64)
    return rng.integers(0, params.r, size=params.n, dtype=np.int64)


def build_start(policy: StartPolicy, instance: ProblemInstance,
                rng: np.random.Generator) -> np.ndarray | None:
    """Start point for a replicate, or None to let the run sample uniformly."""
    if policy.kind is StartKind.UNIFORM_RANDOM:
        return None
    if policy.kind is StartKind.FIXED_HAMMING:
        return plant_state_at_hamming(instance, policy.hamming_k, rng)
    n, r = instance.params.n, instance.params.r
    z = instance.target
    if instance.metric is MetricKind.RING:
        return (z + r // 2) % r
    # farthest interval value; ties broken toward r-1
    return np.where(z > (r - 1) - z, np.zeros(n, dtype=np.int64),
                    np.full(n, r - 1, dtype=np.int64))


def _replicate_config(plan: ExperimentPlan, n: int, r: int, algorithm: AlgorithmKind,
                      operator: StepOperatorKind, rep: int) -> RunConfig:
    key = f"{n}|{r}|{algorithm.value}|{operator.value}|{plan.metric.value}|{rep}"
    setup_rng = np.random.default_rng(stable_seed(plan.base_seed, key + "|setup"))
    params = SpaceParams(n=n, r=r)
    instance = ProblemInstance(params=params, metric=plan.metric,
                               target=build_target(plan.target_policy, params, setup_rng))
    start = build_start(plan.start_policy, instance, setup_rng)
    return RunConfig(algorithm=algorithm, operator=operator, instance=instance,
                     seed=stable_seed(plan.base_seed, key),
                     iteration_cap=plan.iteration_cap, initial_point=start)


def _aggregate(cell, records: Sequence[RunRecord], replicates: int) -> AggregateResult:
    n, r, algorithm, operator, metric = cell
    times = np.array([rec.hitting_time for rec in records if not rec.capped], dtype=np.float64)
    capped = sum(1 for rec in records if rec.capped)
    if times.size == 0:
        mean = median = float("nan")
        std_error = 0.0
    else:
        mean = float(times.mean())
        median = float(np.median(times))
        std_error = float(times.std(ddof=1) / math.sqrt(times.size)) if times.size > 1 else 0.0
    return AggregateResult(n=n, r=r, algorithm=algorithm, operator=operator, metric=metric,
                           mean=mean, std_error=std_error, median=median,
                           replicates=replicates, capped_count=capped)


def execute_plan(plan: ExperimentPlan, workers: int = 1) -> list[AggregateResult]:
    """Run the whole plan; one aggregate per grid cell x algorithm x operator."""
    cells = [(n, r, algorithm, operator, plan.metric)
             for n, r in plan.grid
             for algorithm in plan.algorithms
             for operator in plan.operators]
    configs = [_replicate_config(plan, n, r, algorithm, operator, rep)
               for n, r, algorithm, operator, _ in cells
               for rep in range(plan.replicates)]
    if workers <= 1:
        records = [run(c) for c in configs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run, configs, chunksize=max(1, len(configs) // (4 * workers))))
    out = []
    for index, cell in enumerate(cells):
        chunk = records[index * plan.replicates:(index + 1) * plan.replicates]
        out.append(_aggregate(cell, chunk, plan.replicates))
    return out


# ---------------------------------------------------------------------------
# Scaling-law fitting
# ---------------------------------------------------------------------------

class DegenerateModelError(ValueError):
    """Raised when a fit's design matrix is rank deficient."""


MODELS: dict[str, tuple[tuple[str, object], ...]] = {
    # c * (r-1) * n * ln(n)
    "uniform_rnlogn": (("(r-1)*n*log(n)", lambda n, r: (r - 1.0) * n * math.log(n)),),
    # a * n * r + b * n * ln(n)
    "pm1_r_plus_logn": (("n*r", lambda n, r: n * r),
                        ("n*log(n)", lambda n, r: n * math.log(n))),
    # c * n * ln(r) * (ln(n) + ln(r))
    "harmonic_polylog": (("n*log(r)*(log(n)+log(r))",
                          lambda n, r: n * math.log(r) * (math.log(n) + math.log(r))),),
    # a * ln(r)^2 + b * ln(r) + c
    "quadratic_log_r": (("log(r)^2", lambda n, r: math.log(r) ** 2),
                        ("log(r)", lambda n, r: math.log(r)),
                        ("1", lambda n, r: 1.0)),
    # a * r + b
    "linear_r": (("r", lambda n, r: float(r)), ("1", lambda n, r: 1.0)),
}


@dataclass(frozen=True)
class ScalingFit:
    model: str
    terms: tuple[str, ...]
    coefficients: tuple[float, ...]
    r_squared: float
    residuals: tuple[float, ...]

    def predict(self, n: int, r: int) -> float:
        features = MODELS[self.model]
        return float(sum(c * f(float(n), float(r))
                         for c, (_, f) in zip(self.coefficients, features)))


def _as_points(results) -> list[tuple[float, float, float]]:
    points = []
    for item in results:
        if isinstance(item, AggregateResult):
            points.append((float(item.n), float(item.r), float(item.mean)))
        else:
            n, r, value = item
            points.append((float(n), float(r), float(value)))
    return points


def fit_scaling(results, model: str) -> ScalingFit:
    """Closed-form least squares of a named model over per-cell means."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choices: {sorted(MODELS)}")
    points = _as_points(results)
    features = MODELS[model]
    if len(points) < 4:
        raise ValueError(f"need at least 4 cells, got {len(points)}")
    if len(features) >= len(points):
        raise ValueError(f"model {model!r} has {len(features)} coefficients "
                         f"but only {len(points)} cells")
    if any(not math.isfinite(v) for _, _, v in points):
        raise ValueError("cannot fit non-finite cell means (censored aggregates?)")
    design = np.array([[f(n, r) for _, f in features] for n, r, _ in points])
    values = np.array([v for _, _, v in points])
    rank = np.linalg.matrix_rank(design)
    if rank < len(features):
        involved = [name for j, (name, _) in enumerate(features)
                    if np.linalg.matrix_rank(np.delete(design, j, axis=1)) == rank]
        raise DegenerateModelError(f"design matrix is rank deficient; "
                                   f"collinear terms: {', '.join(involved)}")
    coef, _, _, _ = np.linalg.lstsq(design, values, rcond=None)
    fitted = design @ coef
    residuals = values - fitted
    ss_res = float((residuals ** 2).sum())
    ss_tot = float(((values - values.mean()) ** 2).sum())
    if ss_tot == 0.0:
        r_squared = 1.0 if ss_res < 1e-12 else 0.0
    else:
        r_squared = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return ScalingFit(model=model, terms=tuple(name for name, _ in features),
                      coefficients=tuple(float(c) for c in coef),
                      r_squared=r_squared,
                      residuals=tuple(float(v) for v in residuals))
