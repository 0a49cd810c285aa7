"""Search space, component metrics, and the r-valued OneMax fitness family.

Search points are 1-D integer numpy arrays over the alphabet {0, ..., r-1}.
A problem instance fixes the dimensions, the metric on the alphabet, and a
hidden target vector; fitness is the component-wise metric distance to the
target, so the target is the unique optimum with fitness 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class MetricKind(Enum):
    """Metric on the alphabet: plain interval distance or wrap-around ring."""

    INTERVAL = "interval"
    RING = "ring"

    @classmethod
    def parse(cls, name: str) -> "MetricKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown metric {name!r}; expected 'interval' or 'ring'") from None


@dataclass(frozen=True)
class SpaceParams:
    """Dimensions of the search space {0,...,r-1}^n."""

    n: int
    r: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.r < 2:
            raise ValueError(f"r must be >= 2, got {self.r}")


def as_point(values, params: SpaceParams) -> np.ndarray:
    """Validate and normalize a search point to a read-only int64 array."""
    x = np.asarray(values, dtype=np.int64).copy()
    if x.ndim != 1 or x.shape[0] != params.n:
        raise ValueError(f"point must have shape ({params.n},), got {x.shape}")
    if x.min(initial=0) < 0 or x.max(initial=0) >= params.r:
        raise ValueError(f"point entries must lie in [0, {params.r - 1}]")
    x.setflags(write=False)
    return x


def metric_distance(kind: MetricKind, a: int, b: int, r: int) -> int:
    """Distance between two alphabet values under the chosen metric."""
    if not (0 <= a < r and 0 <= b < r):
        raise ValueError(f"values must lie in [0, {r - 1}], got a={a}, b={b}")
    d = abs(b - a)
    if kind is MetricKind.RING:
        return min(d, r - d)
    return d


def component_distances(kind: MetricKind, x: np.ndarray, z: np.ndarray, r: int) -> np.ndarray:
    """Vector of per-component metric distances d(x_i, z_i)."""
    d = np.abs(x - z)
    if kind is MetricKind.RING:
        return np.minimum(d, r - d)
    return d


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """An r-valued OneMax instance: metric choice plus hidden target."""

    params: SpaceParams
    metric: MetricKind
    target: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "target", as_point(self.target, self.params))

    @property
    def max_fitness(self) -> int:
        n, r = self.params.n, self.params.r
        return n * (r // 2) if self.metric is MetricKind.RING else n * (r - 1)


def fitness(instance: ProblemInstance, x) -> int:
    """Sum of component-wise metric distances from x to the target."""
    x = np.asarray(x, dtype=np.int64)
    params = instance.params
    if x.shape != (params.n,):
        raise ValueError(f"point must have shape ({params.n},), got {x.shape}")
    if x.min() < 0 or x.max() >= params.r:
        raise ValueError(f"point entries must lie in [0, {params.r - 1}]")
    return int(component_distances(instance.metric, x, instance.target, params.r).sum())


def hamming_distance(x, y) -> int:
    """Number of positions where two equal-length points differ."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    return int(np.count_nonzero(x != y))


def sample_uniform_point(params: SpaceParams, rng: np.random.Generator) -> np.ndarray:
    """Draw each component independently and uniformly from [0, r-1]."""
    return rng.integers(0, params.r, size=params.n, dtype=np.int64)


def uniform_wrong_value(value: int, r: int, rng: np.random.Generator) -> int:
    """Uniform draw from [0, r-1] excluding the given value."""
    v = int(rng.integers(0, r - 1))
    return v if v < value else v + 1
