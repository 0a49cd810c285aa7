"""One-dimensional token-movement process for comparing step-size laws.

A token starts uniformly on {0, ..., r}. Each round draws a step size d
from a fixed distribution over {1, ..., r}; the token moves from x to x - d
when d <= x and stays put otherwise. The hitting time is the number of
rounds until the token sits at 0. Alongside the Monte-Carlo simulator there
is an exact expectation solver that exploits the triangular structure of
the chain (position never increases), so no general linear solve is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algorithms import subseed

MAX_EXACT_STATES = 4096  # dense O(r^2) solve stays cheap up to here

NAMED_DISTRIBUTIONS = ("unit", "uniform", "harmonic")

_BLOCK = 1024


class CapacityError(Exception):
    """Raised when a request exceeds a hard resource limit."""


class DivergenceError(Exception):
    """Raised when the expected hitting time is infinite."""


def token_step_pmf(distribution, r: int) -> np.ndarray:
    """Probability vector over step sizes d = 1..r.

    Accepts one of the named laws ("unit", "uniform", "harmonic") or an
    explicit length-r probability vector.
    """
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    if isinstance(distribution, str):
        name = distribution.strip().lower()
        if name == "unit":
            p = np.zeros(r)
            p[0] = 1.0
        elif name == "uniform":
            p = np.full(r, 1.0 / r)
        elif name == "harmonic":
            w = 1.0 / np.arange(1, r + 1, dtype=np.float64)
            p = w / w.sum()
        else:
            raise ValueError(f"unknown distribution {distribution!r}")
        return p
    p = np.asarray(distribution, dtype=np.float64)
    if p.shape != (r,):
        raise ValueError(f"explicit distribution must have length {r}, got shape {p.shape}")
    if (p < 0).any():
        raise ValueError("step-size probabilities must be non-negative")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"step-size probabilities must sum to 1, got {p.sum()!r}")
    return p.copy()


@dataclass(frozen=True, eq=False)
class TokenConfig:
    r: int
    distribution: object = "unit"  # name or explicit probability vector
    seed: int = 0
    iteration_cap: int = 10**10

    def __post_init__(self) -> None:
        if self.r < 1:
            raise ValueError(f"r must be >= 1, got {self.r}")
        if self.iteration_cap < 1:
            raise ValueError("iteration_cap must be >= 1")
        token_step_pmf(self.distribution, self.r)  # validate eagerly


@dataclass(frozen=True)
class TokenRunRecord:
    hitting_time: int | None  # None exactly when the run was capped
    capped: bool
    final_position: int


def _step_cdf(distribution, r: int) -> np.ndarray:
    cdf = np.cumsum(token_step_pmf(distribution, r))
    cdf[-1] = 1.0  # guard against cumulative rounding
    return cdf


def _run_one(r: int, cdf: np.ndarray, cap: int, seed: int) -> TokenRunRecord:
    rng = np.random.default_rng(seed)
    x = int(rng.integers(0, r + 1))
    t = 0
    block = 32  # grows on refill; most runs finish within a few dozen rounds
    steps: list[int] = []
    sp = 0
    while x > 0 and t < cap:
        if sp == len(steps):
            steps = (np.searchsorted(cdf, rng.random(block), side="right") + 1).tolist()
            sp = 0
            if block < _BLOCK:
                block *= 4
        d = steps[sp]
        sp += 1
        t += 1
        if d <= x:
            x -= d
    if x > 0:
        return TokenRunRecord(hitting_time=None, capped=True, final_position=x)
    return TokenRunRecord(hitting_time=t, capped=False, final_position=0)


def token_run(config: TokenConfig) -> TokenRunRecord:
    """Simulate one seeded token run; rounds where d > x are wasted."""
    cdf = _step_cdf(config.distribution, config.r)
    return _run_one(config.r, cdf, config.iteration_cap, subseed(config.seed, 0))


def token_run_batch(config: TokenConfig, replicates: int) -> list[TokenRunRecord]:
    """Independent replicates with sub-seeds subseed(config.seed, k)."""
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")
    cdf = _step_cdf(config.distribution, config.r)
    return [_run_one(config.r, cdf, config.iteration_cap, subseed(config.seed, k))
            for k in range(replicates)]


def token_hitting_times_by_state(r: int, distribution) -> np.ndarray:
    """Exact expected hitting times E[x] for every start x in {0, ..., r}.

    Forward substitution over the triangular chain with the self-loop
    correction E[x] = (1 + sum_{d<=x} P[d] E[x-d]) / P[d <= x].
    """
    if r > MAX_EXACT_STATES:
        raise CapacityError(f"exact solve supports r <= {MAX_EXACT_STATES}, got {r}")
    pmf = token_step_pmf(distribution, r)
    p = np.concatenate(([0.0], pmf))  # p[d] for d = 0..r
    reach = np.cumsum(p)  # reach[x] = P[d <= x]
    expect = np.zeros(r + 1)
    for x in range(1, r + 1):
        if reach[x] <= 0.0:
            raise DivergenceError(f"state {x} can never move; expected hitting time is infinite")
        expect[x] = (1.0 + float(np.dot(p[1:x + 1], expect[x - 1::-1]))) / reach[x]
    return expect


def token_expected_hitting_time_exact(r: int, distribution) -> float:
    """Exact E[T] under the uniform start over {0, ..., r}."""
    return float(token_hitting_times_by_state(r, distribution).mean())
