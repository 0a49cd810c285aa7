"""Shared test oracles and statistical assertion helpers."""

from __future__ import annotations

import numpy as np
from scipy import stats

from rvonemax import AlgorithmKind, fitness, mutate, sample_uniform_point


def assert_chi_square(counts, expected_probs, significance=0.001):
    """Goodness-of-fit check; fails only below the given significance."""
    counts = np.asarray(counts, dtype=np.float64)
    expected = np.asarray(expected_probs, dtype=np.float64) * counts.sum()
    result = stats.chisquare(counts, expected)
    assert result.pvalue > significance, (
        f"chi-square rejected: p={result.pvalue:.3g} <= {significance} "
        f"(stat={result.statistic:.2f})")


def assert_same_distribution(sample_a, sample_b, significance=0.001):
    result = stats.ks_2samp(sample_a, sample_b)
    assert result.pvalue > significance, (
        f"KS rejected equality: p={result.pvalue:.3g} <= {significance}")


def reference_hitting_time(algorithm, operator, instance, rng, cap=10**7,
                           initial_point=None):
    """Plain mutation-selection loop built on the public mutate(); used as an
    independent oracle for the tuned engine inside run()."""
    if initial_point is None:
        x = sample_uniform_point(instance.params, rng)
    else:
        x = np.array(initial_point, dtype=np.int64)
    fx = fitness(instance, x)
    if fx == 0:
        return 0
    for t in range(1, cap + 1):
        y, _ = mutate(algorithm, operator, instance, x, rng)
        fy = fitness(instance, y)
        if fy == 0:
            return t
        if fy <= fx:
            x, fx = y, fy
    raise AssertionError("reference run exceeded its cap")


def binomial_pmf(n, p, k):
    return float(stats.binom.pmf(k, n, p))


__all__ = ["assert_chi_square", "assert_same_distribution",
           "reference_hitting_time", "binomial_pmf", "AlgorithmKind"]
