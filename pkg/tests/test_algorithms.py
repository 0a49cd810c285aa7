import numpy as np
import pytest
from scipy import stats

from helpers import assert_chi_square, assert_same_distribution, reference_hitting_time
from rvonemax import (AlgorithmKind, MetricKind, Potential, ProblemInstance, RunConfig,
                      SpaceParams, StepOperatorKind, hamming_distance, harmonic_number,
                      mutate, run, run_batch, subseed)

RLS = AlgorithmKind.RLS
EA = AlgorithmKind.ONE_PLUS_ONE_EA
UNIFORM = StepOperatorKind.UNIFORM
PM1 = StepOperatorKind.PLUS_MINUS_ONE
HARMONIC = StepOperatorKind.HARMONIC


def make_instance(n, r, metric=MetricKind.INTERVAL, target=None):
    target = np.zeros(n, dtype=np.int64) if target is None else np.asarray(target)
    return ProblemInstance(SpaceParams(n, r), metric, target)


def test_single_bit_always_fixed_in_one_iteration():
    inst = make_instance(1, 2)
    for seed in range(50):
        cfg = RunConfig(RLS, UNIFORM, inst, seed=seed, initial_point=(1,))
        assert run(cfg).hitting_time == 1


def test_start_at_optimum_hits_immediately():
    inst = make_instance(4, 5)
    for algorithm in (RLS, EA):
        for operator in (UNIFORM, PM1, HARMONIC):
            cfg = RunConfig(algorithm, operator, inst, seed=3, initial_point=(0, 0, 0, 0))
            rec = run(cfg)
            assert rec.hitting_time == 0
            assert rec.final_fitness == 0
            assert rec.evaluations == 1
            assert not rec.capped


def test_identical_seeds_reproduce_records_exactly():
    inst = make_instance(12, 6, MetricKind.RING, target=np.arange(12) % 6)
    cfg = RunConfig(EA, HARMONIC, inst, seed=98765,
                    trace_potentials=(Potential.fitness(), Potential.hamming()))
    assert run(cfg) == run(cfg)


def test_run_batch_contracts():
    inst = make_instance(6, 4)
    cfg = RunConfig(RLS, UNIFORM, inst, seed=55)
    batch = run_batch(cfg, 3)
    assert batch == run_batch(cfg, 3)
    assert batch[0] == run(cfg)  # sub-seed of replicate 0 is the seed itself
    assert subseed(55, 0) == 55
    assert len({subseed(55, k) for k in range(100)}) == 100
    with pytest.raises(ValueError):
        run_batch(cfg, 0)


def test_run_batch_parallel_matches_sequential():
    inst = make_instance(8, 3)
    cfg = RunConfig(EA, UNIFORM, inst, seed=17)
    assert run_batch(cfg, 6, workers=2) == run_batch(cfg, 6, workers=1)


def test_rls_mean_matches_closed_form_from_fixed_hamming_start():
    # from Hamming distance k the expected hitting time is n*(r-1)*H_k
    n, r, k = 10, 3, 10
    inst = make_instance(n, r)
    start = np.full(n, 1)  # every position wrong
    cfg = RunConfig(RLS, UNIFORM, inst, seed=2025, initial_point=start)
    times = [rec.hitting_time for rec in run_batch(cfg, 1500)]
    expected = n * (r - 1) * harmonic_number(k)
    assert np.mean(times) == pytest.approx(expected, rel=0.04)


def test_rls_mean_matches_random_start_averaging_oracle():
    # oracle: average n*(r-1)*H_k over the Binomial(n, 1-1/r) start level
    n, r = 10, 2
    expected = sum(stats.binom.pmf(k, n, 1 - 1 / r) * n * (r - 1) * harmonic_number(k)
                   for k in range(1, n + 1))
    inst = make_instance(n, r)
    cfg = RunConfig(RLS, UNIFORM, inst, seed=31415)
    times = [rec.hitting_time for rec in run_batch(cfg, 1000)]
    assert np.mean(times) == pytest.approx(expected, rel=0.05)


@pytest.mark.parametrize("algorithm,operator", [(RLS, UNIFORM), (RLS, PM1), (RLS, HARMONIC),
                                                (EA, UNIFORM), (EA, PM1), (EA, HARMONIC)])
def test_fitness_monotone_along_every_trace(algorithm, operator):
    inst = make_instance(10, 5, MetricKind.RING, target=np.arange(10) % 5)
    cfg = RunConfig(algorithm, operator, inst, seed=606,
                    trace_potentials=(Potential.fitness(),), iteration_cap=50000)
    rec = run(cfg)
    values = [row[1][0] for row in rec.trace]
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert values[-1] == 0.0
    # one row per iteration, from the initial state to the hitting iteration
    assert [row[0] for row in rec.trace] == list(range(rec.hitting_time + 1))


def test_ea_can_increase_hamming_distance_while_fitness_holds():
    inst = make_instance(8, 6)
    cfg = RunConfig(EA, UNIFORM, inst, seed=0, iteration_cap=20000,
                    trace_potentials=(Potential.fitness(), Potential.hamming()))
    trace = run(cfg).trace
    increases = [(t1, f0, f1, h0, h1)
                 for (t0, (f0, h0)), (t1, (f1, h1)) in zip(trace, trace[1:])
                 if f1 <= f0 and h1 > h0]
    assert increases, "expected at least one accepted step that worsens the Hamming distance"


def test_rls_mutates_exactly_one_position():
    inst = make_instance(9, 7)
    rng = np.random.default_rng(12)
    x = np.array([3] * 9)
    for _ in range(300):
        y, selected = mutate(RLS, UNIFORM, inst, x, rng)
        assert selected == 1
        assert hamming_distance(x, y) <= 1


def test_ea_selection_count_is_binomial():
    n = 20
    inst = make_instance(n, 4)
    rng = np.random.default_rng(404)
    x = np.array([2] * n)
    counts = np.bincount([mutate(EA, UNIFORM, inst, x, rng)[1] for _ in range(30000)],
                         minlength=n + 1)
    # merge the sparse tail so chi-square expectations stay sane
    tail = 4
    observed = list(counts[:tail]) + [counts[tail:].sum()]
    pmf = [stats.binom.pmf(k, n, 1 / n) for k in range(tail)]
    pmf.append(1.0 - sum(pmf))
    assert_chi_square(observed, pmf)


@pytest.mark.parametrize("algorithm,operator", [(RLS, HARMONIC), (EA, PM1), (EA, UNIFORM)])
def test_engine_distribution_matches_reference_implementation(algorithm, operator):
    # dual route: the tuned block-sampling engine vs a plain loop over mutate()
    inst = make_instance(8, 4)
    cfg = RunConfig(algorithm, operator, inst, seed=8080)
    engine_times = [rec.hitting_time for rec in run_batch(cfg, 1500)]
    ref_rng = np.random.default_rng(991199)
    reference_times = [reference_hitting_time(algorithm, operator, inst, ref_rng)
                       for _ in range(1500)]
    assert_same_distribution(engine_times, reference_times)


def test_binary_ring_operators_share_run_time_law():
    inst = make_instance(16, 2, MetricKind.RING)
    samples = {}
    for operator, seed in ((UNIFORM, 1), (PM1, 2), (HARMONIC, 3)):
        cfg = RunConfig(RLS, operator, inst, seed=seed)
        samples[operator] = [rec.hitting_time for rec in run_batch(cfg, 3000)]
    assert_same_distribution(samples[UNIFORM], samples[PM1])
    assert_same_distribution(samples[UNIFORM], samples[HARMONIC])


def test_iteration_cap_marks_record_capped():
    inst = make_instance(30, 16)
    cfg = RunConfig(RLS, PM1, inst, seed=5, iteration_cap=3)
    rec = run(cfg)
    assert rec.capped
    assert rec.hitting_time is None
    assert rec.final_fitness > 0
    assert rec.evaluations == 4  # initial sample plus three offspring evaluations


def test_evaluation_accounting_uncapped():
    inst = make_instance(5, 3)
    cfg = RunConfig(RLS, UNIFORM, inst, seed=77)
    rec = run(cfg)
    assert rec.evaluations == rec.hitting_time + 1


def test_trace_potentials_accept_string_identifiers():
    inst = make_instance(4, 3)
    cfg = RunConfig(RLS, UNIFORM, inst, seed=8, trace_potentials=("fitness", "hamming"))
    assert cfg.trace_potentials == (Potential.fitness(), Potential.hamming())
    rec = run(cfg)
    assert rec.trace[0][0] == 0
    assert len(rec.trace[0][1]) == 2


def test_single_position_ea_degenerates_to_rls():
    inst = make_instance(1, 2)
    for seed in range(30):
        cfg = RunConfig(EA, UNIFORM, inst, seed=seed, initial_point=(1,))
        assert run(cfg).hitting_time == 1  # mutation probability 1/n is 1


def test_invalid_configs_rejected():
    inst = make_instance(4, 4)
    with pytest.raises(ValueError):
        RunConfig(RLS, UNIFORM, inst, seed=1, initial_point=(1, 2, 3))
    with pytest.raises(ValueError):
        RunConfig(RLS, UNIFORM, inst, seed=1, initial_point=(0, 0, 0, 4))
    with pytest.raises(ValueError):
        RunConfig(RLS, UNIFORM, inst, seed=1, iteration_cap=0)
