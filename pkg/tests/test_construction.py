import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crossover import rng as rngmod
from crossover.construction import (SequenceWeights, THRICE_SEQUENCES, allocation_vector,
                                    construct_design, construct_patient_plan,
                                    default_weights, draw_week_indices, dual,
                                    uniform_weights, weights_by_name)
from crossover.design import Schedule, WeekSequence
from crossover.information import verdict
from crossover.matrices import build_A


def test_dual_examples():
    assert str(dual(WeekSequence.from_string("AHA"))) == "HAH"
    assert str(dual(WeekSequence.from_string("AA"))) == "HH"
    s = WeekSequence.from_string("AAH")
    assert dual(dual(s)) == s


def test_default_weights():
    w = default_weights()
    assert sum(w.thrice) == pytest.approx(1) and sum(w.twice) == pytest.approx(1)
    assert w.thrice[[str(s) for s in THRICE_SEQUENCES].index("AHA")] == 0.5
    assert w.twice == (0.2, 0.8)
    assert uniform_weights().thrice == (0.25,) * 4
    assert weights_by_name("paper") == w


@pytest.mark.parametrize("thrice,twice", [
    ((0.5, 0.5, 0.1, 0.0), (0.5, 0.5)),
    ((0.25,) * 4, (1.2, -0.2)),
    ((0.5, 0.5), (0.5, 0.5)),
])
def test_weights_validation(thrice, twice):
    with pytest.raises(ValueError):
        SequenceWeights(thrice, twice)


def test_forced_draw_pairs_aha_with_dual():
    forced = SequenceWeights((0, 0, 0, 1), (0, 1))
    orders = set()
    for seed in range(40):
        plan = construct_patient_plan(Schedule.THRICE, 2, forced, np.random.default_rng(seed))
        orders.add(tuple(str(s) for s in plan.weeks))
    assert orders == {("AHA", "HAH"), ("HAH", "AHA")}


@pytest.mark.parametrize("seed", range(25))
def test_patient_balance_w10(seed):
    plan = construct_patient_plan(Schedule.THRICE, 10, default_weights(), np.random.default_rng(seed))
    cells = np.array([seq.signed() for seq in plan.weeks])
    assert (cells == 1).sum() == 15 and (cells == -1).sum() == 15
    assert cells.sum(axis=0).tolist() == [0, 0, 0]


def test_odd_weeks_rejected_with_guidance():
    with pytest.raises(ValueError, match="round up to 10"):
        construct_design(4, 2, 9, seed=0)
    with pytest.raises(ValueError):
        construct_patient_plan(Schedule.TWICE, 0, default_weights(), np.random.default_rng(0))


def test_determinism():
    assert construct_design(4, 2, 10, seed=123) == construct_design(4, 2, 10, seed=123)
    assert construct_design(4, 2, 10, seed=123) != construct_design(4, 2, 10, seed=124)


def test_adding_patients_keeps_existing_plans():
    small = construct_design(3, 1, 6, seed=8)
    big = construct_design(5, 2, 6, seed=8)
    three_small = [p.weeks for p in small.plans if p.schedule is Schedule.THRICE]
    three_big = [p.weeks for p in big.plans if p.schedule is Schedule.THRICE]
    assert three_big[:3] == three_small
    two_small = [p.weeks for p in small.plans if p.schedule is Schedule.TWICE]
    two_big = [p.weeks for p in big.plans if p.schedule is Schedule.TWICE]
    assert two_big[:1] == two_small


def test_reference_scenarios():
    r = verdict(construct_design(4, 2, 10, seed=1))
    assert r.optimal and r.info_full == pytest.approx(160)
    r = verdict(construct_design(7, 2, 10, seed=1))
    assert r.optimal and r.m == 250
    d = construct_design(0, 1, 2, seed=1)
    assert all(str(s) in ("AA", "HH", "AH", "HA") for s in d.plans[0].weeks)
    r = verdict(d)
    assert r.optimal and r.m == 4


@settings(max_examples=80)
@given(st.integers(0, 6), st.integers(0, 3), st.integers(1, 6), st.integers(0, 2**31),
       st.sampled_from(["paper", "uniform"]))
def test_constructed_designs_are_optimal(n3, n2, half_w, seed, weights):
    if n3 + n2 == 0:
        return
    d = construct_design(n3, n2, 2 * half_w, weights_by_name(weights), seed=seed)
    r = verdict(d)
    assert r.optimal and abs(r.info_full - r.m) < 1e-6


@given(st.integers(1, 4), st.integers(0, 3), st.integers(1, 5), st.integers(0, 2**31))
def test_allocation_vector_matches_design(n3, n2, half_w, seed):
    d = construct_design(n3, n2, 2 * half_w, default_weights(), seed=seed)
    np.testing.assert_array_equal(allocation_vector(n3, n2, 2 * half_w, default_weights(), seed),
                                  build_A(d).ravel())


def test_sequence_frequencies_twice_weekly():
    gen = rngmod.generator(77)
    counts = np.zeros(2)
    for _ in range(2000):
        idx, _ = draw_week_indices(Schedule.TWICE, 10, default_weights(), gen)
        counts += np.bincount(idx, minlength=2) / 2    # each base appears twice (with its dual)
    n = counts.sum()
    se = np.sqrt(n * 0.2 * 0.8)
    assert abs(counts[0] - 0.2 * n) < 3 * se


def test_week_order_uniform():
    forced = SequenceWeights((0, 0, 0, 1), (0, 1))
    gen = rngmod.generator(5)
    n, first_base = 20000, 0
    for _ in range(n):
        _, is_dual = draw_week_indices(Schedule.THRICE, 2, forced, gen)
        first_base += not is_dual[0]
    assert abs(first_base / n - 0.5) < 0.015
