import math

import numpy as np
import pytest

from deployopt.coverage import CoverageUtility
from deployopt.errors import (
    ElementAlreadyInSet,
    InstanceTooLarge,
    InvalidConstraint,
    InvalidK,
)
from deployopt.metrics import DistanceMatrix, augment_with_phantom
from deployopt.submodular import (
    ModularFunction,
    PartitionConstraint,
    SetFunction,
    brute_force,
    check_properties,
    greedy_cardinality,
    greedy_partition,
    marginal,
)


def random_coverage(rng, n_sites=10, n_targets=12, d_max=25.0):
    vals = rng.uniform(0.0, 20.0, size=(n_sites, n_targets))
    m = DistanceMatrix(vals, d_max=d_max, metric_tag="random")
    return CoverageUtility(augment_with_phantom(m))


class Supermodular(SetFunction):
    def _evaluate(self, subset):
        return float(len(subset)) ** 2


def test_marginal_modular():
    f = ModularFunction([5.0, 3.0, 1.0])
    assert marginal(f, {1}, 0) == 5.0
    assert marginal(f, set(), 2) == 1.0


def test_marginal_rejects_member():
    f = ModularFunction([1.0, 2.0])
    with pytest.raises(ElementAlreadyInSet):
        marginal(f, {0}, 0)


def test_marginal_nonnegative_for_monotone():
    rng = np.random.default_rng(0)
    f = random_coverage(rng, n_sites=6, n_targets=5)
    for s in range(6):
        assert f.marginal({1, 3}, s) >= -1e-12 if s not in {1, 3} else True


def test_coverage_marginal_hand_expanded():
    # matrix [[1,5],[4,2]], default d0 = 5:
    #   f({0}) = 5 - (1+5)/2 = 2,  f({1}) = 5 - 3 = 2,  f({0,1}) = 5 - 1.5 = 3.5
    m = DistanceMatrix(np.array([[1.0, 5.0], [4.0, 2.0]]), d_max=10.0, metric_tag="t")
    f = CoverageUtility(augment_with_phantom(m))
    assert f.evaluate({0}) == pytest.approx(2.0)
    assert f.evaluate({1}) == pytest.approx(2.0)
    assert f.evaluate({0, 1}) == pytest.approx(3.5)
    assert f.marginal({0}, 1) == pytest.approx(1.5)


def test_greedy_modular_exact():
    r = greedy_cardinality(ModularFunction([5.0, 3.0, 1.0]), range(3), 2)
    assert r.selected == (0, 1)
    assert r.value == 8.0
    assert r.guarantee == "1-1/e"


def test_greedy_selects_everything_when_k_is_n():
    r = greedy_cardinality(ModularFunction([1.0, 2.0, 3.0]), range(3), 3)
    assert set(r.selected) == {0, 1, 2}


def test_greedy_tie_breaks_to_lowest_index():
    r = greedy_cardinality(ModularFunction([2.0, 2.0, 2.0, 2.0]), range(4), 2)
    assert r.selected == (0, 1)


def test_greedy_invalid_k():
    f = ModularFunction([1.0, 2.0])
    with pytest.raises(InvalidK):
        greedy_cardinality(f, range(2), 0)
    with pytest.raises(InvalidK):
        greedy_cardinality(f, range(2), 3)


def test_greedy_gains_nonincreasing_for_submodular():
    rng = np.random.default_rng(1)
    for _ in range(10):
        f = random_coverage(rng)
        r = greedy_cardinality(f, range(10), 5)
        assert all(g >= -1e-9 for g in r.gains)  # monotone f
        assert all(a >= b - 1e-9 for a, b in zip(r.gains, r.gains[1:]))


def test_greedy_evaluation_budget():
    rng = np.random.default_rng(2)
    f = random_coverage(rng)
    r = greedy_cardinality(f, range(10), 3)
    assert r.evaluations <= 3 * 10


def test_greedy_deterministic():
    rng = np.random.default_rng(3)
    vals = rng.uniform(0, 20, (10, 12))
    runs = []
    for _ in range(2):
        m = DistanceMatrix(vals, d_max=25.0, metric_tag="r")
        f = CoverageUtility(augment_with_phantom(m))
        runs.append(greedy_cardinality(f, range(10), 4).selected)
    assert runs[0] == runs[1]


def test_lazy_greedy_matches_plain_value():
    rng = np.random.default_rng(4)
    for _ in range(20):
        vals = rng.uniform(0, 20, (12, 9))
        m = DistanceMatrix(vals, d_max=25.0, metric_tag="r")
        plain = greedy_cardinality(CoverageUtility(augment_with_phantom(m)), range(12), 4)
        lazy = greedy_cardinality(CoverageUtility(augment_with_phantom(m)), range(12), 4, lazy=True)
        assert lazy.value == pytest.approx(plain.value, abs=1e-12)
        assert lazy.evaluations <= plain.evaluations


def test_partition_greedy_modular():
    c = PartitionConstraint((frozenset({0, 1}), frozenset({2, 3, 4})), (1, 1))
    r = greedy_partition(ModularFunction([5.0, 3.0, 9.0, 1.0, 2.0]), c)
    assert r.selected == (0, 2)
    assert r.value == 14.0
    assert r.guarantee == "1/2"


def test_partition_single_block_degenerates_to_cardinality():
    rng = np.random.default_rng(5)
    vals = rng.uniform(0, 20, (8, 7))

    def fresh():
        m = DistanceMatrix(vals, d_max=25.0, metric_tag="r")
        return CoverageUtility(augment_with_phantom(m))

    c = PartitionConstraint((frozenset(range(8)),), (3,))
    rp = greedy_partition(fresh(), c)
    rc = greedy_cardinality(fresh(), range(8), 3)
    assert rp.selected == rc.selected
    assert rp.value == pytest.approx(rc.value)


def test_partition_constraint_validation():
    with pytest.raises(InvalidConstraint):
        PartitionConstraint((frozenset({0}),), (1,))  # |X_i| must exceed quota
    with pytest.raises(InvalidConstraint):
        PartitionConstraint((frozenset({0, 1}),), (0,))
    c = PartitionConstraint((frozenset({0, 1}), frozenset({2, 3})), (1, 1))
    with pytest.raises(InvalidConstraint):
        c.validate_cover(range(5))


def test_brute_force_modular_top_k():
    s, v = brute_force(ModularFunction([5.0, 3.0, 1.0]), range(3), 2)
    assert s == (0, 1)
    assert v == 8.0


def test_brute_force_lexicographic_tie_break():
    s, v = brute_force(ModularFunction([1.0, 1.0, 1.0, 1.0]), range(4), 2)
    assert s == (0, 1)
    assert v == 2.0


def test_brute_force_dominates_greedy():
    rng = np.random.default_rng(6)
    for _ in range(10):
        f = random_coverage(rng)
        g = greedy_cardinality(f, range(10), 3)
        _, best = brute_force(f, range(10), 3)
        assert best >= g.value - 1e-12


def test_brute_force_partition_feasibility():
    c = PartitionConstraint((frozenset({0, 1, 2}), frozenset({3, 4, 5})), (2, 1))
    f = ModularFunction([5.0, 4.0, 3.0, 9.0, 1.0, 2.0])
    s, v = brute_force(f, range(6), c)
    assert s == (0, 1, 3)
    assert v == 18.0


def test_brute_force_guard():
    f = ModularFunction([1.0] * 40)
    with pytest.raises(InstanceTooLarge):
        brute_force(f, range(40), 12)


def test_check_properties_modular_clean():
    rep = check_properties(ModularFunction([1.0, 2.0, 3.0, 4.0]), range(4))
    assert rep.clean
    assert rep.checks > 0


def test_check_properties_flags_supermodular():
    rep = check_properties(Supermodular(), range(5))
    assert rep.submodular_violations > 0
    assert rep.monotone_violations == 0


def test_check_properties_sampled_mode():
    rng = np.random.default_rng(7)
    f = random_coverage(rng, n_sites=12, n_targets=6)
    rep = check_properties(f, range(12), trials=150, seed=3)
    assert rep.clean
    assert rep.checks == 300


def test_guarantee_cardinality_quick():
    rng = np.random.default_rng(8)
    bound = 1.0 - 1.0 / math.e
    for _ in range(5):
        f = random_coverage(rng)
        g = greedy_cardinality(f, range(10), 3)
        _, best = brute_force(f, range(10), 3)
        assert g.value >= bound * best - 1e-9


def test_guarantee_partition_quick():
    rng = np.random.default_rng(9)
    c = PartitionConstraint((frozenset(range(5)), frozenset(range(5, 10))), (2, 1))
    for _ in range(5):
        f = random_coverage(rng)
        g = greedy_partition(f, c)
        _, best = brute_force(f, range(10), c)
        assert g.value >= 0.5 * best - 1e-9
