import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import TableOracle, naive_coverage_value
from subgreedy.errors import InvariantViolation, TooLarge, UnknownElement
from subgreedy.greedy import LAST_INDEX, random_order_greedy
from subgreedy.instances import random_coverage_instance
from subgreedy.oracle import Modular, WeightedCoverage, verify_properties, wrap_counting


def test_builtin_values(inst_7_12, inst_19_33):
    f, h = inst_7_12.oracle, inst_19_33.oracle
    assert f.evaluate({"x1", "y1", "z1"}) == 12
    assert f.evaluate(()) == 0
    assert h.evaluate({"o1"}) == 66
    assert h.evaluate(()) == 0
    assert h.marginal("y12", {"x1"}) == 44
    assert f.marginal("z4", {"x2", "y3"}) == 1
    assert f.marginal("x1", {"x1", "y2"}) == 0


def test_unknown_element(inst_7_12):
    with pytest.raises(UnknownElement):
        inst_7_12.oracle.evaluate({"w"})
    with pytest.raises(UnknownElement):
        inst_7_12.oracle.marginal("w", set())


def test_coverage_rejects_bad_universe():
    with pytest.raises(InvariantViolation):
        WeightedCoverage({"p": 1}, {"a": ["q"]})
    with pytest.raises(InvariantViolation):
        WeightedCoverage({"p": -1}, {"a": ["p"]})


@given(st.integers(0, 10_000))
def test_coverage_matches_naive_union(seed):
    inst = random_coverage_instance(3, 3, 6, max_weight=9, seed=seed)
    cov = inst.oracle
    order = sorted(cov.ground_set)
    table = cov.value_table(order)
    for mask in range(0, 1 << len(order), 37):
        S = [u for b, u in enumerate(order) if mask >> b & 1]
        v = cov.evaluate(S)
        assert v == naive_coverage_value(cov, S)
        assert table[mask] == v  # bulk and single paths agree bit for bit
        assert v <= cov.total_weight
        assert (v == cov.total_weight) == (cov.covered(S) == set(cov.universe))


def test_marginal_is_difference(inst_19_33):
    f = inst_19_33.oracle
    rng = np.random.default_rng(3)
    ground = sorted(f.ground_set)
    for _ in range(200):
        S = {u for u in ground if rng.random() < 0.3}
        u = ground[rng.integers(len(ground))]
        assert f.marginal(u, S) == f.evaluate(S | {u}) - f.evaluate(S)
        assert f.evaluate(S) == f.evaluate(S)


def test_integer_weights_stay_exact(inst_19_33):
    f = inst_19_33.oracle
    for r in range(1, 4):
        for S in itertools.combinations(sorted(f.ground_set)[:10], r):
            assert f.evaluate(S).is_integer()


def test_counting_wrapper(inst_7_12):
    c = wrap_counting(inst_7_12.oracle)
    c.evaluate({"x1"})
    c.evaluate({"x1", "y1"})
    assert c.count == 2
    c.reset()
    assert c.count == 0


def test_greedy_query_count(inst_7_12):
    counted = wrap_counting(inst_7_12.oracle)
    inst = type(inst_7_12)(inst_7_12.matroid, counted, "counted")
    random_order_greedy(inst, order=[0, 1, 2], tie=LAST_INDEX)
    # f(empty) once, then one call per candidate
    assert counted.count == 1 + 12
    assert counted.count <= 2 * 12


def test_verify_7_12_exhaustive(inst_7_12):
    rep = verify_properties(inst_7_12.oracle)
    assert rep.ok
    assert rep.queries == 1 << 12
    assert "submodularity" in rep.checked
    assert "marginal-antitone-in-base-set" in rep.checked


def test_verify_modular():
    rep = verify_properties(Modular({u: 1 for u in "abcde"}))
    assert rep.ok


def test_verify_flags_non_submodular():
    f = TableOracle("ab", lambda S: 1 if len(S) == 2 else 0)
    rep = verify_properties(f)
    assert not rep.ok
    sub = [v for v in rep.violations if v.prop == "submodularity"]
    assert sub
    S, T = sub[0].sets
    u = sub[0].element
    assert S <= T and u not in T
    # witness: f(u | S) < f(u | T)
    assert f.marginal(u, S) < f.marginal(u, T)
    assert sub[0].values == (f.marginal(u, S), f.marginal(u, T))


def test_verify_flags_non_monotone():
    f = TableOracle("abc", lambda S: 3 - len(S))
    rep = verify_properties(f)
    assert rep.violation_counts["monotonicity"] == 12
    S, T = next(v for v in rep.violations if v.prop == "monotonicity").sets
    assert S <= T and f.evaluate(S) > f.evaluate(T)


def test_verify_flags_negative():
    f = TableOracle("ab", lambda S: -1)
    rep = verify_properties(f)
    assert rep.violation_counts["non-negativity"] == 4


def test_verify_too_large():
    f = Modular({f"u{k}": 1 for k in range(17)})
    with pytest.raises(TooLarge):
        verify_properties(f)
    assert verify_properties(f, cap=17, trials=200).ok


def test_verify_19_33_sampled(inst_19_33):
    rep = verify_properties(inst_19_33.oracle, mode="sampled", trials=2000, subsample_trials=2000, seed=5)
    assert rep.ok
    assert [c for c in rep.checked if c.startswith("subsampling")] == [
        "subsampling(p=0.25)",
        "subsampling(p=0.5)",
        "subsampling(p=0.75)",
    ]


def test_sampled_catches_supermodular():
    # f(S) = |S|^2 is monotone but not submodular
    f = TableOracle([f"u{k}" for k in range(8)], lambda S: len(S) ** 2)
    rep = verify_properties(f, mode="sampled", trials=500, subsample_trials=500, seed=1)
    assert rep.violation_counts.get("submodularity", 0) > 0
    # E[|T_p|^2] = 8p(1-p) + 64p^2 < 64p for 0 < p < 1, so subsampling fails at every p
    for p in ("0.25", "0.5", "0.75"):
        assert rep.violation_counts.get(f"subsampling(p={p})") == 1


def test_subsampling_violation_detected():
    # strongly supermodular: only the full set has value, so E[f(T_p)] = p^8 * 1 < p
    ground = [f"u{k}" for k in range(8)]
    f = TableOracle(ground, lambda S: 1 if len(S) == 8 else 0)
    rep = verify_properties(f, mode="sampled", trials=10, subsample_trials=2000, seed=2)
    assert rep.violation_counts.get("subsampling(p=0.5)") == 1


def test_exhaustive_large_samples_pairs():
    inst = random_coverage_instance(4, 4, 10, max_weight=3, seed=0)
    rep = verify_properties(inst.oracle, trials=500)
    assert rep.ok
    assert any("sampled" in n for n in rep.notes)
