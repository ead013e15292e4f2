import itertools

import hypothesis
import pytest

from subgreedy.instances import build_instance_19_33, build_instance_7_12
from subgreedy.oracle import ValueOracle

hypothesis.settings.register_profile("ci", max_examples=60, deadline=None)
hypothesis.settings.load_profile("ci")


@pytest.fixture(scope="session")
def inst_7_12():
    return build_instance_7_12()


@pytest.fixture(scope="session")
def inst_19_33():
    return build_instance_19_33()


class TableOracle(ValueOracle):
    """Set function given by an explicit callable; used to craft bad oracles."""

    kind = "table"

    def __init__(self, ground, fn):
        self.ground_set = frozenset(ground)
        self.fn = fn

    def _value(self, S):
        return float(self.fn(S))


def naive_coverage_value(cov, S):
    """Reference coverage value by literal set union."""
    covered = set()
    for u in S:
        covered |= set(cov.covers[u])
    return sum(cov.universe[p] for p in covered)


def naive_greedy(instance, order, prefer):
    """Reference greedy. ``prefer(tied_in_part_order)`` picks among exact ties."""
    cov = instance.oracle
    A = []
    values = [naive_coverage_value(cov, A)]
    for k in order:
        elems = instance.matroid.parts[k][1]
        vals = {u: naive_coverage_value(cov, A + [u]) for u in elems}
        best = max(vals.values())
        u = prefer([v for v in elems if vals[v] == best])
        A.append(u)
        values.append(vals[u])
    return A, values


def all_independent_sets(matroid):
    ground = sorted(matroid.ground_set)
    for r in range(matroid.m + 1):
        for S in itertools.combinations(ground, r):
            if len({matroid.part_of(u) for u in S}) == len(S):
                yield frozenset(S)
