"""Random-order greedy over a partition matroid, plus the online SWM greedy.

Uniform permutations come from numpy's PCG64 generator seeded with
``SeedSequence([seed, trial])`` and shuffled by ``Generator.permutation``.
A single run with ``seed=s`` uses trial index 0, so it coincides with trial 0
of a Monte-Carlo batch under master seed ``s``.
"""

from __future__ import annotations

import fnmatch
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import NotABase, SubgreedyError, UnknownElement
from .instances import Instance, SwmInstance
from .oracle import TOL


def trial_permutation(m: int, seed: int, trial: int = 0) -> list[int]:
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))
    return [int(k) for k in rng.permutation(m)]


@dataclass(frozen=True)
class TieBreak:
    """Rule for choosing among elements whose gains are within ``TOL`` of the best.

    kinds:
      ``first-name``     lexicographically smallest name
      ``last-index``     the tied element listed last in its part
      ``priority-list``  first match in ``priority``; entries are exact names
                         or shell-style patterns (``x*``); unmatched elements
                         rank after all matched ones; name order breaks the rest
      ``seeded-random``  uniform among tied, generator seeded once per run
    """

    kind: str = "first-name"
    priority: tuple[str, ...] = ()
    seed: int = 0

    KINDS = ("first-name", "last-index", "priority-list", "seeded-random")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown tie-break kind {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "TieBreak":
        """``first-name``, ``last-index``, ``priority-list:x*,z*,y*,o*`` or ``seeded-random:7``."""
        kind, _, arg = text.partition(":")
        if kind == "priority-list":
            entries = tuple(e for e in arg.split(",") if e)
            if not entries:
                raise ValueError("priority-list needs at least one entry")
            return cls(kind, priority=entries)
        if kind == "seeded-random":
            return cls(kind, seed=int(arg) if arg else 0)
        if arg:
            raise ValueError(f"tie-break {kind!r} takes no argument")
        return cls(kind)

    def __str__(self):
        if self.kind == "priority-list":
            return "priority-list:" + ",".join(self.priority)
        if self.kind == "seeded-random":
            return f"seeded-random:{self.seed}"
        return self.kind

    def rng(self):
        if self.kind == "seeded-random":
            return np.random.default_rng(self.seed)
        return None

    def _rank(self, u: str) -> tuple[int, str]:
        for k, pat in enumerate(self.priority):
            if u == pat or fnmatch.fnmatchcase(u, pat):
                return k, u
        return len(self.priority), u

    def choose(self, tied: Sequence[str], rng=None) -> str:
        """``tied`` must be in part order."""
        if len(tied) == 1:
            return tied[0]
        if self.kind == "first-name":
            return min(tied)
        if self.kind == "last-index":
            return tied[-1]
        if self.kind == "priority-list":
            return min(tied, key=self._rank)
        return tied[int(rng.integers(len(tied)))]


FIRST_NAME = TieBreak("first-name")
LAST_INDEX = TieBreak("last-index")


@dataclass
class Step:
    index: int
    part: str
    element: str
    gain: float
    value: float
    options: dict[str, float] = field(default_factory=dict)


@dataclass
class GreedyTrace:
    permutation: tuple[int, ...]
    steps: list[Step]
    initial_value: float
    tie: str

    @property
    def final_set(self) -> frozenset:
        return frozenset(s.element for s in self.steps)

    @property
    def final_value(self) -> float:
        return self.steps[-1].value if self.steps else self.initial_value

    @property
    def prefix_values(self) -> list[float]:
        return [self.initial_value] + [s.value for s in self.steps]

    @property
    def gains(self) -> list[float]:
        return [s.gain for s in self.steps]

    @property
    def picks(self) -> list[str]:
        return [s.element for s in self.steps]

    def render(self) -> str:
        """One tab-separated line per step: index, part, element, gain, prefix value."""
        return "".join(
            f"{s.index}\t{s.part}\t{s.element}\t{s.gain!r}\t{s.value!r}\n" for s in self.steps
        )

    def to_dict(self) -> dict:
        return {
            "permutation": list(self.permutation),
            "tie": self.tie,
            "initial_value": self.initial_value,
            "steps": [
                {"index": s.index, "part": s.part, "element": s.element, "gain": s.gain, "value": s.value}
                for s in self.steps
            ],
            "final_set": sorted(self.final_set),
            "final_value": self.final_value,
        }


def resolve_order(instance: Instance, order: Sequence) -> list[int]:
    """Turn a sequence of part indices or part names into indices; must be a permutation."""
    M = instance.matroid
    idx = []
    for k in order:
        if isinstance(k, str):
            try:
                k = M.part_index(k)
            except KeyError:
                raise SubgreedyError(f"unknown part {k!r}") from None
        idx.append(int(k))
    if sorted(idx) != list(range(M.m)):
        raise SubgreedyError(f"order {list(order)} is not a permutation of the {M.m} parts")
    return idx


def random_order_greedy(
    instance: Instance,
    order: Sequence | None = None,
    seed: int = 0,
    tie: TieBreak = FIRST_NAME,
    record_options: bool = True,
) -> GreedyTrace:
    """Run the greedy once. ``order`` fixes the arrival order of the parts;
    if omitted a uniform permutation is drawn from ``seed``."""
    M, f = instance.matroid, instance.oracle
    perm = trial_permutation(M.m, seed) if order is None else resolve_order(instance, order)
    rng = tie.rng()
    A: frozenset = frozenset()
    current = f.evaluate(A)
    initial = current
    steps = []
    for i, k in enumerate(perm, start=1):
        pname, elems = M.parts[k]
        values = {u: f.evaluate(A | {u}) for u in elems}
        gains = {u: values[u] - current for u in elems}
        best = max(gains.values())
        tied = [u for u in elems if gains[u] >= best - TOL]
        u = tie.choose(tied, rng)
        A = A | {u}
        current = values[u]
        steps.append(Step(i, pname, u, gains[u], current, gains if record_options else {}))
    return GreedyTrace(tuple(perm), steps, initial, str(tie))


@dataclass
class PotentialCheck:
    ok: bool
    potentials: list[float]
    first_violation: int | None
    final_inequality: bool
    final_lhs: float
    final_rhs: float


def check_potential_monotone(
    instance: Instance, trace: GreedyTrace, S: Iterable[str], T: Iterable[str]
) -> PotentialCheck:
    """Check that f(A_i) + f(S | A_i | T_after_i) never decreases along ``trace``.

    ``T_after_i`` keeps the elements of T whose parts have not yet arrived after
    i steps. Also checks f(A_m) + f(S | A_m) >= f(S | T).
    """
    M, f = instance.matroid, instance.oracle
    S = M.check_subset(S)
    T = M.check_subset(T)
    if not M.is_base(T):
        raise NotABase(", ".join(sorted(T)))
    A: frozenset = frozenset()
    remaining = set(T)
    phis = [f.evaluate(A) + f.evaluate(S | A | remaining)]
    for k, step in zip(trace.permutation, trace.steps):
        A = A | {step.element}
        remaining -= set(M.part(k))
        phis.append(f.evaluate(A) + f.evaluate(S | A | remaining))
    first = next((i for i in range(1, len(phis)) if phis[i] < phis[i - 1] - TOL), None)
    lhs = f.evaluate(A) + f.evaluate(S | A)
    rhs = f.evaluate(S | T)
    final_ok = lhs >= rhs - TOL
    return PotentialCheck(first is None and final_ok, phis, first, final_ok, lhs, rhs)


@dataclass
class SwmTrace:
    item_order: list[str]
    steps: list[tuple[str, str, float]]  # (item, bidder, gain)
    allocation: dict[str, list[str]]
    welfare: float

    def render(self) -> str:
        return "".join(f"{i}\t{item}\t{b}\t{g!r}\n" for i, (item, b, g) in enumerate(self.steps, 1))

    def to_dict(self) -> dict:
        return {
            "item_order": list(self.item_order),
            "steps": [{"item": it, "bidder": b, "gain": g} for it, b, g in self.steps],
            "allocation": {b: list(items) for b, items in self.allocation.items()},
            "welfare": self.welfare,
        }


def swm_greedy(swm: SwmInstance, order: Sequence[str] | None = None, seed: int = 0) -> SwmTrace:
    """Online greedy for submodular welfare: each arriving item goes to the bidder
    with the largest marginal utility, ties to the earliest bidder."""
    if order is None:
        order = [swm.items[k] for k in trial_permutation(len(swm.items), seed)]
    else:
        order = list(order)
        if sorted(order) != sorted(swm.items):
            raise SubgreedyError(f"item order {order} is not a permutation of the items")
    held = {b: frozenset() for b, _ in swm.bidders}
    current = {b: f.evaluate(()) for b, f in swm.bidders}
    steps = []
    for item in order:
        if item not in swm.items:
            raise UnknownElement(item)
        values = {b: f.evaluate(held[b] | {item}) for b, f in swm.bidders}
        gains = {b: values[b] - current[b] for b, _ in swm.bidders}
        best = max(gains.values())
        winner = next(b for b, _ in swm.bidders if gains[b] >= best - TOL)
        held[winner] = held[winner] | {item}
        current[winner] = values[winner]
        steps.append((item, winner, gains[winner]))
    allocation = {b: [it for it in order if it in held[b]] for b, _ in swm.bidders}
    welfare = 0.0
    for b, _ in swm.bidders:
        welfare += current[b]
    return SwmTrace(order, steps, allocation, welfare)
