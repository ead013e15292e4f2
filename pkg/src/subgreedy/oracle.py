"""Value oracles for non-negative monotone submodular set functions.

An oracle exposes ``evaluate(S)`` and ``marginal(u, S)``; algorithms never look
inside. ``value_table`` is a bulk evaluation used by the exhaustive property
checker; coverage oracles override it with a vectorised bitmask sweep.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvariantViolation, TooLarge, UnknownElement
from .ground import check_name

TOL = 1e-9


class ValueOracle:
    """Base class. Subclasses set ``kind`` and ``ground_set`` and implement
    ``_value`` on an already-validated frozenset."""

    kind = "abstract"
    ground_set: frozenset = frozenset()

    def evaluate(self, S: Iterable[str]) -> float:
        return self._value(self._check(S))

    def marginal(self, u: str, S: Iterable[str]) -> float:
        S = self._check(S)
        if u not in self.ground_set:
            raise UnknownElement(u)
        return self._value(S | {u}) - self._value(S)

    def value_table(self, order: Sequence[str]) -> np.ndarray:
        """``table[mask]`` is f of the subset of ``order`` selected by ``mask``."""
        n = len(order)
        table = np.empty(1 << n, dtype=np.float64)
        for mask in range(1 << n):
            table[mask] = self.evaluate(order[b] for b in range(n) if mask >> b & 1)
        return table

    def _check(self, S) -> frozenset:
        S = frozenset(S)
        if not S <= self.ground_set:
            raise UnknownElement(", ".join(sorted(S - self.ground_set)))
        return S

    def _value(self, S: frozenset) -> float:
        raise NotImplementedError


class WeightedCoverage(ValueOracle):
    """f(S) = total weight of universe points covered by the elements of S.

    Points are indexed in the universe's insertion order and weights are
    always summed in that order, so every evaluation path gives identical bits.
    """

    kind = "weighted-coverage"

    def __init__(self, universe: Mapping[str, float], covers: Mapping[str, Iterable[str]]):
        self.universe = dict(universe)
        self.covers = {u: frozenset(pts) for u, pts in covers.items()}
        for p, w in self.universe.items():
            check_name(p, "universe point")
            if not (isinstance(w, (int, float)) and math.isfinite(w)) or w < 0:
                raise InvariantViolation(f"weight of point {p!r} must be a finite number >= 0, got {w!r}")
        for u, pts in self.covers.items():
            check_name(u)
            missing = pts - self.universe.keys()
            if missing:
                raise InvariantViolation(f"element {u!r} covers undeclared point(s) {sorted(missing)}")
        self.ground_set = frozenset(self.covers)
        self._points = list(self.universe)
        self._weights = [float(self.universe[p]) for p in self._points]
        index = {p: k for k, p in enumerate(self._points)}
        self._mask = {u: sum(1 << index[p] for p in pts) for u, pts in self.covers.items()}

    @property
    def total_weight(self) -> float:
        return self._weight_of((1 << len(self._points)) - 1)

    def _weight_of(self, mask: int) -> float:
        total = 0.0
        w = self._weights
        while mask:
            low = mask & -mask
            total += w[low.bit_length() - 1]
            mask ^= low
        return total

    def covered(self, S: Iterable[str]) -> frozenset:
        S = self._check(S)
        return frozenset().union(*(self.covers[u] for u in S))

    def _value(self, S):
        mask = 0
        for u in S:
            mask |= self._mask[u]
        return self._weight_of(mask)

    def value_table(self, order):
        n = len(order)
        k = len(self._points)
        if k > 64:
            return super().value_table(order)
        masks = np.zeros(1 << n, dtype=np.uint64)
        for b, u in enumerate(order):
            if u not in self._mask:
                raise UnknownElement(u)
            masks[1 << b: 1 << (b + 1)] = masks[: 1 << b] | np.uint64(self._mask[u])
        table = np.zeros(1 << n, dtype=np.float64)
        for j, w in enumerate(self._weights):
            hit = ((masks >> np.uint64(j)) & np.uint64(1)).astype(bool)
            table[hit] += w
        return table

    def __eq__(self, other):
        return (
            isinstance(other, WeightedCoverage)
            and self.universe == other.universe
            and self.covers == other.covers
        )

    def __repr__(self):
        return f"WeightedCoverage({len(self.covers)} elements, {len(self.universe)} points)"


class Modular(ValueOracle):
    kind = "modular"

    def __init__(self, weights: Mapping[str, float]):
        self.weights = dict(weights)
        if any(w < 0 for w in self.weights.values()):
            raise InvariantViolation("modular weights must be >= 0")
        self.ground_set = frozenset(self.weights)
        self._order = sorted(self.weights)

    def _value(self, S):
        return float(sum(self.weights[u] for u in self._order if u in S))


class SwmComposite(ValueOracle):
    """f(S) = sum over bidders of f_i(items assigned to bidder i by S).

    ``element_map`` sends each element name to an ``(item, bidder)`` pair.
    """

    kind = "swm-composite"

    def __init__(self, bidders: Sequence[tuple[str, ValueOracle]], element_map: Mapping[str, tuple[str, str]]):
        self.bidders = list(bidders)
        self.element_map = dict(element_map)
        names = [b for b, _ in self.bidders]
        for u, (item, bidder) in self.element_map.items():
            if bidder not in names:
                raise InvariantViolation(f"element {u!r} refers to unknown bidder {bidder!r}")
        self.ground_set = frozenset(self.element_map)

    def _value(self, S):
        total = 0.0
        for name, f in self.bidders:
            items = [self.element_map[u][0] for u in S if self.element_map[u][1] == name]
            total += f.evaluate(items)
        return total


class CountingOracle(ValueOracle):
    """Forwards to ``inner`` and counts evaluations (a marginal costs two)."""

    kind = "counting-wrapper"

    def __init__(self, inner: ValueOracle):
        self.inner = inner
        self.ground_set = inner.ground_set
        self._count = 0
        self._lock = threading.Lock()

    @property
    def count(self) -> int:
        return self._count

    def reset(self):
        with self._lock:
            self._count = 0

    def _value(self, S):
        with self._lock:
            self._count += 1
        return self.inner._value(S)

    def value_table(self, order):
        with self._lock:
            self._count += 1 << len(order)
        return self.inner.value_table(order)


class PaddedOracle(ValueOracle):
    """``inner`` extended with extra elements that never change the value."""

    kind = "padded"

    def __init__(self, inner: ValueOracle, dummies: Iterable[str]):
        self.inner = inner
        self.dummies = frozenset(dummies)
        if self.dummies & inner.ground_set:
            raise InvariantViolation("dummy names collide with existing elements")
        self.ground_set = inner.ground_set | self.dummies

    def _value(self, S):
        return self.inner._value(S - self.dummies)


class DisjointSum(ValueOracle):
    """Sum of oracles over disjoint renamed ground sets.

    ``copies`` holds ``(oracle, rename)`` with ``rename`` mapping the
    oracle's element names to the composed names.
    """

    kind = "disjoint-sum"

    def __init__(self, copies: Sequence[tuple[ValueOracle, Mapping[str, str]]]):
        self.copies = [(f, dict(rename)) for f, rename in copies]
        self._back = []
        ground: set[str] = set()
        for f, rename in self.copies:
            back = {new: old for old, new in rename.items()}
            if ground & back.keys():
                raise InvariantViolation("copies must have disjoint element names")
            ground |= back.keys()
            self._back.append(back)
        self.ground_set = frozenset(ground)

    def _value(self, S):
        total = 0.0
        for (f, _), back in zip(self.copies, self._back):
            total += f._value(frozenset(back[u] for u in S if u in back))
        return total


def wrap_counting(oracle: ValueOracle) -> CountingOracle:
    return CountingOracle(oracle)


def evaluate(oracle: ValueOracle, S: Iterable[str]) -> float:
    return oracle.evaluate(S)


def marginal(oracle: ValueOracle, u: str, S: Iterable[str]) -> float:
    return oracle.marginal(u, S)


# ---------------------------------------------------------------------------
# property verification


@dataclass
class Violation:
    prop: str
    sets: tuple
    element: str | None
    values: tuple

    def describe(self) -> str:
        sets = " ".join("{" + ",".join(sorted(s)) + "}" for s in self.sets)
        elem = f" u={self.element}" if self.element is not None else ""
        vals = ", ".join(f"{v:.12g}" for v in self.values)
        return f"{self.prop}: sets {sets}{elem} values ({vals})"


@dataclass
class PropertyReport:
    mode: str
    checked: list[str] = field(default_factory=list)
    violations: list[Violation] = field(default_factory=list)
    violation_counts: dict[str, int] = field(default_factory=dict)
    queries: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def _add(self, v: Violation, limit: int):
        n = self.violation_counts.get(v.prop, 0)
        self.violation_counts[v.prop] = n + 1
        if n < limit:
            self.violations.append(v)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "ok": self.ok,
            "checked": list(self.checked),
            "queries": self.queries,
            "violation_counts": dict(self.violation_counts),
            "violations": [
                {
                    "property": v.prop,
                    "sets": [sorted(s) for s in v.sets],
                    "element": v.element,
                    "values": list(v.values),
                }
                for v in self.violations
            ],
            "notes": list(self.notes),
        }


EXHAUSTIVE_CAP = 16
# Marginal-set checks cost 3^n table lookups; above this size they are sampled.
PAIR_CHECK_CAP = 13


def verify_properties(
    oracle: ValueOracle,
    mode: str = "exhaustive",
    trials: int = 10_000,
    seed: int = 0,
    cap: int = EXHAUSTIVE_CAP,
    subsample_ps: Sequence[float] = (0.25, 0.5, 0.75),
    subsample_trials: int = 10_000,
    subsample_set: Iterable[str] | None = None,
    max_witnesses: int = 50,
) -> PropertyReport:
    """Check non-negativity, monotonicity and submodularity of ``oracle``.

    ``mode="exhaustive"`` tabulates f on all subsets (ground set at most
    ``cap`` elements). Monotonicity and submodularity are checked in their
    one-element-step forms, which imply the general forms by chaining. The
    two marginal-set inequalities

        f(S1 | T) <= f(S2 | T)   and   f(T | S1) >= f(T | S2)   for S1 <= S2

    are checked for every T and every covering pair S2 = S1 + v when the
    ground set has at most ``PAIR_CHECK_CAP`` elements, and on ``trials``
    random triples otherwise.

    ``mode="sampled"`` checks the same properties on ``trials`` random triples
    and adds the subsampling inequality E[f(T_p)] >= (1-p) f({}) + p f(T),
    with T_p keeping each element of T independently with probability p,
    estimated over ``subsample_trials`` draws with a 3-standard-error slack.
    """
    counter = CountingOracle(oracle)
    report = PropertyReport(mode=mode)
    rng = np.random.default_rng(seed)
    order = sorted(oracle.ground_set)
    if mode == "exhaustive":
        if len(order) > cap:
            raise TooLarge(f"exhaustive verification over {len(order)} elements exceeds cap {cap}")
        _exhaustive(counter, order, report, max_witnesses)
        if len(order) > PAIR_CHECK_CAP:
            report.notes.append(
                f"marginal-set inequalities sampled on {trials} triples ({len(order)} > {PAIR_CHECK_CAP} elements)"
            )
            _sampled_pairs(counter, order, trials, rng, report, max_witnesses)
    elif mode == "sampled":
        _sampled_basic(counter, order, trials, rng, report, max_witnesses)
        _sampled_pairs(counter, order, trials, rng, report, max_witnesses)
        T = sorted(oracle.ground_set if subsample_set is None else counter._check(subsample_set))
        for p in subsample_ps:
            _subsampling(counter, T, p, subsample_trials, rng, report)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    report.queries = counter.count
    return report


def _subset(order, mask) -> frozenset:
    return frozenset(u for b, u in enumerate(order) if mask >> b & 1)


def _exhaustive(f: CountingOracle, order, report: PropertyReport, limit):
    n = len(order)
    F = f.value_table(order)
    full = np.arange(1 << n, dtype=np.int64)

    report.checked.append("non-negativity")
    for mask in np.flatnonzero(F < -TOL):
        report._add(Violation("non-negativity", (_subset(order, mask),), None, (F[mask],)), limit)

    report.checked.append("monotonicity")
    for b in range(n):
        S = full[(full >> b & 1) == 0]
        bad = S[F[S | (1 << b)] < F[S] - TOL]
        for mask in bad:
            S_ = _subset(order, mask)
            report._add(
                Violation("monotonicity", (S_, S_ | {order[b]}), None, (F[mask], F[mask | 1 << b])), limit
            )

    report.checked.append("submodularity")
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            S = full[((full >> a & 1) == 0) & ((full >> b & 1) == 0)]
            small = F[S | 1 << a] - F[S]
            big = F[S | 1 << a | 1 << b] - F[S | 1 << b]
            for k in np.flatnonzero(small < big - TOL):
                S_ = _subset(order, S[k])
                report._add(
                    Violation("submodularity", (S_, S_ | {order[b]}), order[a], (small[k], big[k])),
                    limit,
                )

    if n > PAIR_CHECK_CAP:
        return
    # Both inequalities depend on T only through Z = S1 | T, so ranging over
    # nested pairs S1 <= Z covers every (S1, S2 = S1 + v, T) combination.
    report.checked.append("marginal-monotone-in-added-set")
    report.checked.append("marginal-antitone-in-base-set")
    S1, Z = _nested_pairs(n)
    for v in range(n):
        keep = (Z >> v & 1) == 0
        s1, z = S1[keep], Z[keep]
        s2, zv = s1 | 1 << v, z | 1 << v
        # f(S1|Z) <= f(S2|Z)
        a, b = F[z] - F[z], F[zv] - F[z]
        for k in np.flatnonzero(a > b + TOL):
            report._add(
                Violation(
                    "marginal-monotone-in-added-set",
                    (_subset(order, s1[k]), _subset(order, s2[k]), _subset(order, z[k])),
                    None,
                    (a[k], b[k]),
                ),
                limit,
            )
        # f(Z|S1) >= f(Z|S2)
        a, b = F[z] - F[s1], F[zv] - F[s2]
        for k in np.flatnonzero(a < b - TOL):
            report._add(
                Violation(
                    "marginal-antitone-in-base-set",
                    (_subset(order, s1[k]), _subset(order, s2[k]), _subset(order, z[k])),
                    None,
                    (a[k], b[k]),
                ),
                limit,
            )


def _nested_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """All 3^n pairs (S, Z) of bitmasks with S a subset of Z."""
    S = np.zeros(1, dtype=np.int64)
    Z = np.zeros(1, dtype=np.int64)
    for b in range(n):
        bit = np.int64(1 << b)
        S = np.concatenate([S, S, S | bit])
        Z = np.concatenate([Z, Z | bit, Z | bit])
    return S, Z


def _random_subset(rng, pool, p=0.5) -> frozenset:
    keep = rng.random(len(pool)) < p
    return frozenset(u for u, k in zip(pool, keep) if k)


def _sampled_basic(f, order, trials, rng, report, limit):
    report.checked += ["non-negativity", "monotonicity", "submodularity"]
    for _ in range(trials):
        u = order[rng.integers(len(order))]
        rest = [w for w in order if w != u]
        T = _random_subset(rng, rest)
        S = _random_subset(rng, sorted(T))
        fS, fT = f.evaluate(S), f.evaluate(T)
        if fS < -TOL:
            report._add(Violation("non-negativity", (S,), None, (fS,)), limit)
        if fS > fT + TOL:
            report._add(Violation("monotonicity", (S, T), None, (fS, fT)), limit)
        gS = f.evaluate(S | {u}) - fS
        gT = f.evaluate(T | {u}) - fT
        if gS < gT - TOL:
            report._add(Violation("submodularity", (S, T), u, (gS, gT)), limit)


def _sampled_pairs(f, order, trials, rng, report, limit):
    for name in ("marginal-monotone-in-added-set", "marginal-antitone-in-base-set"):
        if name not in report.checked:
            report.checked.append(name)
    for _ in range(trials):
        S2 = _random_subset(rng, order)
        S1 = _random_subset(rng, sorted(S2))
        T = _random_subset(rng, order)
        fT, f1, f2 = f.evaluate(T), f.evaluate(S1), f.evaluate(S2)
        f1T, f2T = f.evaluate(S1 | T), f.evaluate(S2 | T)
        if f1T - fT > f2T - fT + TOL:
            report._add(
                Violation("marginal-monotone-in-added-set", (S1, S2, T), None, (f1T - fT, f2T - fT)), limit
            )
        if f1T - f1 < f2T - f2 - TOL:
            report._add(
                Violation("marginal-antitone-in-base-set", (S1, S2, T), None, (f1T - f1, f2T - f2)), limit
            )


def _subsampling(f, T, p, trials, rng, report):
    name = f"subsampling(p={p})"
    report.checked.append(name)
    draws = rng.random((trials, len(T))) < p
    values = np.array([f.evaluate(u for u, k in zip(T, row) if k) for row in draws])
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    rhs = (1 - p) * f.evaluate(()) + p * f.evaluate(T)
    report.notes.append(f"{name}: mean {mean:.6f} >= {rhs:.6f} - 3*{se:.6f}")
    if mean < rhs - 3 * se - TOL:
        report._add(Violation(name, (frozenset(T),), None, (mean, rhs, se)), 50)
