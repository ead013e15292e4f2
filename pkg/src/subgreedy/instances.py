"""Problem instances: the two adversarial coverage constructions, the SWM
reduction, padding with dummy parts, disjoint copies, random generators and
the JSON instance format.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DuplicateName, InvariantViolation, ParseError, SubgreedyError
from .ground import PartitionMatroid, check_name, make_partition
from .oracle import DisjointSum, PaddedOracle, SwmComposite, ValueOracle, WeightedCoverage


@dataclass
class Instance:
    matroid: PartitionMatroid
    oracle: ValueOracle
    name: str = ""
    # Tie-break rule under which the construction reproduces its stated ratio.
    tie_hint: str | None = field(default=None, compare=False)
    # Set when the instance came from ``reduce_swm``; used for serialization.
    swm: "SwmInstance | None" = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.matroid.ground_set != self.oracle.ground_set:
            diff = self.matroid.ground_set ^ self.oracle.ground_set
            raise InvariantViolation(f"matroid and oracle ground sets differ on {sorted(diff)[:5]}")

    @property
    def m(self) -> int:
        return self.matroid.m

    @property
    def size(self) -> int:
        return len(self.matroid.ground_set)


def coverage_instance(name: str, universe: dict, parts: Sequence[tuple[str, dict]], tie_hint=None) -> Instance:
    """``parts`` is a list of ``(part name, {element: [points]})``."""
    matroid = make_partition([(pname, list(elems)) for pname, elems in parts])
    covers = {u: pts for _, elems in parts for u, pts in elems.items()}
    return Instance(matroid, WeightedCoverage(universe, covers), name, tie_hint)


# ---------------------------------------------------------------------------
# the two constructions


def build_instance_7_12() -> Instance:
    """Twelve elements in three parts of four, unit-weight coverage of
    alpha/beta/gamma 1..4. Optimum {x1, y1, z1} = 12; greedy gets 7 on every
    arrival order when ties go to the higher index."""
    a = [f"alpha{i}" for i in range(1, 5)]
    b = [f"beta{i}" for i in range(1, 5)]
    g = [f"gamma{i}" for i in range(1, 5)]
    universe = {p: 1 for p in a + b + g}

    px = [a, [b[0], b[1], g[0], g[1]], [b[0], g[2]], [b[2], g[0]]]
    py = [b, [a[0], a[1], g[0], g[1]], [a[0], g[2]], [a[2], g[0]]]
    pz = [g, [a[0], a[1], b[0], b[1]], [a[0], b[2]], [a[2], b[0]]]
    parts = [
        ("P_x", {f"x{i + 1}": px[i] for i in range(4)}),
        ("P_y", {f"y{i + 1}": py[i] for i in range(4)}),
        ("P_z", {f"z{i + 1}": pz[i] for i in range(4)}),
    ]
    return coverage_instance("7-12", universe, parts, tie_hint="last-index")


WEIGHTS_19_33 = {"a": 14, "b": 14, "c": 8, "d": 5, "e": 4, "f": 7, "g": 14}
TIE_19_33_TEXT = "priority-list:x*,z*,y*,o*"


def canonical_19_33(name: str) -> str:
    """z_ijk and z_jik are one element; the canonical name sorts the first two indices."""
    if len(name) == 4 and name[0] == "z":
        i, j, k = name[1:]
        return "z" + min(i, j) + max(i, j) + k
    return name


def build_instance_19_33() -> Instance:
    """32 elements o_i, x_i, y_ij, z_ijk in four parts of eight over a
    28-point weighted universe. Part P_k holds o_k, x_k, y_jk and z_ijk, i.e.
    the element's last index names its part. Optimum 264; with the
    ``TIE_19_33_TEXT`` rule every arrival order yields 152."""
    idx = (1, 2, 3, 4)
    universe = {f"{L}{i}": w for L, w in WEIGHTS_19_33.items() for i in idx}
    parts = []
    for k in idx:
        others = [i for i in idx if i != k]
        elems = {
            f"o{k}": [f"{L}{k}" for L in "abcdefg"],
            f"x{k}": [f"{L}{j}" for j in others for L in "bc"],
        }
        for j in others:
            rest = [t for t in idx if t not in (j, k)]
            elems[f"y{j}{k}"] = [f"c{j}", f"e{k}"] + [f"{L}{t}" for t in rest for L in "def"]
        for i, j in itertools.combinations(others, 2):
            (l,) = set(idx) - {i, j, k}
            elems[f"z{i}{j}{k}"] = [f"f{i}", f"f{j}", f"g{l}"]
        parts.append((f"P{k}", elems))
    return coverage_instance("19-33", universe, parts, tie_hint=TIE_19_33_TEXT)


BUILTIN_INSTANCES = {"7-12": build_instance_7_12, "19-33": build_instance_19_33}


# ---------------------------------------------------------------------------
# submodular welfare


@dataclass
class SwmInstance:
    """Items and bidders; each bidder's utility is a weighted coverage over
    the item names (items the bidder does not list are worth nothing to it)."""

    items: list[str]
    bidders: list[tuple[str, WeightedCoverage]]
    name: str = ""

    def __post_init__(self):
        if not self.items or not self.bidders:
            raise InvariantViolation("an SWM instance needs at least one item and one bidder")
        for it in self.items:
            check_name(it, "item")
            if "@" in it:
                raise InvariantViolation(f"item name {it!r} may not contain '@'")
        if len(set(self.items)) != len(self.items):
            raise DuplicateName("item names must be unique")
        names = [b for b, _ in self.bidders]
        if len(set(names)) != len(names):
            raise DuplicateName("bidder names must be unique")
        fixed = []
        for b, f in self.bidders:
            check_name(b, "bidder")
            extra = f.ground_set - set(self.items)
            if extra:
                raise InvariantViolation(f"bidder {b!r} values unknown items {sorted(extra)}")
            if f.ground_set != set(self.items):
                covers = {it: f.covers.get(it, ()) for it in self.items}
                f = WeightedCoverage(f.universe, covers)
            fixed.append((b, f))
        self.bidders = fixed

    def welfare(self, allocation: dict[str, Iterable[str]]) -> float:
        total = 0.0
        for b, f in self.bidders:
            total += f.evaluate(allocation.get(b, ()))
        return total


def reduce_swm(swm: SwmInstance) -> Instance:
    """One element ``item@bidder`` per assignment, one part per item (bidders
    in list order), and f(S) = sum of bidder utilities of what S assigns."""
    parts = [(it, [f"{it}@{b}" for b, _ in swm.bidders]) for it in swm.items]
    element_map = {f"{it}@{b}": (it, b) for it in swm.items for b, _ in swm.bidders}
    oracle = SwmComposite(swm.bidders, element_map)
    return Instance(make_partition(parts), oracle, swm.name or "swm", swm=swm)


def reduced_priority(swm: SwmInstance) -> str:
    """Tie rule on the reduced instance that matches swm_greedy's bidder order."""
    return "priority-list:" + ",".join(f"*@{b}" for b, _ in swm.bidders)


def as_coverage(oracle: ValueOracle) -> WeightedCoverage | None:
    """Rewrite an oracle as a plain weighted coverage when that is possible.

    An SWM composite of coverage bidders is a coverage over the disjoint union
    of the bidders' universes (points renamed ``point@bidder``).
    """
    if isinstance(oracle, WeightedCoverage):
        return oracle
    if isinstance(oracle, SwmComposite) and all(isinstance(f, WeightedCoverage) for _, f in oracle.bidders):
        universe = {f"{p}@{b}": w for b, f in oracle.bidders for p, w in f.universe.items()}
        by_name = dict(oracle.bidders)
        covers = {}
        for u, (item, b) in oracle.element_map.items():
            covers[u] = [f"{p}@{b}" for p in by_name[b].covers.get(item, ())]
        return WeightedCoverage(universe, covers)
    return None


# ---------------------------------------------------------------------------
# transformations


def extend_with_dummies(instance: Instance, count: int) -> Instance:
    """Add ``count`` singleton parts holding value-free elements ``dummy#k``."""
    if count < 0:
        raise ValueError("dummy count must be >= 0")
    if count == 0:
        return instance
    existing = instance.matroid.ground_set
    start = 1
    while f"dummy#{start}" in existing:
        start += 1
    dummies = [f"dummy#{k}" for k in range(start, start + count)]
    parts = list(instance.matroid.parts) + [(f"D#{d.split('#')[1]}", (d,)) for d in dummies]
    cov = as_coverage(instance.oracle)
    if cov is not None:
        covers = dict(cov.covers)
        covers.update({d: () for d in dummies})
        oracle = WeightedCoverage(cov.universe, covers)
    else:
        oracle = PaddedOracle(instance.oracle, dummies)
    name = f"{instance.name}+{count}dummies"
    return Instance(make_partition(parts), oracle, name, instance.tie_hint)


def compose_copies(instance: Instance, k: int) -> Instance:
    """``k`` disjoint copies; element, part and point names get the suffix ``#c``."""
    if k < 1:
        raise ValueError("copy count must be >= 1")
    parts = [
        (f"{pname}#{c}", tuple(f"{u}#{c}" for u in elems))
        for c in range(1, k + 1)
        for pname, elems in instance.matroid.parts
    ]
    cov = as_coverage(instance.oracle)
    if cov is not None:
        universe = {f"{p}#{c}": w for c in range(1, k + 1) for p, w in cov.universe.items()}
        covers = {
            f"{u}#{c}": [f"{p}#{c}" for p in pts] for c in range(1, k + 1) for u, pts in cov.covers.items()
        }
        oracle = WeightedCoverage(universe, covers)
    else:
        oracle = DisjointSum(
            [(instance.oracle, {u: f"{u}#{c}" for u in instance.oracle.ground_set}) for c in range(1, k + 1)]
        )
    return Instance(make_partition(parts), oracle, f"{instance.name}x{k}", instance.tie_hint)


# ---------------------------------------------------------------------------
# random generators


def random_coverage_instance(
    m: int, part_size: int, universe_size: int, max_weight: int = 1, seed: int = 0
) -> Instance:
    """Reproducible random coverage instance with integer weights in
    ``1..max_weight``. Every element covers a non-empty random set of at most
    half the points (rounded up), which keeps the greedy off the optimum often
    enough to be interesting."""
    if min(m, part_size, universe_size, max_weight) < 1:
        raise ValueError("all counts must be >= 1")
    rng = np.random.default_rng(seed)
    points = [f"p{j}" for j in range(universe_size)]
    universe = {p: int(w) for p, w in zip(points, rng.integers(1, max_weight + 1, size=universe_size))}
    parts = []
    for k in range(m):
        elems = {}
        for j in range(part_size):
            size = int(rng.integers(1, (universe_size + 1) // 2 + 1))
            chosen = sorted(rng.choice(universe_size, size=size, replace=False))
            elems[f"e{k}_{j}"] = [points[c] for c in chosen]
        parts.append((f"P{k}", elems))
    return coverage_instance(f"random-{seed}", universe, parts)


def random_swm_instance(
    n_items: int, n_bidders: int, universe_size: int = 4, max_weight: int = 5, seed: int = 0
) -> SwmInstance:
    """Bidders with private random coverage utilities over the items."""
    rng = np.random.default_rng(seed)
    items = [f"i{t}" for t in range(n_items)]
    bidders = []
    for b in range(n_bidders):
        points = [f"q{j}" for j in range(universe_size)]
        universe = {p: int(w) for p, w in zip(points, rng.integers(1, max_weight + 1, size=universe_size))}
        covers = {}
        for it in items:
            size = int(rng.integers(0, universe_size + 1))
            covers[it] = [points[c] for c in sorted(rng.choice(universe_size, size=size, replace=False))]
        bidders.append((f"b{b}", WeightedCoverage(universe, covers)))
    return SwmInstance(items, bidders, f"random-swm-{seed}")


# ---------------------------------------------------------------------------
# file format


def instance_to_dict(instance: Instance) -> dict:
    if instance.swm is not None:
        return swm_to_dict(instance.swm)
    cov = instance.oracle
    if not isinstance(cov, WeightedCoverage):
        raise SubgreedyError(f"cannot serialize an oracle of kind {cov.kind!r}")
    order = {p: k for k, p in enumerate(cov.universe)}
    return {
        "kind": "weighted-coverage",
        "name": instance.name,
        "universe": dict(cov.universe),
        "parts": [
            {"name": pname, "elements": {u: sorted(cov.covers[u], key=order.__getitem__) for u in elems}}
            for pname, elems in instance.matroid.parts
        ],
    }


def swm_to_dict(swm: SwmInstance) -> dict:
    out = []
    for b, f in swm.bidders:
        order = {p: k for k, p in enumerate(f.universe)}
        out.append(
            {
                "name": b,
                "universe": dict(f.universe),
                "covers": {it: sorted(f.covers[it], key=order.__getitem__) for it in swm.items if f.covers[it]},
            }
        )
    return {"kind": "swm-coverage", "name": swm.name, "items": list(swm.items), "bidders": out}


def dumps_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2, ensure_ascii=False) + "\n"


def write_instance(instance: Instance, path) -> None:
    Path(path).write_text(dumps_instance(instance), encoding="utf-8")


def read_instance(path) -> Instance:
    return loads_instance(Path(path).read_text(encoding="utf-8"))


def loads_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object")
    kind = doc.get("kind")
    if kind == "weighted-coverage":
        return _parse_coverage(doc)
    if kind == "swm-coverage":
        return reduce_swm(_parse_swm(doc))
    raise ParseError(f"unknown instance kind {kind!r}", field="kind")


def _check_keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise ParseError("expected an object", field=where)
    unknown = set(obj) - set(allowed)
    if unknown:
        raise ParseError(f"unknown key(s) {sorted(unknown)}", field=where)
    missing = set(required) - set(obj)
    if missing:
        raise ParseError(f"missing key(s) {sorted(missing)}", field=where)


def _parse_universe(raw, where) -> dict:
    if isinstance(raw, list):
        raw = {p: None for p in raw}
    if not isinstance(raw, dict):
        raise ParseError("universe must be an object or a list of point names", field=where)
    universe = {}
    for p, w in raw.items():
        if w is None:
            w = 1
        if isinstance(w, bool) or not isinstance(w, (int, float)) or not math.isfinite(w):
            raise ParseError(f"weight of {p!r} must be a number", field=f"{where}.{p}")
        if w < 0:
            raise InvariantViolation(f"negative weight {w} for point {p!r}")
        universe[p] = w
    return universe


def _point_list(raw, where):
    if not isinstance(raw, list) or not all(isinstance(p, str) for p in raw):
        raise ParseError("expected a list of point names", field=where)
    return raw


def _parse_coverage(doc) -> Instance:
    _check_keys(doc, ("kind", "name", "universe", "parts"), ("kind", "universe", "parts"), "<top>")
    universe = _parse_universe(doc["universe"], "universe")
    if not isinstance(doc["parts"], list):
        raise ParseError("parts must be a list", field="parts")
    parts = []
    for k, part in enumerate(doc["parts"]):
        where = f"parts[{k}]"
        _check_keys(part, ("name", "elements"), ("name", "elements"), where)
        if not isinstance(part["elements"], dict):
            raise ParseError("elements must be an object", field=f"{where}.elements")
        elems = {u: _point_list(pts, f"{where}.elements.{u}") for u, pts in part["elements"].items()}
        parts.append((part["name"], elems))
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise ParseError("name must be a string", field="name")
    # element names may repeat across parts in the file; catch that before
    # the dict merge in coverage_instance hides it
    make_partition([(pname, list(elems)) for pname, elems in parts])
    return coverage_instance(name, universe, parts)


def _parse_swm(doc) -> SwmInstance:
    _check_keys(doc, ("kind", "name", "items", "bidders"), ("kind", "items", "bidders"), "<top>")
    items = doc["items"]
    if not isinstance(items, list) or not all(isinstance(i, str) for i in items):
        raise ParseError("items must be a list of names", field="items")
    if not isinstance(doc["bidders"], list):
        raise ParseError("bidders must be a list", field="bidders")
    bidders = []
    for k, raw in enumerate(doc["bidders"]):
        where = f"bidders[{k}]"
        _check_keys(raw, ("name", "universe", "covers"), ("name", "universe", "covers"), where)
        universe = _parse_universe(raw["universe"], f"{where}.universe")
        if not isinstance(raw["covers"], dict):
            raise ParseError("covers must be an object", field=f"{where}.covers")
        covers = {it: _point_list(p, f"{where}.covers.{it}") for it, p in raw["covers"].items()}
        bidders.append((raw["name"], WeightedCoverage(universe, covers)))
    return SwmInstance(list(items), bidders, doc.get("name", ""))
