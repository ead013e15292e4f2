"""Brute-force optimum, expectations over arrival orders, the g(x) = x - x^2/2
curve and the fixed-point bound on the greedy's ratio."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import OutOfRange, TooLarge
from .greedy import FIRST_NAME, TieBreak, random_order_greedy, trial_permutation
from .instances import Instance
from .oracle import TOL

ORDER_CAP = math.factorial(8)
BASE_CAP = 10**7


def enum_caps() -> tuple[int, int]:
    """(order cap, base cap).

    ``SGL_ENUM_CAP=N`` sets both caps to N; ``SGL_ENUM_CAP=N,B`` sets them separately.
    """
    env = os.environ.get("SGL_ENUM_CAP", "").strip()
    if not env:
        return ORDER_CAP, BASE_CAP
    try:
        caps = [int(t) for t in env.split(",")]
    except ValueError:
        raise ValueError(f"SGL_ENUM_CAP must be N or N,B, got {env!r}") from None
    if len(caps) == 1:
        return caps[0], caps[0]
    if len(caps) == 2:
        return caps[0], caps[1]
    raise ValueError(f"SGL_ENUM_CAP must be N or N,B, got {env!r}")


@dataclass
class Optimum:
    base: frozenset
    value: float
    bases_checked: int


def brute_force_opt(instance: Instance, cap: int | None = None) -> Optimum:
    """Best base by enumeration. Among equal values (within ``TOL``) the base
    whose sorted element names compare smallest wins."""
    M, f = instance.matroid, instance.oracle
    cap = enum_caps()[1] if cap is None else cap
    count = math.prod(len(elems) for _, elems in M.parts)
    if count > cap:
        raise TooLarge(f"{count} bases exceeds cap {cap}")
    best, best_key, best_val = None, None, -math.inf
    for combo in itertools.product(*(elems for _, elems in M.parts)):
        v = f.evaluate(combo)
        key = tuple(sorted(combo))
        if v > best_val + TOL or (v >= best_val - TOL and key < best_key):
            best, best_key, best_val = combo, key, v
    return Optimum(frozenset(best), best_val, count)


def _exact_ratio(total: float, count: int, opt: float) -> Fraction | None:
    if opt > 0 and float(total).is_integer() and float(opt).is_integer() and abs(total) < 2**53:
        return Fraction(int(total), count * int(opt))
    return None


@dataclass
class ExpectationReport:
    mode: str
    m: int
    runs: int
    tie: str
    step_means: list[float]
    opt: float | None
    opt_base: frozenset | None = None
    step_stderr: list[float] | None = None
    seed: int | None = None
    final_min: float = 0.0
    final_max: float = 0.0
    ratio_fraction: Fraction | None = None
    final_total: float = field(default=0.0, repr=False)

    @property
    def expected_final(self) -> float:
        return self.step_means[-1]

    @property
    def ratio(self) -> float | None:
        if self.opt is None or self.opt == 0:
            return None
        return self.expected_final / self.opt

    def lower_bounds(self) -> list[float] | None:
        """g(i/m) * opt for i = 0..m."""
        if self.opt is None:
            return None
        return [float(gi) * self.opt for gi in g_curve(self.m)]

    def to_dict(self) -> dict:
        out = {
            "mode": self.mode,
            "m": self.m,
            "runs": self.runs,
            "tie": self.tie,
            "seed": self.seed,
            "opt": self.opt,
            "opt_base": sorted(self.opt_base) if self.opt_base is not None else None,
            "expected_final": self.expected_final,
            "ratio": self.ratio,
            "ratio_fraction": str(self.ratio_fraction) if self.ratio_fraction is not None else None,
            "final_min": self.final_min,
            "final_max": self.final_max,
            "step_means": list(self.step_means),
            "lower_bound_g": self.lower_bounds(),
        }
        if self.step_stderr is not None:
            out["step_stderr"] = list(self.step_stderr)
        return out

    def csv_rows(self) -> list[list]:
        bounds = self.lower_bounds()
        rows = []
        for i, mean in enumerate(self.step_means):
            row = [i, mean, bounds[i] if bounds else ""]
            if self.step_stderr is not None:
                row.append(self.step_stderr[i])
            rows.append(row)
        return rows

    def csv_header(self) -> list[str]:
        head = ["i", "expected_value", "lower_bound_g"]
        if self.step_stderr is not None:
            head.append("stderr")
        return head


def _run_block(instance, perms, tie):
    return [random_order_greedy(instance, order=p, tie=tie, record_options=False).prefix_values for p in perms]


def _map_ordered(instance, perms, tie, workers) -> np.ndarray:
    """Prefix-value matrix, row r for perms[r], independent of ``workers``."""
    if workers <= 1 or len(perms) < 2 * workers:
        rows = _run_block(instance, perms, tie)
    else:
        size = math.ceil(len(perms) / workers)
        blocks = [perms[k: k + size] for k in range(0, len(perms), size)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = [r for block in pool.map(lambda b: _run_block(instance, b, tie), blocks) for r in block]
    return np.array(rows, dtype=np.float64)


def _column_sums(values: np.ndarray) -> list[float]:
    # plain left-to-right sums so the result does not depend on numpy's pairwise summation
    return [math.fsum(values[:, i]) for i in range(values.shape[1])]


def _opt_or_none(instance, opt):
    if opt is not None:
        return opt
    try:
        return brute_force_opt(instance)
    except TooLarge:
        return None


def exact_expected_values(
    instance: Instance,
    tie: TieBreak = FIRST_NAME,
    cap: int | None = None,
    workers: int = 1,
    opt: Optimum | None = None,
) -> ExpectationReport:
    """Average the greedy's prefix values over all m! arrival orders."""
    m = instance.m
    cap = enum_caps()[0] if cap is None else cap
    n_orders = math.factorial(m)
    if n_orders > cap:
        raise TooLarge(f"{m}! = {n_orders} orders exceeds cap {cap}")
    perms = [list(p) for p in itertools.permutations(range(m))]
    values = _map_ordered(instance, perms, tie, workers)
    sums = _column_sums(values)
    opt = _opt_or_none(instance, opt)
    opt_val = opt.value if opt else None
    return ExpectationReport(
        mode="exact",
        m=m,
        runs=n_orders,
        tie=str(tie),
        step_means=[s / n_orders for s in sums],
        opt=opt_val,
        opt_base=opt.base if opt else None,
        final_min=float(values[:, -1].min()),
        final_max=float(values[:, -1].max()),
        ratio_fraction=_exact_ratio(sums[-1], n_orders, opt_val) if opt else None,
        final_total=sums[-1],
    )


def monte_carlo_expected_values(
    instance: Instance,
    trials: int,
    seed: int = 0,
    tie: TieBreak = FIRST_NAME,
    workers: int = 1,
    opt: Optimum | None = None,
) -> ExpectationReport:
    """Average over ``trials`` uniform orders; trial t uses
    ``trial_permutation(m, seed, t)`` so results do not depend on ``workers``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    m = instance.m
    perms = [trial_permutation(m, seed, t) for t in range(trials)]
    values = _map_ordered(instance, perms, tie, workers)
    sums = _column_sums(values)
    means = [s / trials for s in sums]
    if trials > 1:
        stderr = [float(np.sqrt(np.sum((values[:, i] - means[i]) ** 2) / (trials - 1) / trials)) for i in range(m + 1)]
    else:
        stderr = [0.0] * (m + 1)
    opt = _opt_or_none(instance, opt)
    opt_val = opt.value if opt else None
    return ExpectationReport(
        mode="monte-carlo",
        m=m,
        runs=trials,
        tie=str(tie),
        step_means=means,
        opt=opt_val,
        opt_base=opt.base if opt else None,
        step_stderr=stderr,
        seed=seed,
        final_min=float(values[:, -1].min()),
        final_max=float(values[:, -1].max()),
        ratio_fraction=_exact_ratio(sums[-1], trials, opt_val) if opt else None,
        final_total=sums[-1],
    )


# ---------------------------------------------------------------------------
# the bound curve and the fixed-point inequality


def _exact(x) -> Fraction:
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    # decimal reading of a float: 0.4 means 2/5, not the nearest binary double
    return Fraction(repr(float(x)))


def g_exact(x) -> Fraction:
    x = _exact(x)
    return x - x * x / 2


def g(x) -> float:
    """g(x) = x - x^2/2, evaluated exactly and rounded once."""
    return float(g_exact(x))


def g_curve(m: int) -> list[Fraction]:
    if m < 1:
        raise ValueError("m must be >= 1")
    return [g_exact(Fraction(i, m)) for i in range(m + 1)]


@dataclass(frozen=True)
class BoundSolution:
    p: Fraction
    q: Fraction
    a: Fraction
    b: Fraction
    c0: Fraction
    c: float

    @property
    def coefficients(self) -> tuple[Fraction, Fraction, Fraction]:
        return self.a, self.b, self.c0

    def rhs(self, c: float | None = None) -> float:
        """Right side of  c >= (3 + pq(2-q) + p(1-q^2)/c - p^2(1-q)^2) / (6 + 2p/c)."""
        c = self.c if c is None else c
        p, q = float(self.p), float(self.q)
        num = 3 + p * q * (2 - q) + p / c * (1 - q * q) - p * p * (1 - q) ** 2
        return num / (6 + 2 * p / c)

    @property
    def residual(self) -> float:
        return self.c - self.rhs()

    def to_dict(self) -> dict:
        return {
            "p": float(self.p),
            "q": float(self.q),
            "quadratic": [str(self.a), str(self.b), str(self.c0)],
            "c": self.c,
            "residual": self.residual,
        }


def bound_fixed_point(p, q) -> BoundSolution:
    """Positive root of 6c^2 + (2p - 3 - pq(2-q) + p^2(1-q)^2) c - p(1-q^2) = 0.

    Coefficients are exact rationals (floats are read by their decimal repr).
    The constant term is negative, so there is exactly one positive root.
    """
    p, q = _exact(p), _exact(q)
    if not (0 < p <= 1):
        raise OutOfRange(f"p = {p} outside (0, 1]")
    if not (0 < q < 1):
        raise OutOfRange(f"q = {q} outside (0, 1)")
    a = Fraction(6)
    b = 2 * p - 3 - p * q * (2 - q) + p * p * (1 - q) ** 2
    c0 = -p * (1 - q * q)
    root_disc = math.sqrt(float(b * b - 4 * a * c0))
    bf = float(b)
    if bf <= 0:
        c = (-bf + root_disc) / (2 * float(a))
    else:
        c = -2 * float(c0) / (bf + root_disc)
    return BoundSolution(p, q, a, b, c0, c)


def bound_grid_search(resolution: int) -> BoundSolution:
    """Best root over p, q in {1/r, ..., (r-1)/r}; first maximiser in (p, q) order."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    best = None
    for i in range(1, resolution):
        for j in range(1, resolution):
            sol = bound_fixed_point(Fraction(i, resolution), Fraction(j, resolution))
            if best is None or sol.c > best.c:
                best = sol
    return best
