"""Command-line harness.

Exit codes: 0 success, 1 domain error (error class name on stderr), 2 usage error.
Every subcommand takes ``--format human|csv|json``. Machine formats print
numbers at full precision; human output rounds to 6 decimals.

CSV columns by subcommand:
  solve            step,part,element,gain,value
  opt              part,element,opt_value
  ratio            mode,runs,tie,opt,expected_final,ratio,ratio_fraction,final_min,final_max
  curve            i,expected_value,lower_bound_g[,stderr]
  bound            p,q,a,b,c0,c,residual
  verify           property,status,violations
  check-potential  order,ok,first_violation,final_lhs,final_rhs
  paper, reduce-swm, extend, compose
                   part,element,covers
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import secrets
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import SubgreedyError
from .exact import (
    bound_fixed_point,
    bound_grid_search,
    brute_force_opt,
    enum_caps,
    exact_expected_values,
    monte_carlo_expected_values,
)
from .greedy import TieBreak, check_potential_monotone, random_order_greedy, trial_permutation
from .instances import (
    BUILTIN_INSTANCES,
    as_coverage,
    compose_copies,
    extend_with_dummies,
    instance_to_dict,
    read_instance,
    dumps_instance,
    Instance,
)
from .oracle import verify_properties


class UsageError(Exception):
    pass


def _num(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.6f}"
    return str(x)


class Report:
    """Structured result plus its csv table and human rendering."""

    def __init__(self, command, provenance, data, header, rows, human):
        self.command = command
        self.provenance = provenance
        self.data = data
        self.header = header
        self.rows = rows
        self.human = human

    def render(self, fmt: str) -> str:
        if fmt == "json":
            doc = {"command": self.command, "provenance": self.provenance, "result": self.data}
            return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(self.header)
            w.writerows([[repr(v) if isinstance(v, float) else v for v in row] for row in self.rows])
            return buf.getvalue()
        return "".join(line + "\n" for line in self.human)


# ---------------------------------------------------------------------------
# argument helpers


def _load(args) -> Instance:
    builtin = getattr(args, "paper", None)
    path = getattr(args, "instance", None)
    if (builtin is None) == (path is None):
        raise UsageError("give exactly one of --paper NAME or --instance PATH")
    if builtin is not None:
        if builtin not in BUILTIN_INSTANCES:
            raise UsageError(f"unknown builtin instance {builtin!r}; choose from {sorted(BUILTIN_INSTANCES)}")
        return BUILTIN_INSTANCES[builtin]()
    return read_instance(path)


def _tie(args, instance: Instance | None) -> TieBreak:
    text = args.tie
    if text is None:
        text = (instance.tie_hint if instance is not None else None) or "first-name"
    try:
        return TieBreak.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _seed(args) -> int:
    if args.seed == "entropy":
        return secrets.randbits(63)
    try:
        return int(args.seed)
    except ValueError:
        raise UsageError(f"--seed must be an integer or 'entropy', got {args.seed!r}") from None


def _order(args, instance: Instance):
    if args.order is None:
        return None
    names = [t for t in args.order.split(",") if t]
    known = set(instance.matroid.part_names)
    for t in names:
        if t not in known:
            raise UsageError(f"unknown part {t!r} in --order")
    if sorted(names) != sorted(known) or len(names) != len(known):
        raise UsageError("--order must list every part exactly once")
    return names


def _prov(args, instance=None, tie=None, seed=None) -> dict:
    return {
        "version": __version__,
        "instance": instance.name if instance is not None else None,
        "tie": str(tie) if tie is not None else None,
        "seed": seed,
    }


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(args) -> Report:
    inst = _load(args)
    tie = _tie(args, inst)
    order = _order(args, inst)
    seed = _seed(args)
    trace = random_order_greedy(inst, order=order, seed=seed, tie=tie)
    rows = [[s.index, s.part, s.element, s.gain, s.value] for s in trace.steps]
    human = [
        f"instance: {inst.name}",
        f"tie: {tie}",
        "order: " + ",".join(inst.matroid.part_names[k] for k in trace.permutation),
        "picked: " + ",".join(trace.picks),
        f"final value: {_num(trace.final_value)}",
    ]
    if args.trace:
        human += trace.render().rstrip("\n").split("\n")
    return Report("solve", _prov(args, inst, tie, None if order else seed), trace.to_dict(),
                  ["step", "part", "element", "gain", "value"], rows, human)


def cmd_opt(args) -> Report:
    inst = _load(args)
    opt = brute_force_opt(inst)
    M = inst.matroid
    chosen = sorted(opt.base, key=M.part_of)
    rows = [[M.part_names[M.part_of(u)], u, opt.value] for u in chosen]
    data = {"base": chosen, "value": opt.value, "bases_checked": opt.bases_checked}
    human = [f"instance: {inst.name}", "optimum: " + ",".join(chosen), f"value: {_num(opt.value)}",
             f"bases checked: {opt.bases_checked}"]
    return Report("opt", _prov(args, inst), data, ["part", "element", "opt_value"], rows, human)


def _expectation(args, inst, tie):
    if args.exact and args.trials is not None:
        raise UsageError("--exact and --trials are mutually exclusive")
    order_cap = enum_caps()[0]
    if args.exact or (args.trials is None and math.factorial(inst.m) <= order_cap):
        return exact_expected_values(inst, tie, workers=args.workers), None
    seed = _seed(args)
    trials = args.trials if args.trials is not None else 10_000
    if trials < 1:
        raise UsageError("--trials must be >= 1")
    return monte_carlo_expected_values(inst, trials, seed, tie, workers=args.workers), seed


def cmd_ratio(args) -> Report:
    inst = _load(args)
    tie = _tie(args, inst)
    rep, seed = _expectation(args, inst, tie)
    data = rep.to_dict()
    frac = str(rep.ratio_fraction) if rep.ratio_fraction is not None else ""
    rows = [[rep.mode, rep.runs, str(tie), rep.opt, rep.expected_final, rep.ratio, frac,
             rep.final_min, rep.final_max]]
    human = [
        f"instance: {inst.name}",
        f"tie: {tie}",
        f"mode: {rep.mode} ({rep.runs} orders)",
        f"opt: {_num(rep.opt)}" + (" at " + ",".join(sorted(rep.opt_base)) if rep.opt_base else
                                   " (base count exceeds the cap)" if rep.opt is None else ""),
        f"expected: {_num(rep.expected_final)}",
        f"ratio: {_num(rep.ratio)}" + (f" = {frac}" if frac else ""),
        f"final value range: [{_num(rep.final_min)}, {_num(rep.final_max)}]",
    ]
    header = ["mode", "runs", "tie", "opt", "expected_final", "ratio", "ratio_fraction", "final_min", "final_max"]
    return Report("ratio", _prov(args, inst, tie, seed), data, header, rows, human)


def cmd_curve(args) -> Report:
    inst = _load(args)
    tie = _tie(args, inst)
    rep, seed = _expectation(args, inst, tie)
    rows = rep.csv_rows()
    human = [f"instance: {inst.name}  mode: {rep.mode}  tie: {tie}",
             "\t".join(rep.csv_header())]
    human += ["\t".join(_num(v) if not isinstance(v, int) else str(v) for v in row) for row in rows]
    return Report("curve", _prov(args, inst, tie, seed), rep.to_dict(), rep.csv_header(), rows, human)


def cmd_bound(args) -> Report:
    if args.grid is not None:
        if args.p is not None or args.q is not None:
            raise UsageError("--grid excludes --p/--q")
        if args.grid < 2:
            raise UsageError("--grid must be >= 2")
        sol = bound_grid_search(args.grid)
    else:
        if args.p is None or args.q is None:
            raise UsageError("give --p and --q, or --grid N")
        sol = bound_fixed_point(args.p, args.q)
    data = sol.to_dict()
    if args.grid is not None:
        data["grid"] = args.grid
    rows = [[float(sol.p), float(sol.q), str(sol.a), str(sol.b), str(sol.c0), sol.c, sol.residual]]
    human = [
        f"p = {_num(float(sol.p))}, q = {_num(float(sol.q))}",
        f"quadratic: {sol.a} c^2 + ({sol.b}) c + ({sol.c0}) = 0"
        f"  [6 c^2 {float(sol.b):+.10g} c {float(sol.c0):+.10g}]",
        f"c = {sol.c:.6f}",
    ]
    return Report("bound", _prov(args), data, ["p", "q", "a", "b", "c0", "c", "residual"], rows, human)


def _instance_report(command, args, inst: Instance, extra_human=()) -> Report:
    doc = instance_to_dict(inst)
    if args.out:
        Path(args.out).write_text(dumps_instance(inst), encoding="utf-8")
    cov = as_coverage(inst.oracle)
    rows = []
    for pname, elems in inst.matroid.parts:
        for u in elems:
            pts = sorted(cov.covers[u]) if cov is not None else []
            rows.append([pname, u, " ".join(pts)])
    human = [f"instance: {inst.name}", f"parts: {inst.m}", f"elements: {inst.size}", *extra_human]
    if args.out:
        human.append(f"written to {args.out}")
    return Report(command, _prov(args, inst), doc, ["part", "element", "covers"], rows, human)


def _coverage_copy(inst: Instance) -> Instance:
    cov = as_coverage(inst.oracle)
    if cov is None:
        raise SubgreedyError(f"oracle of kind {inst.oracle.kind!r} has no coverage form")
    return Instance(inst.matroid, cov, inst.name, inst.tie_hint)


def cmd_paper(args) -> Report:
    if args.name not in BUILTIN_INSTANCES:
        raise UsageError(f"unknown builtin instance {args.name!r}")
    inst = BUILTIN_INSTANCES[args.name]()
    return _instance_report("paper", args, inst, [f"suggested tie: {inst.tie_hint}"])


def cmd_reduce_swm(args) -> Report:
    inst = read_instance(args.instance)
    if inst.swm is None:
        raise UsageError("reduce-swm needs an swm-coverage instance file")
    return _instance_report("reduce-swm", args, _coverage_copy(inst))


def cmd_extend(args) -> Report:
    if args.dummies < 0:
        raise UsageError("--dummies must be >= 0")
    inst = _load(args)
    out = extend_with_dummies(inst, args.dummies)
    if out.swm is not None:
        out = _coverage_copy(out)
    return _instance_report("extend", args, out)


def cmd_compose(args) -> Report:
    if args.copies < 1:
        raise UsageError("--copies must be >= 1")
    inst = _load(args)
    return _instance_report("compose", args, compose_copies(inst, args.copies))


def cmd_verify(args) -> Report:
    inst = _load(args)
    seed = _seed(args)
    mode = "sampled" if args.sampled else "exhaustive"
    rep = verify_properties(inst.oracle, mode=mode, trials=args.trials, seed=seed,
                            subsample_trials=args.trials)
    rows = [[p, "fail" if rep.violation_counts.get(p) else "pass", rep.violation_counts.get(p, 0)]
            for p in rep.checked]
    human = [f"instance: {inst.name}", f"mode: {mode}", f"oracle queries: {rep.queries}"]
    human += [f"{p}: {s} ({n} violations)" for p, s, n in rows]
    human += [v.describe() for v in rep.violations[:20]]
    human += rep.notes
    return Report("verify", _prov(args, inst, seed=seed if mode == "sampled" else None), rep.to_dict(),
                  ["property", "status", "violations"], rows, human)


def cmd_check_potential(args) -> Report:
    import itertools

    inst = _load(args)
    tie = _tie(args, inst)
    M = inst.matroid
    opt = brute_force_opt(inst)
    T = opt.base
    S = frozenset(t for t in (args.S or "").split(",") if t)
    order_cap = enum_caps()[0]
    seed = None
    if math.factorial(M.m) <= order_cap:
        orders = [list(p) for p in itertools.permutations(range(M.m))]
    else:
        seed = _seed(args)
        orders = [trial_permutation(M.m, seed, t) for t in range(args.trials)]
    rows, results = [], []
    for order in orders:
        trace = random_order_greedy(inst, order=order, tie=tie, record_options=False)
        chk = check_potential_monotone(inst, trace, S, T)
        label = ",".join(M.part_names[k] for k in order)
        rows.append([label, chk.ok, "" if chk.first_violation is None else chk.first_violation,
                     chk.final_lhs, chk.final_rhs])
        results.append({"order": label, "ok": chk.ok, "first_violation": chk.first_violation,
                        "potentials": chk.potentials, "final_lhs": chk.final_lhs, "final_rhs": chk.final_rhs})
    n_ok = sum(r["ok"] for r in results)
    data = {"S": sorted(S), "T": sorted(T), "orders": len(orders), "passed": n_ok, "results": results}
    human = [f"instance: {inst.name}", f"tie: {tie}", f"T = OPT = {','.join(sorted(T))}",
             f"S = {{{','.join(sorted(S))}}}", f"orders passing: {n_ok}/{len(orders)}"]
    human += [f"FAIL {r['order']} at step {r['first_violation']}" for r in results if not r["ok"]]
    return Report("check-potential", _prov(args, inst, tie, seed), data,
                  ["order", "ok", "first_violation", "final_lhs", "final_rhs"], rows, human)


# ---------------------------------------------------------------------------
# parser


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subgreedy",
        description="Random-order greedy over partition matroids: runs, exact ratios, bounds, checks.",
        epilog="SGL_ENUM_CAP=N (or N,B) overrides the caps on enumerated orders (default 8!) "
               "and bases (default 1e7).",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, instance=True, tie=False, seed=False):
        p.add_argument("--format", choices=("human", "csv", "json"), default="human")
        p.add_argument("--output", help="write the report here instead of stdout")
        if instance:
            p.add_argument("--paper", choices=sorted(BUILTIN_INSTANCES), help="builtin instance")
            p.add_argument("--instance", help="instance JSON file")
        if tie:
            p.add_argument("--tie", help="first-name | last-index | priority-list:PAT,... | seeded-random:SEED "
                                         "(default: the instance's suggested rule, else first-name)")
        if seed:
            p.add_argument("--seed", default="0", help="integer seed or 'entropy' (default 0)")

    p = sub.add_parser("solve", help="one greedy run")
    common(p, tie=True, seed=True)
    p.add_argument("--order", help="comma-separated part names; default is a uniform order from --seed")
    p.add_argument("--trace", action="store_true", help="print the per-step trace (tab-separated)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("opt", help="brute-force optimum over all bases")
    common(p)
    p.set_defaults(func=cmd_opt)

    for name, func, helptext in (("ratio", cmd_ratio, "expected greedy value over opt"),
                                 ("curve", cmd_curve, "per-step expected values against g(i/m)*opt")):
        p = sub.add_parser(name, help=helptext)
        common(p, tie=True, seed=True)
        p.add_argument("--exact", action="store_true", help="enumerate all m! orders")
        p.add_argument("--trials", type=int, help="Monte-Carlo orders")
        p.add_argument("--workers", type=int, default=1, help="threads (results do not depend on this)")
        p.set_defaults(func=func)

    p = sub.add_parser("bound", help="fixed-point bound for parameters p, q")
    common(p, instance=False)
    p.add_argument("--p", type=_fraction)
    p.add_argument("--q", type=_fraction)
    p.add_argument("--grid", type=int, help="search p, q over {1/N, ..., (N-1)/N}")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("paper", help="emit a builtin instance")
    common(p, instance=False)
    p.add_argument("name", choices=sorted(BUILTIN_INSTANCES))
    p.add_argument("--out", help="instance file to write")
    p.set_defaults(func=cmd_paper)

    p = sub.add_parser("reduce-swm", help="reduce an swm-coverage file to a partition-matroid instance")
    common(p, instance=False)
    p.add_argument("--instance", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce_swm)

    p = sub.add_parser("extend", help="pad with dummy singleton parts")
    common(p)
    p.add_argument("--dummies", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("compose", help="disjoint union of renamed copies")
    common(p)
    p.add_argument("--copies", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("verify", help="check non-negativity, monotonicity, submodularity")
    common(p, seed=True)
    p.add_argument("--sampled", action="store_true", help="random triples plus the subsampling inequality")
    p.add_argument("--trials", type=int, default=10_000)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("check-potential", help="potential monotonicity on every order (S given, T = OPT)")
    common(p, tie=True, seed=True)
    p.add_argument("--S", help="comma-separated elements of S (default empty)")
    p.add_argument("--trials", type=int, default=1000, help="sampled orders when m! exceeds the cap")
    p.set_defaults(func=cmd_check_potential)
    return parser


def run_command(argv: list[str], stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        enum_caps()
    except ValueError as exc:
        print(f"{parser.prog}: usage error: {exc}", file=stderr)
        return 2
    try:
        report = args.func(args)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: usage error: {exc}", file=stderr)
        return 2
    except SubgreedyError as exc:
        print(f"{type(exc).__name__}: {exc}", file=stderr)
        return 1
    text = report.render(args.format)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)
    return 0


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
