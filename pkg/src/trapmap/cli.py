"""Command-line front end: ``map``, ``baseline``, ``compare`` and ``validate``."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from .fabric import FabricError, TechParams, parse_fabric, parse_tech
from .placer import InsufficientTraps, Mapper, PlacerResult, center_placement, monte_carlo_place, mvfb_place
from .qasm import QasmError, build_qidg, ideal_latency, parse_qasm
from .sim import Stuck
from .svg import render_svg
from .trace import breakdown, parse_trace, validate_trace, violations_json, violations_text


class InputError(Exception):
    """A user-facing input problem; reported on stderr with exit status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -- loading ---------------------------------------------------------------


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def load_program(path):
    try:
        return parse_qasm(_read(path))
    except QasmError as exc:
        raise InputError(f"{path}:{exc.lineno}: {exc}") from None


def load_fabric(path):
    try:
        return parse_fabric(_read(path))
    except FabricError as exc:
        raise InputError(f"{path}: {exc}") from None


def load_tech(path) -> TechParams:
    if path is None:
        return TechParams()
    try:
        return parse_tech(_read(path))
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _dump(path, text):
    Path(path).write_text(text)


# -- map -----------------------------------------------------------------------


def run_placer(mapper: Mapper, args) -> PlacerResult:
    if args.placer == "center":
        rec = mapper.record(center_placement(mapper.fabric, mapper.qubits), "forward")
        return PlacerResult(rec, [rec])
    if args.placer == "mc":
        return monte_carlo_place(mapper, args.runs, args.rng_seed)
    return mvfb_place(mapper, args.seeds, args.patience, args.rng_seed)


def build_report(args, prog, g, tech, result: PlacerResult, baseline, violations, wall_ms=None) -> dict:
    best = result.best
    rows = []
    for n, row in breakdown(best.trace, g, tech).items():
        ins = g.instructions[n]
        rows.append({"id": n, "gate": ins.gate.token, "operands": list(ins.operands), **row})
    report = {
        "benchmark": Path(args.qasm).stem,
        "placer": args.placer,
        "m": args.seeds if args.placer == "mvfb" else None,
        "patience": args.patience if args.placer == "mvfb" else None,
        "mc_runs": args.runs if args.placer == "mc" else None,
        "rng_seed": args.rng_seed,
        "placement_runs": result.placement_runs,
        "best_latency_us": best.latency,
        "trace_latency_us": best.trace.total_latency,
        "baseline_latency_us": baseline,
        "difference_us": best.latency - baseline,
        "winning_run": {"direction": best.direction, "seed": best.seed, "index": best.index},
        "initial_placement": {q: list(c) for q, c in sorted(best.initial.items())},
        "final_placement": {q: list(c) for q, c in sorted(best.final.items())},
        "totals_us": {
            "gate": sum(r["gate"] for r in rows),
            "routing": sum(r["routing"] for r in rows),
            "congestion": sum(r["congestion"] for r in rows),
        },
        "instructions": rows,
        "violations": [v.to_dict() for v in violations],
    }
    if wall_ms is not None:
        report["wall_clock_ms"] = wall_ms
    return report


def cmd_map(args) -> int:
    prog = load_program(args.qasm)
    fabric = load_fabric(args.fabric)
    tech = load_tech(args.tech)
    g = build_qidg(prog)
    t0 = time.perf_counter()
    mapper = Mapper(g, fabric, tech, qubits=prog.qubits)
    try:
        result = run_placer(mapper, args)
    except Stuck as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps(exc.state, default=str, sort_keys=True, indent=2), file=sys.stderr)
        return 2
    wall_ms = round((time.perf_counter() - t0) * 1000) if args.wall_clock else None
    best = result.best
    violations = validate_trace(best.trace, g, fabric, tech, best.trace.timings or None)
    baseline = ideal_latency(g, tech)
    if args.trace:
        _dump(args.trace, best.trace.format())
    if args.report:
        report = build_report(args, prog, g, tech, result, baseline, violations, wall_ms)
        _dump(args.report, json.dumps(report, indent=2, sort_keys=True) + "\n")
    if args.svg:
        _dump(args.svg, render_svg(fabric, best.final, best.trace, args.svg_route))
    if violations:
        sys.stderr.write(violations_text(violations))
        return 1
    print(_num(best.latency))
    return 0


def _num(x):
    return int(x) if float(x).is_integer() else x


# -- baseline ------------------------------------------------------------------


def cmd_baseline(args) -> int:
    prog = load_program(args.qasm)
    tech = load_tech(args.tech)
    print(_num(ideal_latency(build_qidg(prog), tech)))
    return 0


# -- compare -------------------------------------------------------------------


def trial_seed(base: int, trial: int) -> int:
    digest = hashlib.sha256(f"trial:{base}:{trial}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def compare(mapper: Mapper, seeds_m: int, patience: int, trials: int, rng_seed: int) -> list[dict]:
    """MVFB with ``seeds_m`` seeds against MC with twice MVFB's run count, per trial."""
    rows = []
    for t in range(trials):
        s = trial_seed(rng_seed, t)
        mv = mvfb_place(mapper, seeds_m, patience, s)
        budget = 2 * mv.placement_runs
        mc = monte_carlo_place(mapper, budget, s)
        assert mc.placement_runs == budget, "MC budget must be exactly 2 m'"
        rows.append(
            {
                "trial": t,
                "mvfb_latency_us": mv.best.latency,
                "mc_latency_us": mc.best.latency,
                "mvfb_runs": mv.placement_runs,
                "mc_runs": mc.placement_runs,
            }
        )
    return rows


def summarize(rows) -> dict:
    n = len(rows)
    wins = sum(1 for r in rows if r["mvfb_latency_us"] <= r["mc_latency_us"])
    return {
        "trials": n,
        "mvfb_wins": wins,
        "win_rate": wins / n if n else 0.0,
        "mean_mvfb_latency_us": sum(r["mvfb_latency_us"] for r in rows) / n if n else 0.0,
        "mean_mc_latency_us": sum(r["mc_latency_us"] for r in rows) / n if n else 0.0,
    }


def cmd_compare(args) -> int:
    prog = load_program(args.qasm)
    fabric = load_fabric(args.fabric)
    tech = load_tech(args.tech)
    mapper = Mapper(build_qidg(prog), fabric, tech, qubits=prog.qubits)
    try:
        rows = compare(mapper, args.seeds, args.patience, args.trials, args.rng_seed)
    except Stuck as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    summary = summarize(rows)
    print(f"{'trial':>5} {'mvfb_us':>9} {'mc_us':>9} {'m_prime':>8} {'mc_runs':>8}")
    for r in rows:
        print(
            f"{r['trial']:>5} {_num(r['mvfb_latency_us']):>9} {_num(r['mc_latency_us']):>9} "
            f"{r['mvfb_runs']:>8} {r['mc_runs']:>8}"
        )
    print(
        f"MVFB <= MC in {summary['mvfb_wins']}/{summary['trials']} trials "
        f"(win rate {summary['win_rate']:.2f}); mean MVFB {summary['mean_mvfb_latency_us']:.1f} us, "
        f"mean MC {summary['mean_mc_latency_us']:.1f} us"
    )
    if args.report:
        doc = {
            "benchmark": Path(args.qasm).stem,
            "m": args.seeds,
            "patience": args.patience,
            "rng_seed": args.rng_seed,
            "rows": rows,
            "summary": summary,
        }
        _dump(args.report, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


# -- validate ------------------------------------------------------------------


def cmd_validate(args) -> int:
    prog = load_program(args.qasm)
    fabric = load_fabric(args.fabric)
    tech = load_tech(args.tech)
    try:
        tr = parse_trace(_read(args.trace))
    except ValueError as exc:
        raise InputError(f"{args.trace}: {exc}") from None
    vs = validate_trace(tr, build_qidg(prog), fabric, tech)
    sys.stdout.write(violations_json(vs) if args.json else (violations_text(vs) or "valid\n"))
    return 1 if vs else 0


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="trapmap", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("map", help="schedule, route and place a program on a fabric")
    m.add_argument("--qasm", required=True)
    m.add_argument("--fabric", required=True)
    m.add_argument("--tech")
    m.add_argument("--placer", choices=("center", "mc", "mvfb"), default="mvfb")
    m.add_argument("--seeds", type=int, default=25, help="MVFB seed count M")
    m.add_argument("--patience", type=int, default=3, help="MVFB runs without improvement before a seed stops")
    m.add_argument("--runs", type=int, default=100, help="Monte Carlo placement runs")
    m.add_argument("--rng-seed", type=int, default=0)
    m.add_argument("--trace")
    m.add_argument("--report")
    m.add_argument("--svg")
    m.add_argument("--svg-route", type=int, help="overlay the routes of this instruction id")
    m.add_argument("--wall-clock", action="store_true", help="add wall_clock_ms to the report")
    m.set_defaults(func=cmd_map)

    b = sub.add_parser("baseline", help="ideal latency with free routing")
    b.add_argument("--qasm", required=True)
    b.add_argument("--tech")
    b.set_defaults(func=cmd_baseline)

    c = sub.add_parser("compare", help="MVFB against Monte Carlo with twice the runs")
    c.add_argument("--qasm", required=True)
    c.add_argument("--fabric", required=True)
    c.add_argument("--tech")
    c.add_argument("--seeds", type=int, default=25)
    c.add_argument("--patience", type=int, default=3)
    c.add_argument("--trials", type=int, default=20)
    c.add_argument("--rng-seed", type=int, default=0)
    c.add_argument("--report")
    c.set_defaults(func=cmd_compare)

    v = sub.add_parser("validate", help="re-audit a trace file")
    v.add_argument("--qasm", required=True)
    v.add_argument("--fabric", required=True)
    v.add_argument("--tech")
    v.add_argument("--trace", required=True)
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, InsufficientTraps) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
