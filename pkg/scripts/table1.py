"""MVFB against Monte Carlo (twice MVFB's run count) on every benchmark.

Writes ``results/table1.json`` and prints a markdown table with best
latencies, placement-run counts and CPU seconds per placer.
"""

import argparse
import json
import time
from pathlib import Path

from trapmap.fabric import TechParams, parse_fabric, parse_tech
from trapmap.placer import Mapper, monte_carlo_place, mvfb_place
from trapmap.qasm import build_qidg, parse_qasm

ROOT = Path(__file__).resolve().parents[1]


def run(bench_dir, fabric_path, tech, seeds, patience=3, rng_seed=0, only=None):
    fabric = parse_fabric(Path(fabric_path).read_text())
    rows = []
    for path in sorted(Path(bench_dir).glob("*.qasm")):
        if only and path.stem not in only:
            continue
        prog = parse_qasm(path.read_text())
        mapper = Mapper(build_qidg(prog), fabric, tech, qubits=prog.qubits)
        for m in seeds:
            t0 = time.process_time()
            mv = mvfb_place(mapper, m, patience, rng_seed)
            t1 = time.process_time()
            mc = monte_carlo_place(mapper, 2 * mv.placement_runs, rng_seed)
            t2 = time.process_time()
            rows.append(
                {
                    "benchmark": path.stem,
                    "m": m,
                    "mvfb_us": mv.best.latency,
                    "mc_us": mc.best.latency,
                    "mvfb_runs": mv.placement_runs,
                    "mc_runs": mc.placement_runs,
                    "mvfb_cpu_s": round(t1 - t0, 1),
                    "mc_cpu_s": round(t2 - t1, 1),
                }
            )
            print(json.dumps(rows[-1], sort_keys=True), flush=True)
    return rows


def markdown(rows) -> str:
    head = ["benchmark", "m", "mvfb_us", "mc_us", "mvfb_runs", "mc_runs", "mvfb_cpu_s", "mc_cpu_s"]
    out = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for r in rows:
        out.append("| " + " | ".join(str(r[h]) for h in head) + " |")
    return "\n".join(out) + "\n"


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--benchmarks", default=ROOT / "data" / "benchmarks")
    ap.add_argument("--only", nargs="*", help="benchmark stems to run (default: all)")
    ap.add_argument("--fabric", default=ROOT / "data" / "fabric_45x85.txt")
    ap.add_argument("--tech", default=ROOT / "data" / "tech_default.cfg")
    ap.add_argument("--seeds", type=int, nargs="+", default=[25, 100])
    ap.add_argument("--rng-seed", type=int, default=0)
    ap.add_argument("--out", default=ROOT / "results" / "table1.json")
    args = ap.parse_args()
    tech = parse_tech(Path(args.tech).read_text()) if args.tech else TechParams()
    rows = run(args.benchmarks, args.fabric, tech, args.seeds, rng_seed=args.rng_seed, only=args.only)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")
    print(markdown(rows), end="")
