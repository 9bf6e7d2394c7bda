"""Mapped vs. ideal latency on every benchmark (MVFB, M=25 and M=100).

Writes ``results/table2.json`` and prints a markdown table. The gap share
is (mapped - ideal) / mapped, the part of the latency spent routing and
waiting for channels.
"""

import argparse
import json
import time
from pathlib import Path

from trapmap.fabric import TechParams, parse_fabric, parse_tech
from trapmap.placer import Mapper, mvfb_place
from trapmap.qasm import build_qidg, ideal_latency, parse_qasm

ROOT = Path(__file__).resolve().parents[1]


def run(bench_dir, fabric_path, tech, seeds=(25, 100), patience=3, rng_seed=0):
    fabric = parse_fabric(Path(fabric_path).read_text())
    rows = []
    for path in sorted(Path(bench_dir).glob("*.qasm")):
        prog = parse_qasm(path.read_text())
        g = build_qidg(prog)
        mapper = Mapper(g, fabric, tech, qubits=prog.qubits)
        row = {
            "benchmark": path.stem,
            "qubits": len(prog.qubits),
            "instructions": len(g),
            "ideal_us": ideal_latency(g, tech),
        }
        for m in seeds:
            t0 = time.perf_counter()
            res = mvfb_place(mapper, m, patience, rng_seed)
            row[f"mvfb_m{m}_us"] = res.best.latency
            row[f"runs_m{m}"] = res.placement_runs
            row[f"seconds_m{m}"] = round(time.perf_counter() - t0, 2)
        best = row[f"mvfb_m{max(seeds)}_us"]
        row["gap_us"] = best - row["ideal_us"]
        row["gap_share"] = round(row["gap_us"] / best, 4)
        rows.append(row)
    rows.sort(key=lambda r: (r["qubits"], r["instructions"]))
    return rows


def markdown(rows, seeds=(25, 100)) -> str:
    head = ["benchmark", "qubits", "instructions", "ideal_us"] + [f"mvfb_m{m}_us" for m in seeds] + ["gap_us", "gap_share"]
    out = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for r in rows:
        out.append("| " + " | ".join(str(r[h]) for h in head) + " |")
    return "\n".join(out) + "\n"


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--benchmarks", default=ROOT / "data" / "benchmarks")
    ap.add_argument("--fabric", default=ROOT / "data" / "fabric_45x85.txt")
    ap.add_argument("--tech", default=ROOT / "data" / "tech_default.cfg")
    ap.add_argument("--rng-seed", type=int, default=0)
    ap.add_argument("--out", default=ROOT / "results" / "table2.json")
    args = ap.parse_args()
    tech = parse_tech(Path(args.tech).read_text()) if args.tech else TechParams()
    rows = run(args.benchmarks, args.fabric, tech, rng_seed=args.rng_seed)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")
    print(markdown(rows), end="")
