"""Generate a few synthetic instances and run the default semantics grid.

Writes records.csv, cactus.csv and summary.csv into the output directory
(default: ./sweep-out) and prints the tier table.

    python3 demos/benchmark_sweep.py [out_dir]
"""

from __future__ import annotations

import sys
from pathlib import Path

from prioqa.bench import GenParams, gen_instance, instance_stats, run_suite, write_cactus_csv, \
    write_records_csv, write_stats_csv, write_summary_csv
from prioqa.solver import DEFAULT_GRID


def main(out_dir: str = "sweep-out") -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    work = []
    for ratio in (0.2, 0.35, 0.5):
        params = GenParams(n_facts=2000, conflict_ratio=ratio, avg_degree=2.0, prio_mode="nonscore",
                           n_answers=30, seed=int(ratio * 100))
        inst, answers = gen_instance(params)
        work.append((f"u2000c{int(ratio * 100)}", inst, answers))

    records, summary = run_suite(work, DEFAULT_GRID, jobs=1)
    with open(out / "records.csv", "w", newline="") as f:
        write_records_csv(records, f)
    with open(out / "cactus.csv", "w", newline="") as f:
        write_cactus_csv(records, f)
    with open(out / "summary.csv", "w", newline="") as f:
        write_summary_csv(summary, f)
    with open(out / "stats.csv", "w", newline="") as f:
        write_stats_csv([instance_stats(inst, label=label) for label, inst, _ in work], f)

    cols = ("Trivial", "Grounded", "ParetoBound", "Direct", "yes", "no", "unknown")
    print(f"{'semantics':10s}" + "".join(f"{c:>12s}" for c in cols))
    for row in summary.table():
        print(f"{row['semantics']:10s}" + "".join(f"{row[c]:>12d}" for c in cols))
    print(f"\n{summary.total} decisions, {summary.unknown} unknown; CSV files in {out}/")


if __name__ == "__main__":
    main(*sys.argv[1:2])
