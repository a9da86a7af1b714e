"""Desk-scale benchmark: all methods, dt in {0.01, 0.001}, all five initial data.

    python3 scripts/desk_benchmark.py --T 100 --out results/desk_T100
"""

import argparse
import time
from pathlib import Path

from todalab.bench import BenchmarkMatrix, emit_table, run_benchmark


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--T", default="100", help="comma-separated final times")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--reference-dir", type=Path)
    parser.add_argument("--out", type=Path, help="prefix for .md/.csv/.json outputs")
    args = parser.parse_args()

    matrix = BenchmarkMatrix.desk_scale(
        t_finals=[float(t) for t in args.T.split(",")], reference_dir=args.reference_dir)
    start = time.perf_counter()
    table = run_benchmark(matrix, jobs=args.jobs)
    elapsed = time.perf_counter() - start
    markdown = emit_table(table, "markdown")
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        for fmt, suffix in (("markdown", ".md"), ("csv", ".csv"), ("json", ".json")):
            args.out.with_suffix(suffix).write_text(emit_table(table, fmt), encoding="utf-8")
    print(markdown)
    print(f"{len(table)} rows in {elapsed:.0f}s")


if __name__ == "__main__":
    main()
