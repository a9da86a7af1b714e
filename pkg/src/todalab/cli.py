"""Command-line entry point: ``todalab {simulate,benchmark,spectrum,regions,order}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from todalab.bench import BenchmarkMatrix, emit_profile, emit_table, observed_order, run_benchmark
from todalab.initial_data import InitialDataKind
from todalab.integrators import BlowUpError, MethodKind
from todalab.lattice import IndexWindow
from todalab.metrics import dispersive_region, soliton_region
from todalab.spectral import DEFAULT_M, id_spectrum


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _window(text: str | None) -> IndexWindow | None:
    if text is None:
        return None
    if ":" in text:
        lo, hi = text.split(":")
        return IndexWindow(int(lo), int(hi))
    return IndexWindow.symmetric(int(text))


def cmd_simulate(args) -> int:
    out = args.out or f"{args.id}_{args.method}_T{args.T:g}.csv"
    emit_profile(args.id, args.method, args.dt, args.T, out, _window(args.window))
    print(out)
    return 0


def cmd_benchmark(args) -> int:
    methods = _list(args.methods) if args.methods != "all" else [m.value for m in MethodKind]
    ids = _list(args.ids) if args.ids != "all" else ["NoS", "PureS", "double", "quad", "dirac"]
    matrix = BenchmarkMatrix(
        methods=tuple(MethodKind(m) for m in methods),
        dts=tuple(_floats(args.dts)),
        t_finals=tuple(_floats(args.Ts)),
        ids=tuple(InitialDataKind.parse(i) for i in ids),
        regions=tuple(_list(args.regions)),
        reference_dir=Path(args.reference_dir) if args.reference_dir else None,
        dt_ref=args.dt_ref,
    )
    text = emit_table(run_benchmark(matrix, jobs=args.jobs), args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_spectrum(args) -> int:
    summary = id_spectrum(args.id, args.m)
    print(f"{'lambda':>22} {'kappa':>20} {'speed':>20}")
    for lam, kappa, speed in zip(summary.bound_states, summary.kappas, summary.speeds):
        print(f"{lam:22.15g} {kappa:20.15g} {speed:20.15g}")
    print(f"s_max = {summary.s_max:.15g}")
    return 0


def cmd_regions(args) -> int:
    s_max = id_spectrum(args.id).s_max
    sol = soliton_region(args.T, s_max).window
    disp = dispersive_region(args.T).window
    print(f"soliton    [{sol.k_min}, {sol.k_max}]")
    print(f"dispersive [{disp.k_min}, {disp.k_max}]")
    return 0


def cmd_order(args) -> int:
    order = observed_order(args.method, args.id, args.T, _floats(args.dts), dt_ref=args.dt_ref)
    print(f"{order:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="todalab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one initial datum and write its profile")
    p.add_argument("--id", required=True)
    p.add_argument("--method", required=True, choices=[m.value for m in MethodKind])
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--window", help="half-width K or 'lo:hi'; default from the soliton speed")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("benchmark", help="run a method x dt x T x id x region matrix")
    p.add_argument("--methods", default="all")
    p.add_argument("--dts", default="0.01,0.001")
    p.add_argument("--Ts", default="100")
    p.add_argument("--ids", default="all")
    p.add_argument("--regions", default="soliton,dispersive")
    p.add_argument("--reference-dir")
    p.add_argument("--dt-ref", type=float)
    p.add_argument("--format", default="markdown", choices=["markdown", "csv", "json"])
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("spectrum", help="bound states, kappas and soliton speeds")
    p.add_argument("--id", required=True)
    p.add_argument("--m", type=int, default=DEFAULT_M)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("regions", help="soliton and dispersive index ranges")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--id", required=True)
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("order", help="observed convergence order against a fine rk4 run")
    p.add_argument("--method", required=True, choices=[m.value for m in MethodKind])
    p.add_argument("--id", required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--dts", required=True)
    p.add_argument("--dt-ref", type=float, default=1e-5)
    p.set_defaults(func=cmd_order)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, BlowUpError, RuntimeError) as exc:
        print(f"todalab {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
