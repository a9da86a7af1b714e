"""Observed convergence order of every method against a shared fine rk4 run.

    python3 scripts/convergence.py --id double --T 10 --dts 0.04,0.02,0.01
"""

import argparse
import time

from todalab.bench import convergence_errors, fit_order
from todalab.integrators import MethodKind, default_window
from todalab.reference import fine_solution
from todalab.spectral import id_spectrum


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--id", default="double")
    parser.add_argument("--T", type=float, default=10.0)
    parser.add_argument("--dts", default="0.04,0.02,0.01")
    parser.add_argument("--dt-ref", type=float, default=1e-5)
    args = parser.parse_args()

    dts = [float(v) for v in args.dts.split(",")]
    window = default_window(id_spectrum(args.id).s_max, args.T)
    start = time.perf_counter()
    reference = fine_solution(args.id, args.T, args.dt_ref, window)
    print(f"reference: rk4 dt={args.dt_ref:g} on {window} ({time.perf_counter() - start:.1f}s)")
    print(f"{'method':<11} " + " ".join(f"{'dt=' + format(dt, 'g'):>11}" for dt in dts) + "   order")
    for method in MethodKind:
        errors = convergence_errors(method, args.id, args.T, dts, window=window, reference=reference)
        row = " ".join(f"{e:11.3e}" for e in errors)
        print(f"{method.value:<11} {row}   {fit_order(dts, errors):.3f}")


if __name__ == "__main__":
    main()
