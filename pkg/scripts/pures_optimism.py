"""Dispersive-region errors of midpointqp and sv2symp on PureS versus double.

Compares how much the two second-order methods differ away from the soliton
when the initial datum is a pure soliton and when it also radiates.

    python3 scripts/pures_optimism.py --T 200 --dts 0.01,0.001
"""

import argparse

from todalab.bench import BenchmarkMatrix, run_benchmark


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--T", type=float, default=200.0)
    parser.add_argument("--dts", default="0.01,0.001")
    args = parser.parse_args()

    dts = tuple(float(v) for v in args.dts.split(","))
    table = run_benchmark(BenchmarkMatrix(methods=("midpointqp", "sv2symp"), dts=dts,
                                          t_finals=(args.T,), ids=("PureS", "double")))
    print(f"{'id':<7} {'dt':>7} {'region':<11} {'midpointqp':>11} {'sv2symp':>11} {'ratio':>6}")
    for kind in ("PureS", "double"):
        for dt in dts:
            for region in ("soliton", "dispersive"):
                mq, sv = (table.select(id=kind, dt=dt, region=region, method=m)[0].err_a
                          for m in ("midpointqp", "sv2symp"))
                print(f"{kind:<7} {dt:>7g} {region:<11} {mq:11.3e} {sv:11.3e} {mq / sv:6.2f}")


if __name__ == "__main__":
    main()
