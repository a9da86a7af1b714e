"""Relative Hamiltonian error over time for sv2symp and a non-symplectic method.

Writes ``t, <method>...`` columns to CSV and prints the maximum error and a
Newey-West trend interval for each method.

    python3 scripts/energy_drift.py --id quad --dt 0.01 --T 1000 --out energy.csv
"""

import argparse

import numpy as np
import statsmodels.api as sm

from todalab.bench import energy_history


def trend_interval(times: np.ndarray, errors: np.ndarray) -> tuple[float, float]:
    lags = int(4 * (len(times) / 100) ** (2 / 9))
    fit = sm.OLS(errors, sm.add_constant(times)).fit(cov_type="HAC", cov_kwds={"maxlags": lags})
    lo, hi = fit.conf_int()[1]
    return float(lo), float(hi)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--id", default="quad")
    parser.add_argument("--methods", default="sv2symp,midpointqp")
    parser.add_argument("--dt", type=float, default=0.01)
    parser.add_argument("--T", type=float, default=1000.0)
    parser.add_argument("--every", type=int, default=100, help="sample every N steps")
    parser.add_argument("--out")
    args = parser.parse_args()

    columns, times = {}, None
    for method in args.methods.split(","):
        times, errors = energy_history(args.id, method, args.dt, args.T, args.every)
        columns[method] = errors
        lo, hi = trend_interval(times, errors)
        print(f"{method:<11} max |dH| {np.max(np.abs(errors)):.3e}  final {errors[-1]:+.3e}  "
              f"slope 95% [{lo:+.2e}, {hi:+.2e}]")
    if args.out:
        data = np.column_stack([times] + list(columns.values()))
        np.savetxt(args.out, data, delimiter=",", header="t," + ",".join(columns), comments="")


if __name__ == "__main__":
    main()
