"""Robustness sweep: contaminate the Duffing measurements with outliers.

The truth draws measurement noise from a two-component mixture (nominal with
probability 1-k, a 100x-variance component with probability k) while every
filter keeps believing the nominal Gaussian R.  The sweep reruns the same
paired Monte Carlo at each contamination level on the published grid.

Command-line equivalent:

    python -m nanofilter sweep --model duffing --mismatch outlier \\
        --filter ekf,ukf,nano --trials 10 --horizon 80 --out sweep_out
"""

from nanofilter.bench import sweep_mismatch
from nanofilter.scenarios import OUTLIER_GRID, ScenarioConfig

FILTERS = ("ekf", "ukf", "nano")


def main():
    base = ScenarioConfig(model="duffing", trials=10, horizon=80, seed=0)
    levels = OUTLIER_GRID["duffing"]
    table = sweep_mismatch(base, "outlier", levels, FILTERS)

    print(f"duffing outlier sweep, {base.trials} trials x {base.horizon} steps\n")
    header = f"{'k':>5} " + "".join(f"{fid:>10}" for fid in FILTERS)
    print(header + "   (mean rmse; 'diverge' = majority of trials failed)")
    for level in table.levels:
        row = f"{level:>5.2f} "
        for fid in FILTERS:
            row += f"{table.reports[level].stats(fid).label:>10}"
        print(row)

    print("\nEvery filter degrades with contamination it does not model; the")
    print("natural-gradient update stays PD throughout, so it degrades without")
    print("dying, which is the property the benchmark grid is checking.")


if __name__ == "__main__":
    main()
