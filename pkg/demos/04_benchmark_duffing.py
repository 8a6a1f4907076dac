"""Small paired Monte Carlo on the Duffing oscillator benchmark.

Every filter replays the same 20 simulated trajectories (the trajectory only
depends on scenario seed + trial index), so RMSE differences reflect the
filters, not the noise draws.  The equivalent command line is:

    python -m nanofilter run --model duffing --filter nano,ekf,iekf,ukf,plf \\
        --trials 20 --horizon 100 --out bench_out
"""

import numpy as np

from nanofilter.bench import run_monte_carlo
from nanofilter.scenarios import ScenarioConfig

FILTERS = ("ekf", "iekf", "ukf", "plf", "nano", "nano-chol")


def main():
    cfg = ScenarioConfig(model="duffing", trials=20, horizon=100, seed=0)
    report = run_monte_carlo(cfg, FILTERS)

    print(f"duffing, {cfg.trials} paired trials, {cfg.horizon} steps, seed {cfg.seed}\n")
    print(f"{'filter':<10} {'mean rmse':>10} {'median':>8} {'iqr':>17} {'div':>4}")
    for st in report.summary():
        iqr = f"[{st.q1_rmse:.3f}, {st.q3_rmse:.3f}]"
        print(f"{st.filter_id:<10} {st.mean_rmse:>10.3f} {st.median_rmse:>8.3f} "
              f"{iqr:>17} {st.divergences:>4}")

    # paired comparison: per-trial margin of nano over the best classical filter
    nano = np.array([r.rmse for r in report.results["nano"]])
    best = np.min(
        [[r.rmse for r in report.results[fid]] for fid in ("ekf", "iekf", "ukf", "plf")],
        axis=0,
    )
    wins = int(np.sum(nano < best))
    print(f"\nnano beats the best classical filter on {wins}/{cfg.trials} shared trials")


if __name__ == "__main__":
    main()
