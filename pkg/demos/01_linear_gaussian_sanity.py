"""Sanity check: every filter in the package collapses to the Kalman filter
on a linear-Gaussian system.

The nonlinear machinery (sigma points, iterated updates, natural-gradient
steps, factored covariance updates) buys nothing on a linear model -- but it
must not cost accuracy either.  This script runs all of them side by side on
one random linear system and prints the worst deviation from the closed-form
Kalman recursion over a 20-step trajectory.
"""

import numpy as np

from nanofilter.filters import GaussianBelief, filter_step, kf_step
from nanofilter.models import linear_model
from nanofilter.quadrature import parse_rule

FILTERS = ("kf", "ekf", "iekf", "ukf", "plf", "nano", "nano-chol")


def make_system(rng, n=3, m=2):
    A = 0.9 * rng.standard_normal((n, n)) / np.sqrt(n)
    H = rng.standard_normal((m, n))
    q = rng.standard_normal((n, n))
    r = rng.standard_normal((m, m))
    return linear_model(A, H, q @ q.T + 0.1 * np.eye(n), r @ r.T + 0.1 * np.eye(m))


def main():
    rng = np.random.default_rng(0)
    model = make_system(rng)
    rule = parse_rule("cubature")

    truth = rng.standard_normal(model.n)
    chol_q = np.linalg.cholesky(model.Q)
    chol_r = np.linalg.cholesky(model.R)

    beliefs = {fid: GaussianBelief(np.zeros(model.n), np.eye(model.n)) for fid in FILTERS}
    worst_mean = {fid: 0.0 for fid in FILTERS}
    worst_cov = {fid: 0.0 for fid in FILTERS}

    for t in range(20):
        truth = model.f(truth, None, t) + chol_q @ rng.standard_normal(model.n)
        y = model.g(truth) + chol_r @ rng.standard_normal(model.m)
        reference = kf_step(beliefs["kf"], None, y, model)
        for fid in FILTERS:
            beliefs[fid], _ = filter_step(fid, beliefs[fid], None, y, model, t=t, rule=rule)
            worst_mean[fid] = max(worst_mean[fid], np.abs(beliefs[fid].mean - reference.mean).max())
            worst_cov[fid] = max(worst_cov[fid], np.linalg.norm(beliefs[fid].cov - reference.cov))

    print(f"linear system: n={model.n}, m={model.m}, 20 steps, cubature rule\n")
    print(f"{'filter':<10} {'worst mean dev':>16} {'worst cov dev':>16}")
    for fid in FILTERS:
        print(f"{fid:<10} {worst_mean[fid]:>16.3e} {worst_cov[fid]:>16.3e}")
    print("\nEverything at rounding error except the factored update, whose")
    print("epsilon-regularized precision biases the covariance by ~1e-9.")


if __name__ == "__main__":
    main()
