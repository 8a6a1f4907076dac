"""Classical Gaussian filters behind one predict/update contract.

All filters share :class:`GaussianBelief` and are driven through
:func:`filter_step`, which runs one predict + one measurement update and
reports per-update diagnostics (iteration count, covariance delta, wall-clock
time).  The natural-gradient family lives in :mod:`nanofilter.nano`; this
module hosts the baselines and the dispatch table.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import ModelNotLinear, PDFailure
from .linalg import spd_solve, symmetrize
from .models import StateSpaceModel
from .quadrature import SigmaPointRule, generate_points, propagate_moments, propagate_with_cross

FILTER_IDS = ("kf", "ekf", "iekf", "ukf", "plf", "nano", "nano-nopd", "nano-ekf", "nano-chol")

ITER_GAMMA = 1e-6
ITER_MAX = 10


@dataclass(frozen=True)
class GaussianBelief:
    """Gaussian state estimate (mean, covariance).

    The covariance is expected to stay symmetric positive definite; producers
    symmetrize, and the SPD property is enforced wherever a factorization is
    actually needed.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "cov", np.asarray(self.cov, dtype=float))


@dataclass(frozen=True)
class UpdateDiagnostics:
    """Per-update bookkeeping emitted by :func:`filter_step`."""

    iterations: int
    final_delta: float
    pd_failure: bool
    update_ms: float


# ---------------------------------------------------------------------------
# Linear Kalman filter


def _kf_predict(belief: GaussianBelief, u, model: StateSpaceModel) -> GaussianBelief:
    lin = model.linear
    x = lin.A @ belief.mean
    if lin.B is not None and u is not None:
        x = x + lin.B @ u
    cov = symmetrize(lin.A @ belief.cov @ lin.A.T + model.Q)
    return GaussianBelief(x, cov)


def _linear_update(prior: GaussianBelief, y, H: np.ndarray, R: np.ndarray,
                   innovation: np.ndarray) -> GaussianBelief:
    """Shared linear measurement update with Joseph-form covariance."""
    P = prior.cov
    S = symmetrize(H @ P @ H.T + R)
    gain = spd_solve(S, H @ P).T
    mean = prior.mean + gain @ innovation
    closure = np.eye(P.shape[0]) - gain @ H
    cov = symmetrize(closure @ P @ closure.T + gain @ R @ gain.T)
    return GaussianBelief(mean, cov)


def kf_step(belief: GaussianBelief, u, y, model: StateSpaceModel) -> GaussianBelief:
    """Exact linear-Gaussian step.  ``y=None`` performs prediction only."""
    if model.linear is None:
        raise ModelNotLinear(f"model {model.name!r} has no exact linear parts")
    pred = _kf_predict(belief, u, model)
    if y is None:
        return pred
    H = model.linear.H
    return _linear_update(pred, y, H, model.R, np.asarray(y, float) - H @ pred.mean)


# ---------------------------------------------------------------------------
# Extended / iterated extended Kalman filter


def ekf_predict(belief: GaussianBelief, u, model: StateSpaceModel, t: int = 0) -> GaussianBelief:
    """First-order linearized prediction."""
    F = model.jac_f(belief.mean, u, t)
    mean = model.f(belief.mean, u, t)
    cov = symmetrize(F @ belief.cov @ F.T + model.Q)
    return GaussianBelief(mean, cov)


def ekf_update(prior: GaussianBelief, y, model: StateSpaceModel) -> GaussianBelief:
    """Measurement update linearized at the prior mean (Joseph form)."""
    G = model.jac_g(prior.mean)
    innovation = np.asarray(y, float) - model.g(prior.mean)
    return _linear_update(prior, y, G, model.R, innovation)


def iekf_update(
    prior: GaussianBelief,
    y,
    model: StateSpaceModel,
    gamma: float = ITER_GAMMA,
    max_iters: int = ITER_MAX,
) -> GaussianBelief:
    """Iterated EKF update: Gauss-Newton relinearization of the MAP problem.

    With ``max_iters=1`` this is exactly :func:`ekf_update`.
    """
    y = np.asarray(y, dtype=float)
    x0, P = prior.mean, prior.cov
    xi = x0
    G = gain = None
    for _ in range(max_iters):
        G = model.jac_g(xi)
        S = symmetrize(G @ P @ G.T + model.R)
        gain = spd_solve(S, G @ P).T
        x_next = x0 + gain @ (y - model.g(xi) - G @ (x0 - xi))
        delta = float(np.linalg.norm(x_next - xi))
        xi = x_next
        if delta < gamma:
            break
    closure = np.eye(P.shape[0]) - gain @ G
    cov = symmetrize(closure @ P @ closure.T + gain @ model.R @ gain.T)
    return GaussianBelief(xi, cov)


# ---------------------------------------------------------------------------
# Sigma-point prediction (shared by UKF / PLF / the natural-gradient family)


def mm_predict(
    belief: GaussianBelief,
    u,
    model: StateSpaceModel,
    rule: SigmaPointRule,
    t: int = 0,
) -> GaussianBelief:
    """Moment-matched prediction through the dynamics, plus process noise."""
    cset = generate_points(rule, belief.mean, belief.cov)
    mean, spread_cov = propagate_moments(cset, lambda x: model.f(x, u, t))
    cov = symmetrize(spread_cov + model.Q)
    return GaussianBelief(mean, cov)


def ukf_update(
    prior: GaussianBelief, y, model: StateSpaceModel, rule: SigmaPointRule
) -> GaussianBelief:
    """Sigma-point measurement update (statistical linearization at the prior)."""
    y = np.asarray(y, dtype=float)
    cset = generate_points(rule, prior.mean, prior.cov)
    ybar, spread, cross = propagate_with_cross(cset, model.g)
    S = symmetrize(spread + model.R)
    gain = spd_solve(S, cross.T).T
    mean = prior.mean + gain @ (y - ybar)
    cov = symmetrize(prior.cov - gain @ S @ gain.T)
    return GaussianBelief(mean, cov)


def plf_update(
    prior: GaussianBelief,
    y,
    model: StateSpaceModel,
    rule: SigmaPointRule,
    gamma: float = ITER_GAMMA,
    max_iters: int = ITER_MAX,
) -> GaussianBelief:
    """Iterated posterior-linearization update.

    Each pass statistically linearizes g over the current posterior iterate
    (affine fit A x + b with residual covariance Omega) and redoes the linear
    update of the original prior with measurement noise R + Omega.  The first
    pass linearizes over the prior itself and therefore reproduces
    :func:`ukf_update` exactly.
    """
    y = np.asarray(y, dtype=float)
    x0, P0 = prior.mean, prior.cov
    xi, Pi = x0, P0
    for _ in range(max_iters):
        cset = generate_points(rule, xi, Pi)
        ybar, spread, cross = propagate_with_cross(cset, model.g)
        A = spd_solve(Pi, cross).T                  # cross^T Pi^{-1}
        b = ybar - A @ xi
        omega = symmetrize(spread - A @ Pi @ A.T)
        S = symmetrize(A @ P0 @ A.T + model.R + omega)
        gain = spd_solve(S, A @ P0).T
        x_next = x0 + gain @ (y - A @ x0 - b)
        P_next = symmetrize(P0 - gain @ S @ gain.T)
        delta = float(np.linalg.norm(x_next - xi))
        xi, Pi = x_next, P_next
        if delta < gamma:
            break
    return GaussianBelief(xi, Pi)


# ---------------------------------------------------------------------------
# Dispatch


def filter_step(
    filter_id: str,
    belief: GaussianBelief,
    u,
    y,
    model: StateSpaceModel,
    t: int = 0,
    rule: SigmaPointRule | None = None,
    nano_cfg=None,
) -> tuple[GaussianBelief, UpdateDiagnostics]:
    """One predict + update step of the named filter.

    Returns the posterior belief and diagnostics.  ``update_ms`` times the
    measurement update only (prediction excluded).  A positive-definiteness
    failure inside a natural-gradient update is reported via
    ``diagnostics.pd_failure`` with the prior belief returned unchanged.
    """
    from . import nano  # deferred: nano imports this module's baselines

    if filter_id not in FILTER_IDS:
        raise ValueError(f"unknown filter {filter_id!r}; expected one of {FILTER_IDS}")
    rule = rule or SigmaPointRule("cubature")

    if filter_id == "kf":
        prior = kf_step(belief, u, None, model)
        H = model.linear.H
        start = time.perf_counter()
        post = _linear_update(prior, y, H, model.R, np.asarray(y, float) - H @ prior.mean)
        elapsed = time.perf_counter() - start
        return post, _diag(1, elapsed)

    if filter_id == "ekf":
        prior = ekf_predict(belief, u, model, t)
        start = time.perf_counter()
        post = ekf_update(prior, y, model)
        elapsed = time.perf_counter() - start
        return post, _diag(1, elapsed)

    if filter_id == "iekf":
        prior = ekf_predict(belief, u, model, t)
        start = time.perf_counter()
        post = iekf_update(prior, y, model)
        elapsed = time.perf_counter() - start
        return post, _diag(ITER_MAX, elapsed)

    if filter_id == "ukf":
        prior = mm_predict(belief, u, model, rule, t)
        start = time.perf_counter()
        post = ukf_update(prior, y, model, rule)
        elapsed = time.perf_counter() - start
        return post, _diag(1, elapsed)

    if filter_id == "plf":
        prior = mm_predict(belief, u, model, rule, t)
        start = time.perf_counter()
        post = plf_update(prior, y, model, rule)
        elapsed = time.perf_counter() - start
        return post, _diag(ITER_MAX, elapsed)

    # natural-gradient family
    cfg = nano_cfg if nano_cfg is not None else nano.NANO_PRESETS[filter_id]
    prior = mm_predict(belief, u, model, rule, t)
    start = time.perf_counter()
    try:
        post, diag = nano.nano_update(prior, y, model, rule, cfg)
    except PDFailure:
        elapsed = time.perf_counter() - start
        return prior, UpdateDiagnostics(0, float("nan"), True, elapsed * 1e3)
    elapsed = time.perf_counter() - start
    return post, UpdateDiagnostics(diag.iterations, diag.final_delta, False, elapsed * 1e3)


def _diag(iterations: int, elapsed: float) -> UpdateDiagnostics:
    return UpdateDiagnostics(iterations, 0.0, False, elapsed * 1e3)
