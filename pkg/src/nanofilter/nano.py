"""Natural-gradient Gaussian measurement update.

The measurement update is treated as minimizing the expected negative
log-likelihood under the posterior, regularized toward the prior.  Each
iteration averages likelihood derivatives over sigma points of the current
iterate N(x, P) and applies a natural-gradient step in the Gaussian family:

    P_inv'  = prior_inv + E[hess]                 (information/covariance step)
    x'      = x - step * P' @ (E[grad] + prior_inv @ (x - prior_mean))

Two curvature choices are offered -- the exact likelihood Hessian (which can
be indefinite and then kills the covariance step) and its Gauss-Newton part
(PSD by construction) -- and two covariance mechanisms: the ``direct``
information-matrix recursion above, or a multiplicative update of a Cholesky
factor of the inverse covariance (``cholesky-factor``), which keeps positive
definiteness unconditionally.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import MissingHessian, NonFiniteFunctionValue, NonFiniteIterate, NotPositiveDefinite, PDFailure, SingularFactor
from .filters import GaussianBelief, UpdateDiagnostics, ekf_update
from .linalg import (
    cholesky_factor,
    frobenius_norm,
    matrix_exp_truncated,
    spd_inverse,
    symmetrize,
)
from .models import StateSpaceModel
from .quadrature import CollocationSet, SigmaPointRule, generate_points

HESSIAN_MODES = ("gauss-newton", "exact")
COV_UPDATES = ("direct", "cholesky-factor")
EXPONENT_MODES = ("residual", "plain")
INIT_MODES = ("prior", "ekf")

# Factor diagonal below this is treated as numerically singular.
FACTOR_DIAG_TOL = 1e-14


@dataclass(frozen=True)
class NanoConfig:
    """Tuning knobs for :func:`nano_update`.

    ``exponent_mode`` only matters for ``cov_update="cholesky-factor"``:
    ``"residual"`` builds the factor exponent from the gap between the
    curvature target and the current factor Gram (fixed point = the direct
    recursion's target); ``"plain"`` exponentiates the raw curvature sum,
    which keeps growing the factor and is retained for comparison only.
    """

    gamma: float = 1e-6
    max_iters: int = 10
    hessian: str = "gauss-newton"
    cov_update: str = "direct"
    epsilon: float = 1e-9
    exponent_mode: str = "residual"
    exp_order: int = 1
    init: str = "prior"
    step_size: float = 1.0

    def __post_init__(self):
        if self.hessian not in HESSIAN_MODES:
            raise ValueError(f"hessian must be one of {HESSIAN_MODES}, got {self.hessian!r}")
        if self.cov_update not in COV_UPDATES:
            raise ValueError(f"cov_update must be one of {COV_UPDATES}, got {self.cov_update!r}")
        if self.exponent_mode not in EXPONENT_MODES:
            raise ValueError(
                f"exponent_mode must be one of {EXPONENT_MODES}, got {self.exponent_mode!r}"
            )
        if self.init not in INIT_MODES:
            raise ValueError(f"init must be one of {INIT_MODES}, got {self.init!r}")
        if self.gamma <= 0 or self.max_iters < 1 or self.epsilon < 0 or self.exp_order < 1:
            raise ValueError("gamma > 0, max_iters >= 1, epsilon >= 0, exp_order >= 1 required")
        if not 0.0 < self.step_size <= 1.0:
            raise ValueError(f"step_size must be in (0, 1], got {self.step_size}")


# Filter-id presets; the four published variants of the update.
NANO_PRESETS = {
    "nano": NanoConfig(),
    "nano-nopd": NanoConfig(hessian="exact"),
    "nano-ekf": NanoConfig(hessian="exact", init="ekf"),
    "nano-chol": NanoConfig(cov_update="cholesky-factor"),
}

# Config-file-tunable fields.  Tuning fields apply to every preset; fields that
# *define* a preset's identity are honored only for the base "nano" id, so
# e.g. "nano-chol" cannot be silently turned back into the direct update.
TUNING_FIELDS = ("gamma", "max_iters", "epsilon", "exponent_mode", "exp_order", "step_size")
IDENTITY_FIELDS = ("hessian", "cov_update", "init")


def preset_with_overrides(filter_id: str, overrides=None) -> NanoConfig:
    """Preset for a natural-gradient filter id with config overrides applied."""
    base = NANO_PRESETS[filter_id]
    if not overrides:
        return base
    kwargs = {}
    for key, value in overrides.items():
        if key in TUNING_FIELDS or (filter_id == "nano" and key in IDENTITY_FIELDS):
            kwargs[key] = value
        elif key in IDENTITY_FIELDS:
            continue
        else:
            raise ValueError(f"unknown nano config field {key!r}")
    return replace(base, **kwargs)


# ---------------------------------------------------------------------------
# Gaussian measurement likelihood and its derivatives


def loglik(x: np.ndarray, y: np.ndarray, model: StateSpaceModel) -> float:
    """Negative log-likelihood up to a constant: 0.5 (y-g)^T R^{-1} (y-g)."""
    resid = np.asarray(y, float) - model.g(x)
    return 0.5 * float(resid @ model.R_inv @ resid)


def grad_loglik(x: np.ndarray, y: np.ndarray, model: StateSpaceModel) -> np.ndarray:
    """Gradient of :func:`loglik` in x: G^T R^{-1} (g(x) - y)."""
    return model.jac_g(x).T @ (model.R_inv @ (model.g(x) - np.asarray(y, float)))


def hess_loglik(x: np.ndarray, y: np.ndarray, model: StateSpaceModel) -> np.ndarray:
    """Exact Hessian: G^T R^{-1} G - sum_j [R^{-1}(y-g)]_j hess(g_j).

    The second term flips sign with the residual, so this matrix can be
    indefinite.  Requires ``model.hess_g``.
    """
    if model.hess_g is None:
        raise MissingHessian(f"model {model.name!r} provides no measurement second derivatives")
    G = model.jac_g(x)
    weights = model.R_inv @ (np.asarray(y, float) - model.g(x))
    return symmetrize(G.T @ model.R_inv @ G - np.tensordot(weights, model.hess_g(x), axes=1))


def hess_loglik_gn(x: np.ndarray, model: StateSpaceModel) -> np.ndarray:
    """Gauss-Newton Hessian G^T R^{-1} G; positive semidefinite by construction."""
    G = model.jac_g(x)
    return symmetrize(G.T @ model.R_inv @ G)


def _expected_derivatives(
    cset: CollocationSet, y: np.ndarray, model: StateSpaceModel, exact: bool
) -> tuple[np.ndarray, np.ndarray]:
    """E[grad] and E[hess] over the sigma points, with one model sweep."""
    n = cset.center.shape[0]
    v_x = np.zeros(n)
    v_xx = np.zeros((n, n))
    for w, p in zip(cset.mean_weights, cset.points):
        G = model.jac_g(p)
        scaled = model.R_inv @ G                      # R^{-1} G, reused below
        resid = model.g(p) - y
        v_x += w * (scaled.T @ resid)
        h = G.T @ scaled
        if exact:
            h = h + np.tensordot(model.R_inv @ resid, model.hess_g(p), axes=1)
        v_xx += w * h
    if not (np.all(np.isfinite(v_x)) and np.all(np.isfinite(v_xx))):
        raise NonFiniteFunctionValue("likelihood derivatives non-finite at a sigma point")
    return v_x, symmetrize(v_xx)


# ---------------------------------------------------------------------------
# Covariance step on a Cholesky factor of the inverse covariance


@dataclass(frozen=True)
class NanoIterState:
    """One optimizer iterate: mean, covariance, and (factored mode only) a
    lower-triangular factor of the inverse covariance."""

    index: int
    mean: np.ndarray
    cov: np.ndarray
    factor: np.ndarray | None = None


def chol_cov_step(
    state: NanoIterState, v_xx: np.ndarray, prior_inv: np.ndarray, cfg: NanoConfig
) -> NanoIterState:
    """Multiplicative factor update of the inverse covariance.

    The factor moves by a (truncated) matrix exponential,
    ``factor' = factor @ expm(M)``; the reconstructed inverse covariance
    ``factor' factor'^T + epsilon I`` is positive definite no matter what the
    curvature looked like.  The re-triangularized factor is obtained from a QR
    factorization of ``[moved^T; sqrt(epsilon) I]``, which equals the Cholesky
    factor of the reconstruction but never forms the Gram product -- so its
    smallest pivot stays >= sqrt(epsilon) even when the iterate is so
    ill-conditioned that the explicit product would round to indefinite.
    """
    factor = state.factor
    if factor is None:
        raise ValueError("state carries no factor; initialize with one")
    if float(np.min(np.diag(factor))) < FACTOR_DIAG_TOL:
        raise SingularFactor("factor diagonal fell below tolerance")
    n = factor.shape[0]
    target = symmetrize(v_xx + prior_inv)
    if cfg.exponent_mode == "residual":
        target = target - factor @ factor.T
    inner = solve_triangular(factor, target, lower=True, check_finite=False)
    exponent = 0.5 * solve_triangular(factor, inner.T, lower=True, check_finite=False).T
    moved = factor @ matrix_exp_truncated(exponent, cfg.exp_order)
    stacked = np.vstack([moved.T, np.sqrt(cfg.epsilon) * np.eye(n)])
    upper = np.linalg.qr(stacked, mode="r")
    signs = np.where(np.diag(upper) < 0.0, -1.0, 1.0)
    factor_next = (signs[:, None] * upper).T
    cov = symmetrize(cho_solve((factor_next, True), np.eye(n), check_finite=False))
    return NanoIterState(
        index=state.index + 1,
        mean=state.mean,
        cov=cov,
        factor=factor_next,
    )


# ---------------------------------------------------------------------------
# The update itself


def _sigma_root(cov: np.ndarray, inv_factor: np.ndarray | None) -> np.ndarray:
    """Square root of ``cov`` for sigma-point spreads.

    Prefers the Cholesky factor; if the iterate covariance is numerically
    indefinite (possible after a large multiplicative overshoot, when the
    condition number exceeds float precision) falls back to the inverse
    transpose of ``inv_factor``, whose Gram is ``cov`` by construction.
    """
    try:
        return cholesky_factor(cov)
    except NotPositiveDefinite:
        if inv_factor is None:
            raise
        return solve_triangular(
            inv_factor, np.eye(inv_factor.shape[0]), lower=True, trans="T", check_finite=False
        )


def nano_update(
    prior: GaussianBelief,
    y: np.ndarray,
    model: StateSpaceModel,
    rule: SigmaPointRule,
    cfg: NanoConfig | None = None,
) -> tuple[GaussianBelief, UpdateDiagnostics]:
    """Iterated natural-gradient measurement update of a Gaussian prior.

    Stops when the Frobenius change of the covariance drops below
    ``cfg.gamma`` (checked after a full covariance+mean pass) or after
    ``cfg.max_iters`` iterations, and returns the last iterate.

    Raises
    ------
    PDFailure
        If any covariance iterate loses positive definiteness (only possible
        with ``cov_update="direct"`` and an indefinite curvature estimate).
    NonFiniteIterate
        If a mean or covariance iterate leaves the finite floats.
    MissingHessian
        If ``hessian="exact"`` but the model has no second derivatives.
    """
    cfg = cfg or NanoConfig()
    if cfg.hessian == "exact" and model.hess_g is None:
        raise MissingHessian(f"model {model.name!r} provides no measurement second derivatives")
    y = np.asarray(y, dtype=float)
    exact = cfg.hessian == "exact"
    factored = cfg.cov_update == "cholesky-factor"

    n = prior.mean.shape[0]
    prior_inv = spd_inverse(prior.cov)
    start = ekf_update(prior, y, model) if cfg.init == "ekf" else prior
    state = NanoIterState(
        index=0,
        mean=start.mean,
        cov=start.cov,
        factor=cholesky_factor(spd_inverse(start.cov)) if factored else None,
    )

    # Lower factor of the iterate's *inverse* covariance; its inverse transpose
    # is a square root of the covariance, usable for sigma points even when the
    # covariance itself is too ill-conditioned to re-factorize.
    inv_factor = state.factor
    delta = float("inf")
    try:
        for _ in range(cfg.max_iters):
            spread = _sigma_root(state.cov, inv_factor)
            cset = generate_points(rule, state.mean, state.cov, spread=spread)
            v_x, v_xx = _expected_derivatives(cset, y, model, exact)

            if factored:
                moved = chol_cov_step(state, v_xx, prior_inv, cfg)
                cov_next = moved.cov
                factor_next = moved.factor
                inv_factor = moved.factor
            else:
                # Indefinite curvature (exact-Hessian mode) dies here.
                inv_factor = cholesky_factor(symmetrize(prior_inv + v_xx))
                cov_next = symmetrize(cho_solve((inv_factor, True), np.eye(n), check_finite=False))
                factor_next = None

            mean_next = state.mean - cfg.step_size * (
                cov_next @ (v_x + prior_inv @ (state.mean - prior.mean))
            )
            if not (np.all(np.isfinite(mean_next)) and np.all(np.isfinite(cov_next))):
                raise NonFiniteIterate("optimizer iterate left finite floats")

            delta = frobenius_norm(cov_next - state.cov)
            state = NanoIterState(state.index + 1, mean_next, cov_next, factor_next)
            if delta < cfg.gamma:
                break
    except NotPositiveDefinite as exc:
        raise PDFailure(f"covariance update lost positive definiteness: {exc}") from exc

    return (
        GaussianBelief(state.mean, state.cov),
        UpdateDiagnostics(state.index, delta, False, 0.0),
    )
