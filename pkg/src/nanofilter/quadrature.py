"""Sigma-point rules and Gaussian expectations.

A :class:`SigmaPointRule` describes how to discretize a Gaussian N(mu, sigma)
into weighted points; :func:`generate_points` instantiates it for a concrete
moment pair, and the ``propagate_*`` / ``expected_matrix`` helpers compute the
moment-matching integrals every sigma-point filter is built from.

Supported rules:

``cubature``
    Spherical-radial degree-3 rule, 2n points ``mu +/- sqrt(n) * L e_i``,
    uniform weights ``1/(2n)``.
``unscented``
    Scaled unscented transform, 2n+1 points, parameters (alpha, beta, kappa);
    kappa defaults to ``3 - n`` at generation time.
``gauss-hermite``
    Tensor product of the p-point probabilists' Gauss-Hermite rule, ``p**n``
    points; exact for 1-D polynomials up to degree ``2p - 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import NonFiniteFunctionValue
from .linalg import cholesky_factor, symmetrize

GH_MIN_ORDER = 2
GH_MAX_ORDER = 10
# Hard cap on p**n tensor-product points, to fail loudly instead of thrashing.
GH_MAX_POINTS = 100_000

_RULE_KINDS = ("cubature", "unscented", "gauss-hermite")


@dataclass(frozen=True)
class SigmaPointRule:
    """Descriptor for a sigma-point rule; independent of dimension.

    ``alpha``/``beta``/``kappa`` only matter for ``unscented`` and ``order``
    only for ``gauss-hermite``.  ``kappa=None`` means "use 3 - n".
    """

    kind: str = "cubature"
    alpha: float = 1.0
    beta: float = 2.0
    kappa: float | None = None
    order: int = 3

    def __post_init__(self):
        if self.kind not in _RULE_KINDS:
            raise ValueError(f"unknown rule kind {self.kind!r}; expected one of {_RULE_KINDS}")
        if self.kind == "gauss-hermite" and not (GH_MIN_ORDER <= self.order <= GH_MAX_ORDER):
            raise ValueError(
                f"gauss-hermite order must be in [{GH_MIN_ORDER}, {GH_MAX_ORDER}], got {self.order}"
            )
        if self.kind == "unscented" and self.alpha <= 0:
            raise ValueError("unscented alpha must be positive")


def parse_rule(text: str) -> SigmaPointRule:
    """Parse a rule spelled as ``cubature``, ``unscented`` or ``gh:<p>``."""
    text = text.strip()
    if text == "cubature":
        return SigmaPointRule("cubature")
    if text == "unscented":
        return SigmaPointRule("unscented")
    if text.startswith("gh:"):
        try:
            order = int(text[3:])
        except ValueError as exc:
            raise ValueError(f"bad gauss-hermite order in {text!r}") from exc
        return SigmaPointRule("gauss-hermite", order=order)
    raise ValueError(f"unknown sigma-point rule {text!r}")


@dataclass(frozen=True)
class CollocationSet:
    """Weighted points representing one Gaussian.

    ``mean_weights`` are used for means / generic expectations, ``cov_weights``
    for (co)variances; they differ only for the unscented rule's center point.
    """

    points: np.ndarray        # (N, n)
    mean_weights: np.ndarray  # (N,)
    cov_weights: np.ndarray   # (N,)
    center: np.ndarray        # (n,)
    spread: np.ndarray        # (n, n) square root of the covariance (Cholesky
    #                           factor unless the caller supplied another root)


def _hermite_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights of the probabilists' Gauss-Hermite rule (weight = N(0,1)).

    Golub-Welsch: eigen-decompose the symmetric tridiagonal Jacobi matrix with
    zero diagonal and off-diagonal sqrt(1..p-1); weights are the squared first
    eigenvector components (total mass 1).
    """
    off = np.sqrt(np.arange(1, order, dtype=float))
    nodes, vecs = eigh_tridiagonal(np.zeros(order), off)
    weights = vecs[0] ** 2
    return nodes, weights


def generate_points(
    rule: SigmaPointRule,
    mean: np.ndarray,
    cov: np.ndarray,
    spread: np.ndarray | None = None,
) -> CollocationSet:
    """Instantiate ``rule`` for the Gaussian N(mean, cov).

    ``spread`` may supply a precomputed matrix square root of ``cov`` (any S
    with ``S @ S.T == cov``); by default the lower Cholesky factor is taken.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    n = mean.shape[0]
    if spread is None:
        spread = cholesky_factor(cov)
    else:
        spread = np.asarray(spread, dtype=float)

    if rule.kind == "cubature":
        # mu +/- sqrt(n) * (i-th column of L); rows of L.T are columns of L
        offsets = np.sqrt(n) * spread.T
        points = np.vstack([mean + offsets, mean - offsets])
        w = np.full(2 * n, 1.0 / (2 * n))
        return CollocationSet(points, w, w.copy(), mean, spread)

    if rule.kind == "unscented":
        kappa = (3.0 - n) if rule.kappa is None else rule.kappa
        lam = rule.alpha ** 2 * (n + kappa) - n
        if n + lam <= 0:
            raise ValueError(f"unscented scaling n + lambda = {n + lam} must be positive")
        offsets = np.sqrt(n + lam) * spread.T
        points = np.vstack([mean[None, :], mean + offsets, mean - offsets])
        wm = np.full(2 * n + 1, 1.0 / (2.0 * (n + lam)))
        wm[0] = lam / (n + lam)
        wc = wm.copy()
        wc[0] += 1.0 - rule.alpha ** 2 + rule.beta
        return CollocationSet(points, wm, wc, mean, spread)

    # gauss-hermite tensor product
    if rule.order ** n > GH_MAX_POINTS:
        raise ValueError(
            f"gauss-hermite tensor product would need {rule.order}**{n} points "
            f"(cap {GH_MAX_POINTS})"
        )
    nodes, weights = _hermite_nodes(rule.order)
    grids = np.array(list(itertools.product(nodes, repeat=n)))        # (p**n, n)
    w = np.prod(np.array(list(itertools.product(weights, repeat=n))), axis=1)
    points = mean + grids @ spread.T
    return CollocationSet(points, w, w.copy(), mean, spread)


def _apply(h: Callable[[np.ndarray], np.ndarray], points: np.ndarray) -> np.ndarray:
    vals = np.stack([np.asarray(h(p), dtype=float) for p in points])
    if not np.all(np.isfinite(vals)):
        raise NonFiniteFunctionValue("function returned NaN/Inf at a sigma point")
    return vals


def propagate_moments(
    cset: CollocationSet, h: Callable[[np.ndarray], np.ndarray]
) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of ``h(x)`` for ``x ~`` the set's Gaussian."""
    vals = _apply(h, cset.points)
    mean = cset.mean_weights @ vals
    dev = vals - mean
    cov = symmetrize((dev * cset.cov_weights[:, None]).T @ dev)
    return mean, cov


def propagate_with_cross(
    cset: CollocationSet, h: Callable[[np.ndarray], np.ndarray]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Like :func:`propagate_moments` plus the input-output cross-covariance.

    Returns ``(mean, cov, cross)`` with ``cross[i, j] = Cov(x_i, h(x)_j)``.
    """
    vals = _apply(h, cset.points)
    mean = cset.mean_weights @ vals
    dev = vals - mean
    xdev = cset.points - cset.center
    cov = symmetrize((dev * cset.cov_weights[:, None]).T @ dev)
    cross = (xdev * cset.cov_weights[:, None]).T @ dev
    return mean, cov, cross


def expected_matrix(cset: CollocationSet, h: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Plain expectation of an array-valued function under the set's Gaussian.

    Works for any trailing shape: vectors (gradients) and matrices (Hessians).
    """
    vals = _apply(h, cset.points)
    return np.tensordot(cset.mean_weights, vals, axes=1)
