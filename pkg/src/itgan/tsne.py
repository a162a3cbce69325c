"""Exact t-SNE: full O(n^2) pairwise affinities, per-point bandwidths matched
to the target perplexity by binary search, gradient descent on KL divergence
with early exaggeration and the usual two-stage momentum schedule.

Desk-scale only; no Barnes-Hut approximation.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .viz import pca_project

P_MIN = 1e-12


@dataclass
class TsneParams:
    perplexity: float = 30.0
    iters: int = 1000
    lr: float = 50.0  # no adaptive gains, so the classic 200 overshoots at desk scale
    early_exaggeration: float = 12.0
    exaggeration_until: int = 250
    momentum_switch: int = 250
    seed: int = 0


@dataclass
class TsneResult:
    embedding: np.ndarray
    kl_initial: float
    kl_final: float
    perplexity_used: float


def _pairwise_sq_dists(x):
    sq = (x * x).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def conditional_probabilities(d2, perplexity, tol=1e-5, max_iter=50):
    """Row-stochastic conditional P with per-point precision found by binary
    search so each row's perplexity matches the target within tol."""
    n = d2.shape[0]
    target_entropy = np.log(perplexity)
    P = np.zeros((n, n))
    for i in range(n):
        beta, beta_lo, beta_hi = 1.0, 0.0, np.inf
        row = np.delete(d2[i], i)
        for _ in range(max_iter):
            w = np.exp(-row * beta)
            s = w.sum()
            if s <= 0:
                entropy = 0.0
                p = np.zeros_like(row)
            else:
                p = w / s
                nz = p > 0
                entropy = -np.sum(p[nz] * np.log(p[nz]))
            diff = entropy - target_entropy
            if abs(diff) < tol:
                break
            if diff > 0:  # too flat, sharpen
                beta_lo = beta
                beta = beta * 2.0 if beta_hi == np.inf else (beta + beta_hi) / 2.0
            else:
                beta_hi = beta
                beta = (beta + beta_lo) / 2.0
        P[i, np.arange(n) != i] = p
    return P


def _joint_probabilities(x, perplexity):
    d2 = _pairwise_sq_dists(x)
    cond = conditional_probabilities(d2, perplexity)
    P = (cond + cond.T) / (2.0 * x.shape[0])
    return np.maximum(P, P_MIN)


def _low_dim_affinities(y):
    num = 1.0 / (1.0 + _pairwise_sq_dists(y))
    np.fill_diagonal(num, 0.0)
    Q = num / num.sum()
    return np.maximum(Q, P_MIN), num


def _kl(P, Q):
    return float(np.sum(P * np.log(P / Q)))


def tsne_embed(matrix, params=None):
    """Embed rows into 2-D; deterministic given the seed. Returns TsneResult."""
    params = params or TsneParams()
    x = np.asarray(matrix, dtype=np.float64)
    n = x.shape[0]
    if n < 4:
        raise ValueError("t-SNE needs at least 4 points")
    perplexity = params.perplexity
    if n < 3 * perplexity:
        perplexity = max(2.0, (n - 1) / 3.0)
        warnings.warn(
            f"perplexity lowered to {perplexity:.1f} for n={n}", stacklevel=2
        )

    P = _joint_probabilities(x, perplexity)

    projected, _, _ = pca_project(x, k=2)
    std = projected.std()
    y = projected / (std if std > 0 else 1.0) * 1e-4
    rng = np.random.default_rng(params.seed)
    y = y + rng.normal(0.0, 1e-6, size=y.shape)  # breaks exact ties in degenerate inputs

    Q, _ = _low_dim_affinities(y)
    kl_initial = _kl(P, Q)

    velocity = np.zeros_like(y)
    for it in range(params.iters):
        exaggeration = params.early_exaggeration if it < params.exaggeration_until else 1.0
        momentum = 0.5 if it < params.momentum_switch else 0.8
        Q, num = _low_dim_affinities(y)
        PQ = (exaggeration * P - Q) * num
        grad = 4.0 * ((np.diag(PQ.sum(axis=1)) - PQ) @ y)
        velocity = momentum * velocity - params.lr * grad
        y = y + velocity
        y = y - y.mean(axis=0)

    Q, _ = _low_dim_affinities(y)
    kl_final = _kl(P, Q)
    if not np.isfinite(y).all():
        raise FloatingPointError("t-SNE produced non-finite coordinates")
    return TsneResult(y, kl_initial, kl_final, perplexity)
