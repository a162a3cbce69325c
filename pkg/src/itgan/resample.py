"""Baseline oversamplers: random oversampling (ROS) and SMOTE.

Both append rows only and default to equalizing every minority class to the
majority-class count. Distances are Euclidean in the scaled feature space.
"""

import numpy as np

from .dataset import Dataset

N_CLASSES = 4


def _resolve_policy(train, policy):
    counts = train.class_counts(N_CLASSES)
    if policy is None:
        majority = int(counts.max())
        policy = {c: majority for c in range(N_CLASSES) if 0 < counts[c] < majority}
    return counts, policy


def ros(train, policy=None, seed=0):
    """Duplicate uniformly-chosen minority rows until targets are met."""
    counts, policy = _resolve_policy(train, policy)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 11]))
    parts_x, parts_y = [train.x], [train.y]
    for cls in sorted(policy):
        if counts[cls] == 0:
            raise ValueError(f"targeted class {cls} is empty")
        deficit = int(policy[cls]) - int(counts[cls])
        if deficit <= 0:
            continue
        idx = np.flatnonzero(train.y == cls)
        chosen = rng.choice(idx, size=deficit, replace=True)
        parts_x.append(train.x[chosen])
        parts_y.append(np.full(deficit, cls, dtype=np.int64))
    return Dataset(np.concatenate(parts_x), np.concatenate(parts_y),
                   role="Augment", scaler=train.scaler)


def smote(train, k=5, policy=None, seed=0):
    """Interpolate between minority rows and their k nearest same-class
    neighbors: new = x + lambda * (neighbor - x), lambda ~ U(0, 1).

    Classes with <= k samples use k = class size - 1; a single-sample class
    falls back to duplication (ROS).
    """
    if k <= 0:
        raise ValueError("k must be positive")
    counts, policy = _resolve_policy(train, policy)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 12]))
    parts_x, parts_y = [train.x], [train.y]
    for cls in sorted(policy):
        if counts[cls] == 0:
            raise ValueError(f"targeted class {cls} is empty")
        deficit = int(policy[cls]) - int(counts[cls])
        if deficit <= 0:
            continue
        idx = np.flatnonzero(train.y == cls)
        rows = train.x[idx]
        if len(idx) == 1:
            parts_x.append(np.repeat(rows, deficit, axis=0))
            parts_y.append(np.full(deficit, cls, dtype=np.int64))
            continue
        k_eff = min(k, len(idx) - 1)
        # exhaustive pairwise distances; desk-scale class sizes keep this cheap
        d2 = ((rows[:, None, :] - rows[None, :, :]) ** 2).sum(axis=2)
        np.fill_diagonal(d2, np.inf)
        neighbors = np.argsort(d2, axis=1, kind="stable")[:, :k_eff]
        base = rng.integers(0, len(idx), size=deficit)
        pick = rng.integers(0, k_eff, size=deficit)
        lam = rng.random(deficit)
        x0 = rows[base]
        x1 = rows[neighbors[base, pick]]
        parts_x.append(x0 + lam[:, None] * (x1 - x0))
        parts_y.append(np.full(deficit, cls, dtype=np.int64))
    return Dataset(np.concatenate(parts_x), np.concatenate(parts_y),
                   role="Augment", scaler=train.scaler)
