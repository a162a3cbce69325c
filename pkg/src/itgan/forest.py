"""Tree ensembles: Random Forest (Gini, bootstrap, feature subsampling) and
second-order gradient-boosted trees with a multiclass softmax objective.

Split thresholds are midpoints between consecutive sorted unique values; all
tie-breaks resolve to the lowest feature index / first candidate, so training
is fully deterministic given (data, params, seed).
"""

import json
import math
from dataclasses import dataclass

import numpy as np

N_CLASSES = 4


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: np.ndarray | None = None  # histogram (RF) or leaf weight (GBT)

    @property
    def is_leaf(self):
        return self.value is not None


def _tree_apply(node, x):
    while not node.is_leaf:
        node = node.left if x[node.feature] <= node.threshold else node.right
    return node.value


# ---------------------------------------------------------------------------
# split search

def _gini_from_counts(counts, n):
    if n == 0:
        return 0.0
    p = counts / n
    return 1.0 - float((p * p).sum())


def best_split_gini(x, y, features, n_classes, min_leaf=1):
    """Best (feature, threshold) minimizing weighted child Gini, or None.

    Scans features in the given order and keeps strictly better scores only,
    so the lowest feature index wins ties.
    """
    n = len(y)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    best = None
    best_score = math.inf
    for f in features:
        col = x[:, f]
        order = np.argsort(col, kind="stable")
        v = col[order]
        left_counts = np.cumsum(onehot[order], axis=0)[:-1]  # after i+1 rows
        n_left = np.arange(1, n)
        n_right = n - n_left
        valid = v[1:] > v[:-1]
        valid &= (n_left >= min_leaf) & (n_right >= min_leaf)
        if not valid.any():
            continue
        right_counts = left_counts[-1] + onehot[order[-1]] - left_counts
        gini_left = 1.0 - (left_counts**2).sum(axis=1) / n_left**2
        gini_right = 1.0 - (right_counts**2).sum(axis=1) / n_right**2
        score = (n_left * gini_left + n_right * gini_right) / n
        score = np.where(valid, score, math.inf)
        i = int(np.argmin(score))
        if score[i] < best_score - 1e-12:
            best_score = float(score[i])
            best = (int(f), float((v[i] + v[i + 1]) / 2.0))
    return best


def best_split_gain(x, g, h, features, lam):
    """Best (feature, threshold, gain) by second-order gain, or None."""
    n = len(g)
    total_g, total_h = g.sum(), h.sum()
    parent = total_g * total_g / (total_h + lam)
    best = None
    best_gain = 1e-12
    for f in features:
        col = x[:, f]
        order = np.argsort(col, kind="stable")
        v = col[order]
        gl = np.cumsum(g[order])[:-1]
        hl = np.cumsum(h[order])[:-1]
        gr = total_g - gl
        hr = total_h - hl
        valid = v[1:] > v[:-1]
        if not valid.any():
            continue
        gain = 0.5 * (gl**2 / (hl + lam) + gr**2 / (hr + lam) - parent)
        gain = np.where(valid, gain, -math.inf)
        i = int(np.argmax(gain))
        if gain[i] > best_gain + 1e-12:
            best_gain = float(gain[i])
            best = (int(f), float((v[i] + v[i + 1]) / 2.0), best_gain)
    return best


# ---------------------------------------------------------------------------
# random forest

@dataclass
class RFParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_leaf: int = 1
    mtry: int | None = None  # default floor(sqrt(n_features))
    seed: int = 0


@dataclass
class RFModel:
    trees: list
    n_classes: int
    params: RFParams


def _grow_rf_tree(x, y, n_classes, params, rng, depth):
    counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    if (
        len(y) < 2 * params.min_leaf
        or (params.max_depth is not None and depth >= params.max_depth)
        or (counts > 0).sum() <= 1
    ):
        return TreeNode(value=counts)
    mtry = params.mtry or int(math.sqrt(x.shape[1]))
    features = np.sort(rng.choice(x.shape[1], size=min(mtry, x.shape[1]), replace=False))
    split = best_split_gini(x, y, features, n_classes, params.min_leaf)
    if split is None:
        return TreeNode(value=counts)
    f, thr = split
    mask = x[:, f] <= thr
    left = _grow_rf_tree(x[mask], y[mask], n_classes, params, rng, depth + 1)
    right = _grow_rf_tree(x[~mask], y[~mask], n_classes, params, rng, depth + 1)
    return TreeNode(feature=f, threshold=thr, left=left, right=right)


def train_rf(train, params=None, n_classes=None):
    params = params or RFParams()
    if len(train) == 0:
        raise ValueError("empty training data")
    n_classes = n_classes or max(N_CLASSES, int(train.y.max()) + 1)
    if len(np.unique(train.y)) < 2:
        raise ValueError("need at least 2 classes")
    trees = []
    for t in range(params.n_trees):
        rng = np.random.default_rng(np.random.SeedSequence([params.seed, t]))
        boot = rng.integers(0, len(train), size=len(train))
        trees.append(_grow_rf_tree(train.x[boot], train.y[boot], n_classes, params, rng, 0))
    return RFModel(trees, n_classes, params)


def predict_rf(model, rows):
    rows = np.asarray(rows, dtype=np.float64)
    votes = np.zeros((rows.shape[0], model.n_classes), dtype=np.int64)
    for tree in model.trees:
        for i, row in enumerate(rows):
            hist = _tree_apply(tree, row)
            votes[i, int(np.argmax(hist))] += 1  # argmax tie -> lowest class
    return votes.argmax(axis=1), votes


# ---------------------------------------------------------------------------
# gradient boosting

@dataclass
class GBTParams:
    rounds: int = 100
    depth: int = 4
    eta: float = 0.3
    lam: float = 1.0
    seed: int = 0


@dataclass
class GBTModel:
    trees: list  # trees[round][class] -> TreeNode
    n_classes: int
    params: GBTParams
    train_loss: list = None  # multiclass log-loss per round


def _grow_gbt_tree(x, g, h, lam, depth, max_depth):
    if depth >= max_depth or len(g) < 2:
        return TreeNode(value=np.array([-g.sum() / (h.sum() + lam)]))
    split = best_split_gain(x, g, h, range(x.shape[1]), lam)
    if split is None:
        return TreeNode(value=np.array([-g.sum() / (h.sum() + lam)]))
    f, thr, _ = split
    mask = x[:, f] <= thr
    left = _grow_gbt_tree(x[mask], g[mask], h[mask], lam, depth + 1, max_depth)
    right = _grow_gbt_tree(x[~mask], g[~mask], h[~mask], lam, depth + 1, max_depth)
    return TreeNode(feature=f, threshold=thr, left=left, right=right)


def _softmax(scores):
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _apply_tree_batch(tree, x):
    return np.array([_tree_apply(tree, row)[0] for row in x])


def train_gbt(train, params=None, n_classes=None):
    params = params or GBTParams()
    if len(train) == 0:
        raise ValueError("empty training data")
    n_classes = n_classes or max(N_CLASSES, int(train.y.max()) + 1)
    if len(np.unique(train.y)) < 2:
        raise ValueError("need at least 2 classes")
    x, y = train.x, train.y
    n = len(y)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    scores = np.zeros((n, n_classes))
    trees, losses = [], []
    for _ in range(params.rounds):
        p = _softmax(scores)
        round_trees = []
        for k in range(n_classes):
            g = p[:, k] - onehot[:, k]
            h = np.maximum(p[:, k] * (1.0 - p[:, k]), 1e-16)
            tree = _grow_gbt_tree(x, g, h, params.lam, 0, params.depth)
            round_trees.append(tree)
            scores[:, k] += params.eta * _apply_tree_batch(tree, x)
        trees.append(round_trees)
        p = _softmax(scores)
        losses.append(float(-np.mean(np.log(np.clip(p[np.arange(n), y], 1e-12, 1.0)))))
    return GBTModel(trees, n_classes, params, losses)


def gbt_scores(model, rows):
    rows = np.asarray(rows, dtype=np.float64)
    scores = np.zeros((rows.shape[0], model.n_classes))
    for round_trees in model.trees:
        for k, tree in enumerate(round_trees):
            scores[:, k] += model.params.eta * _apply_tree_batch(tree, rows)
    return scores


def predict_gbt(model, rows):
    probs = _softmax(gbt_scores(model, rows))
    return probs.argmax(axis=1), probs


# ---------------------------------------------------------------------------
# persistence (shared binary container; trees ride in the JSON header)

def _node_to_json(node):
    if node.is_leaf:
        return {"value": [float(v) for v in node.value]}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _node_to_json(node.left),
        "right": _node_to_json(node.right),
    }


def _node_from_json(d):
    if "value" in d:
        return TreeNode(value=np.asarray(d["value"], dtype=np.float64))
    return TreeNode(
        feature=d["feature"],
        threshold=d["threshold"],
        left=_node_from_json(d["left"]),
        right=_node_from_json(d["right"]),
    )


def save_forest(model, path):
    from . import serialize

    if isinstance(model, RFModel):
        meta = {
            "kind": "rf",
            "n_classes": model.n_classes,
            "params": vars(model.params),
            "trees": [_node_to_json(t) for t in model.trees],
        }
    else:
        meta = {
            "kind": "gbt",
            "n_classes": model.n_classes,
            "params": vars(model.params),
            "trees": [[_node_to_json(t) for t in rnd] for rnd in model.trees],
            "train_loss": model.train_loss,
        }
    serialize.write_container(path, meta, {})


def load_forest(path):
    from . import serialize

    meta, _ = serialize.read_container(path)
    if meta["kind"] == "rf":
        return RFModel(
            [_node_from_json(t) for t in meta["trees"]],
            meta["n_classes"],
            RFParams(**meta["params"]),
        )
    if meta["kind"] == "gbt":
        return GBTModel(
            [[_node_from_json(t) for t in rnd] for rnd in meta["trees"]],
            meta["n_classes"],
            GBTParams(**meta["params"]),
            meta.get("train_loss"),
        )
    raise ValueError(f"not a forest container: {meta.get('kind')}")
