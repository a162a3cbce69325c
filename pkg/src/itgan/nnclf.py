"""Neural classifiers on the network engine: an MLP and a 1-D CNN.

Both end in a softmax over the class set, train with softmax cross-entropy
and Adam, and are deterministic given the seed.
"""

from dataclasses import dataclass, field

import numpy as np

from . import serialize
from .nncore import (
    AdamState,
    Conv1D,
    Dense,
    Flatten,
    MaxPool1D,
    Network,
    NetworkSpec,
    adam_step,
    init_network,
    softmax_ce_loss,
)

N_CLASSES = 4


@dataclass
class MLPParams:
    hidden: tuple = (64, 32)
    activation: str = "relu"
    epochs: int = 100
    batch: int = 64
    lr: float = 1e-3
    seed: int = 0


@dataclass
class CNNParams:
    conv: tuple = ((16, 3), (32, 3))
    pool: int = 2
    dense: int = 32
    epochs: int = 100
    batch: int = 64
    lr: float = 1e-3
    seed: int = 0


@dataclass
class NNModel:
    net: Network
    kind: str  # "mlp" or "cnn1d"
    n_classes: int
    train_loss: list = field(default_factory=list)


def _train_loop(net, x, y, epochs, batch, lr, seed):
    rng = np.random.default_rng(np.random.SeedSequence([seed, 21]))
    opt = AdamState(lr=lr)
    losses = []
    n = len(y)
    for _ in range(epochs):
        order = rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, batch):
            rows = order[start : start + batch]
            probs = net.forward(x[rows], train=True, rng=rng)
            loss, grad = softmax_ce_loss(probs, y[rows])
            net.backward(grad)
            adam_step(net.parameters(), net.gradients(), opt)
            epoch_losses.append(loss)
        net.check_finite()
        losses.append(float(np.mean(epoch_losses)))
    return losses


def train_mlp(train, params=None, n_classes=None):
    """Dense softmax classifier on scaled features."""
    params = params or MLPParams()
    if len(train) == 0:
        raise ValueError("empty training data")
    n_classes = n_classes or max(N_CLASSES, int(train.y.max()) + 1)
    layers = tuple(Dense(units, params.activation) for units in params.hidden)
    spec = NetworkSpec(layers + (Dense(n_classes, "softmax"),), (train.n_features,))
    net = init_network(spec, params.seed)
    losses = _train_loop(net, train.x, train.y, params.epochs, params.batch, params.lr, params.seed)
    return NNModel(net, "mlp", n_classes, losses)


def train_cnn1d(train, params=None, n_classes=None):
    """1-D CNN treating the feature vector as a length-n, 1-channel sequence."""
    params = params or CNNParams()
    if len(train) == 0:
        raise ValueError("empty training data")
    n_classes = n_classes or max(N_CLASSES, int(train.y.max()) + 1)
    (f1, k1), (f2, k2) = params.conv
    spec = NetworkSpec(
        (
            Conv1D(f1, k1, "relu", "same"),
            MaxPool1D(params.pool),
            Conv1D(f2, k2, "relu", "same"),
            Flatten(),
            Dense(params.dense, "relu"),
            Dense(n_classes, "softmax"),
        ),
        (train.n_features, 1),
    )
    net = init_network(spec, params.seed)
    x = train.x[:, :, None]
    losses = _train_loop(net, x, train.y, params.epochs, params.batch, params.lr, params.seed)
    return NNModel(net, "cnn1d", n_classes, losses)


def predict_proba(model, rows):
    rows = np.asarray(rows, dtype=np.float64)
    if model.kind == "cnn1d":
        rows = rows[:, :, None]
    return model.net.forward(rows)


def predict_nn(model, rows):
    """Argmax labels; ties resolve to the lowest class index."""
    return predict_proba(model, rows).argmax(axis=1)


def save_nn(model, path):
    serialize.save_network(
        model.net,
        path,
        extra_meta={"kind": model.kind, "n_classes": model.n_classes,
                    "train_loss": model.train_loss},
    )


def load_nn(path):
    net, meta, _ = serialize.load_network(path)
    return NNModel(net, meta["kind"], meta["n_classes"], meta.get("train_loss", []))
