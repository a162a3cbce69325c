"""Conditional GAN for minority-class tabular augmentation.

Generator: Dense 32 (LeakyReLU) -> Dense 64 (LeakyReLU) -> Dense n_features
(linear). Discriminator: Dense 256 -> Dense 128 (+ dropout 0.2) -> Dense 32
(all LeakyReLU) -> Dense 1 (sigmoid). Both receive a trainable class-label
embedding concatenated to their input; only minority classes are conditioned
and generated. Real minibatches are class-balanced over the conditioned
classes; the generator uses the non-saturating BCE objective.
"""

from dataclasses import dataclass, field

import numpy as np

from . import serialize
from .dataset import Dataset
from .nncore import (
    AdamState,
    Dense,
    Dropout,
    Network,
    NetworkSpec,
    adam_step,
    bce_loss,
    init_network,
)

N_CLASSES = 4


@dataclass
class CganConfig:
    latent_dim: int = 20  # kept equal to the feature count
    epochs: int = 300
    batch_size: int = 64
    lr: float = 2e-4
    beta1: float = 0.5
    embed_dim: int = 8
    conditioned_classes: tuple = (1, 2, 3)  # S1, S2, S3
    seed: int = 0

    def validate(self):
        if not self.conditioned_classes:
            raise ValueError("conditioned_classes must be non-empty")
        if self.latent_dim < 1 or self.epochs < 1 or self.batch_size < 1:
            raise ValueError("latent_dim, epochs and batch_size must be positive")
        if not 0 < self.embed_dim:
            raise ValueError("embed_dim must be positive")


@dataclass
class GanModel:
    generator: Network
    discriminator: Network
    embedding: np.ndarray  # (N_CLASSES, embed_dim)
    config: CganConfig
    history: list = field(default_factory=list)  # (loss_d, loss_g) per epoch


def build_cgan(feature_count, config):
    """Fresh generator/discriminator/embedding, deterministic in the seed."""
    config.validate()
    if feature_count < 1:
        raise ValueError("feature_count must be positive")
    g_spec = NetworkSpec(
        (
            Dense(32, "leaky_relu"),
            Dense(64, "leaky_relu"),
            Dense(feature_count, "linear"),
        ),
        input_shape=(config.latent_dim + config.embed_dim,),
    )
    d_spec = NetworkSpec(
        (
            Dense(256, "leaky_relu"),
            Dense(128, "leaky_relu"),
            Dropout(0.2),
            Dense(32, "leaky_relu"),
            Dense(1, "sigmoid"),
        ),
        input_shape=(feature_count + config.embed_dim,),
    )
    rng = np.random.default_rng(config.seed)
    generator = init_network(g_spec, seed=int(rng.integers(2**31)))
    discriminator = init_network(d_spec, seed=int(rng.integers(2**31)))
    embedding = rng.normal(0.0, 0.1, size=(N_CLASSES, config.embed_dim))
    return GanModel(generator, discriminator, embedding, config)


def _balanced_epoch_indices(y, classes, quota, steps, rng):
    """Per-class row indices for one epoch: each class contributes exactly
    quota rows per step, cycling through a shuffled copy (with-replacement
    tiling for scarce classes) so per-class usage counts stay even."""
    per_class = {}
    need = quota * steps
    for cls in classes:
        idx = np.flatnonzero(y == cls)
        if idx.size == 0:
            raise ValueError(f"conditioned class {cls} absent from training data")
        reps = int(np.ceil(need / idx.size))
        pool = np.concatenate([rng.permutation(idx) for _ in range(reps)])[:need]
        per_class[cls] = pool
    return per_class


def _embed_grad_from_input(input_grad, labels, embed_dim, out):
    np.add.at(out, labels, input_grad[:, -embed_dim:])


def train_cgan(train, config):
    """Adversarial training on a scaled dataset; deterministic given seed."""
    config.validate()
    if len(train) == 0:
        raise ValueError("empty training data")
    if train.x.min() < -1e-9 or train.x.max() > 1.0 + 1e-9:
        raise ValueError("train_cgan expects features scaled to [0, 1]")
    model = build_cgan(train.n_features, config)
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 1]))

    classes = sorted(config.conditioned_classes)
    n_cond = len(classes)
    quota = max(1, config.batch_size // n_cond)
    n_real = sum(int((train.y == c).sum()) for c in classes)
    steps = max(1, int(np.ceil(n_real / config.batch_size)))

    g, d, emb = model.generator, model.discriminator, model.embedding
    opt_g = AdamState(lr=config.lr, beta1=config.beta1)
    opt_d = AdamState(lr=config.lr, beta1=config.beta1)
    opt_e = AdamState(lr=config.lr, beta1=config.beta1)
    embed_dim = config.embed_dim
    batch = quota * n_cond

    for _ in range(config.epochs):
        pools = _balanced_epoch_indices(train.y, classes, quota, steps, rng)
        d_losses, g_losses = [], []
        for step in range(steps):
            rows = np.concatenate(
                [pools[c][step * quota : (step + 1) * quota] for c in classes]
            )
            x_real = train.x[rows]
            y_real = train.y[rows]

            # --- discriminator step
            z = rng.standard_normal((batch, config.latent_dim))
            y_fake = rng.choice(classes, size=batch)
            x_fake = g.forward(np.concatenate([z, emb[y_fake]], axis=1))
            d_in = np.concatenate(
                [
                    np.concatenate([x_real, emb[y_real]], axis=1),
                    np.concatenate([x_fake, emb[y_fake]], axis=1),
                ]
            )
            targets = np.concatenate([np.ones(batch), np.zeros(batch)])
            pred = d.forward(d_in, train=True, rng=rng)
            loss_d, grad = bce_loss(pred, targets)
            d_input_grad = d.backward(grad)
            e_grad = np.zeros_like(emb)
            _embed_grad_from_input(d_input_grad[:batch], y_real, embed_dim, e_grad)
            _embed_grad_from_input(d_input_grad[batch:], y_fake, embed_dim, e_grad)
            adam_step(d.parameters(), d.gradients(), opt_d)
            adam_step([emb], [e_grad], opt_e)

            # --- generator step (non-saturating: fake -> label 1)
            z = rng.standard_normal((batch, config.latent_dim))
            y_gen = rng.choice(classes, size=batch)
            g_in = np.concatenate([z, emb[y_gen]], axis=1)
            x_gen = g.forward(g_in, train=True, rng=None)
            d_in = np.concatenate([x_gen, emb[y_gen]], axis=1)
            pred = d.forward(d_in, train=True, rng=rng)
            loss_g, grad = bce_loss(pred, np.ones(batch))
            d_input_grad = d.backward(grad)
            g_out_grad = d_input_grad[:, : train.n_features]
            g_input_grad = g.backward(g_out_grad)
            e_grad = np.zeros_like(emb)
            _embed_grad_from_input(d_input_grad, y_gen, embed_dim, e_grad)
            _embed_grad_from_input(g_input_grad, y_gen, embed_dim, e_grad)
            adam_step(g.parameters(), g.gradients(), opt_g)
            adam_step([emb], [e_grad], opt_e)

            if not (np.isfinite(loss_d) and np.isfinite(loss_g)):
                raise FloatingPointError("non-finite adversarial loss")
            d_losses.append(loss_d)
            g_losses.append(loss_g)
        model.history.append((float(np.mean(d_losses)), float(np.mean(g_losses))))
        g.check_finite()
        d.check_finite()
    return model


def generate(model, cls, n, seed=0):
    """n synthetic rows of one conditioned class, clipped to [0, 1]."""
    if cls not in model.config.conditioned_classes:
        raise ValueError(f"class {cls} is not conditioned")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([model.config.seed, 2, seed, cls]))
    z = rng.standard_normal((n, model.config.latent_dim))
    labels = np.full(n, cls, dtype=np.int64)
    x = model.generator.forward(np.concatenate([z, model.embedding[labels]], axis=1))
    return Dataset(np.clip(x, 0.0, 1.0), labels, role="Synthetic")


def augment_dataset(train, model, policy=None, seed=0):
    """Train rows followed by enough synthetic rows to meet per-class targets.

    Default policy raises every conditioned class to the majority-class count.
    Targets at or below the existing count are no-ops.
    """
    counts = train.class_counts(N_CLASSES)
    if policy is None:
        majority = int(counts.max())
        policy = {c: majority for c in model.config.conditioned_classes}
    parts_x, parts_y = [train.x], [train.y]
    for cls in sorted(policy):
        deficit = int(policy[cls]) - int(counts[cls])
        if deficit > 0:
            synth = generate(model, cls, deficit, seed=seed)
            parts_x.append(synth.x)
            parts_y.append(synth.y)
    return Dataset(
        np.concatenate(parts_x), np.concatenate(parts_y), role="Augment", scaler=train.scaler
    )


def save_cgan(model, path):
    arrays = serialize.network_arrays(model.generator, prefix="g.")
    arrays.update(serialize.network_arrays(model.discriminator, prefix="d."))
    arrays["embedding"] = model.embedding
    meta = {
        "kind": "cgan",
        "g_spec": serialize.spec_to_json(model.generator.spec),
        "d_spec": serialize.spec_to_json(model.discriminator.spec),
        "config": vars(model.config) | {"conditioned_classes": list(model.config.conditioned_classes)},
        "history": model.history,
    }
    serialize.write_container(path, meta, arrays)


def load_cgan(path):
    meta, arrays = serialize.read_container(path)
    if meta.get("kind") != "cgan":
        raise ValueError("not a cgan container")
    cfg = dict(meta["config"])
    cfg["conditioned_classes"] = tuple(cfg["conditioned_classes"])
    config = CganConfig(**cfg)
    generator = serialize.restore_network(meta["g_spec"], arrays, prefix="g.")
    discriminator = serialize.restore_network(meta["d_spec"], arrays, prefix="d.")
    model = GanModel(generator, discriminator, arrays["embedding"], config)
    model.history = [tuple(h) for h in meta["history"]]
    return model
