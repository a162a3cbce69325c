"""End-to-end orchestration: ingest or generate a corpus, featurize, split,
scale, run the augmentation x model grid, and emit the report bundle.

The test split and scaler are fixed before any augmentation, and every grid
cell records (and asserts) the same test-split hash.
"""

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import CLASS_NAMES, cgan, corpusgen, features, forest, logs, metrics, nnclf, resample, tsne, viz
from .dataset import Dataset, apply_scaler, fit_scaler, label_days, stratified_split

AUGMENTATIONS = ("real", "ros", "smote", "cgan")
MODELS = ("rf", "xgb", "mlp", "cnn1d")
MODES = ("multiclass", "binary")


@dataclass
class RunConfig:
    corpus_dir: str = ""        # empty -> generate a corpus under out_dir
    gen_users: int = 200
    gen_days: int = 120
    test_frac: float = 0.3
    seed: int = 7
    augmentations: tuple = AUGMENTATIONS
    models: tuple = MODELS
    mode: str = "multiclass"
    out_dir: str = "run-out"
    cgan_epochs: int = 300
    cgan_batch: int = 64
    nn_epochs: int = 100
    nn_hidden: tuple = (64, 32)
    rf_trees: int = 100
    gbt_rounds: int = 100
    smote_k: int = 5
    make_viz: bool = True
    viz_max_points: int = 800

    def validate(self):
        if not self.augmentations or not self.models:
            raise ValueError("augmentation and model lists must be non-empty")
        for a in self.augmentations:
            if a not in AUGMENTATIONS:
                raise ValueError(f"unknown augmentation {a!r}")
        for m in self.models:
            if m not in MODELS:
                raise ValueError(f"unknown model {m!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")

    def as_dict(self):
        d = asdict(self)
        d["augmentations"] = list(self.augmentations)
        d["models"] = list(self.models)
        d["nn_hidden"] = list(self.nn_hidden)
        return d


class StageError(RuntimeError):
    """Pipeline failure tagged with the stage (and grid cell) it came from."""

    def __init__(self, stage, cell, cause):
        super().__init__(f"stage {stage!r} cell {cell!r} failed: {cause}")
        self.stage = stage
        self.cell = cell


def config_hash(config):
    blob = json.dumps(config.as_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def dataset_hash(ds):
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(ds.x, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(ds.y, dtype="<i8").tobytes())
    return h.hexdigest()


def _derived_seed(base, *tags):
    blob = json.dumps([base, *tags]).encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:4], "little")


def _stage(name, cell, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:  # noqa: BLE001 - rewrap with cell identity
        raise StageError(name, cell, exc) from exc


def ingest(config, out_dir):
    """Return the labeled Original dataset plus a corpus content hash."""
    if config.corpus_dir:
        corpus_dir = Path(config.corpus_dir)
    else:
        corpus_dir = Path(out_dir) / "corpus"
        gen_config = corpusgen.CorpusConfig(
            n_users=config.gen_users, n_days=config.gen_days, seed=config.seed
        )
        corpusgen.generate_corpus(gen_config, corpus_dir)
    buckets = logs.scan_corpus(corpus_dir)
    keys, matrix = features.extract_all(buckets)
    ground_truth = corpusgen.read_labels(corpus_dir / "labels.csv")
    original = label_days(keys, matrix, ground_truth)
    h = hashlib.sha256()
    for name in sorted(f.name for f in corpus_dir.iterdir() if f.suffix == ".csv"):
        h.update((corpus_dir / name).read_bytes())
    return original, h.hexdigest()


def _build_training_set(augmentation, train_s, config, conditioned, n_classes, seed):
    if augmentation == "real":
        return train_s, None
    if augmentation == "ros":
        return resample.ros(train_s, seed=seed), None
    if augmentation == "smote":
        return resample.smote(train_s, k=config.smote_k, seed=seed), None
    gan_config = cgan.CganConfig(
        latent_dim=train_s.n_features,
        epochs=config.cgan_epochs,
        batch_size=config.cgan_batch,
        conditioned_classes=conditioned,
        seed=seed,
    )
    model = cgan.train_cgan(train_s, gan_config)
    return cgan.augment_dataset(train_s, model, seed=seed), model


def _train_and_predict(model_name, training_set, test_x, config, n_classes, seed):
    if model_name == "rf":
        model = forest.train_rf(
            training_set, forest.RFParams(n_trees=config.rf_trees, seed=seed), n_classes
        )
        return forest.predict_rf(model, test_x)[0]
    if model_name == "xgb":
        model = forest.train_gbt(
            training_set, forest.GBTParams(rounds=config.gbt_rounds, seed=seed), n_classes
        )
        return forest.predict_gbt(model, test_x)[0]
    if model_name == "mlp":
        model = nnclf.train_mlp(
            training_set,
            nnclf.MLPParams(hidden=tuple(config.nn_hidden), epochs=config.nn_epochs, seed=seed),
            n_classes,
        )
        return nnclf.predict_nn(model, test_x)
    model = nnclf.train_cnn1d(
        training_set, nnclf.CNNParams(epochs=config.nn_epochs, seed=seed), n_classes
    )
    return nnclf.predict_nn(model, test_x)


def run_pipeline(config):
    """Execute the configured grid; returns the report as a plain dict."""
    config.validate()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    original, corpus_hash = _stage("ingest", None, ingest, config, out_dir)
    train, test = _stage(
        "split", None, stratified_split, original, config.test_frac, config.seed
    )
    scaler = _stage("scale", None, fit_scaler, train)
    train_s = apply_scaler(train, scaler)
    test_s = apply_scaler(test, scaler)
    test_hash = dataset_hash(test_s)

    if config.mode == "multiclass":
        tasks = [("multiclass", None)]
    else:
        tasks = [(f"binary-{CLASS_NAMES[c]}", c) for c in (1, 2, 3)]

    cells = []
    synthetic_sample = None
    for task_name, scenario in tasks:
        if scenario is None:
            task_train, task_test_y = train_s, test_s.y
            conditioned, n_classes = (1, 2, 3), 4
        else:
            task_train = Dataset(
                train_s.x, (train_s.y == scenario).astype(np.int64), "Train", train_s.scaler
            )
            task_test_y = (test_s.y == scenario).astype(np.int64)
            conditioned, n_classes = (1,), 2
        for augmentation in config.augmentations:
            cell_seed = _derived_seed(config.seed, task_name, augmentation)
            cell_id = (task_name, augmentation)
            training_set, gan_model = _stage(
                "augment", cell_id, _build_training_set,
                augmentation, task_train, config, conditioned, n_classes, cell_seed,
            )
            if gan_model is not None and synthetic_sample is None:
                n_sample = min(len(task_train), 500)
                synthetic_sample = cgan.generate(gan_model, conditioned[0], n_sample, seed=cell_seed)
            for model_name in config.models:
                cell_id = (task_name, augmentation, model_name)
                started = time.perf_counter()
                y_pred = _stage(
                    "train", cell_id, _train_and_predict,
                    model_name, training_set, test_s.x, config, n_classes,
                    _derived_seed(cell_seed, model_name),
                )
                cm, bundle = metrics.evaluate(task_test_y, y_pred, n_classes)
                cells.append(
                    {
                        "mode": task_name,
                        "augmentation": augmentation,
                        "model": model_name,
                        "metrics": bundle.as_dict(),
                        "confusion": cm.tolist(),
                        "test_hash": test_hash,
                        "seconds": time.perf_counter() - started,
                    }
                )
                assert cells[-1]["test_hash"] == test_hash

    recomputed = fit_scaler(train)
    assert np.array_equal(recomputed.lo, scaler.lo) and np.array_equal(recomputed.hi, scaler.hi)

    report = {
        "config": config.as_dict(),
        "config_hash": config_hash(config),
        "corpus_hash": corpus_hash,
        "test_hash": test_hash,
        "seed": config.seed,
        "n_rows": {"original": len(original), "train": len(train), "test": len(test)},
        "cells": cells,
    }
    emit_report(report, out_dir, train_s=train_s, synthetic=synthetic_sample, config=config)
    return report


# ---------------------------------------------------------------------------
# report emission

def strip_timing(report):
    """Copy of a report with the wall-clock fields removed (determinism checks)."""
    clone = json.loads(json.dumps(report))
    for cell in clone["cells"]:
        cell.pop("seconds", None)
    return clone


def emit_report(report, out_dir, train_s=None, synthetic=None, config=None):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")

    lines = [
        "# Evaluation report",
        "",
        f"- config hash: `{report['config_hash']}`",
        f"- corpus hash: `{report['corpus_hash']}`",
        f"- test-split hash: `{report['test_hash']}`",
        "",
        "| Mode | Augmentation | Model | Precision | Recall | F-score | Kappa | MCC |",
        "|------|--------------|-------|-----------|--------|---------|-------|-----|",
    ]
    for cell in report["cells"]:
        m = cell["metrics"]
        lines.append(
            f"| {cell['mode']} | {cell['augmentation']} | {cell['model']} "
            f"| {m['precision_macro']:.3f} | {m['recall_macro']:.3f} "
            f"| {m['f1_macro']:.3f} | {m['kappa']:.3f} | {m['mcc']:.3f} |"
        )
    (out_dir / "report.md").write_text("\n".join(lines) + "\n")

    if config is not None and config.make_viz and train_s is not None and synthetic is not None:
        emit_viz_bundle(train_s, synthetic, out_dir / "viz", config)


def emit_viz_bundle(train_s, synthetic, viz_dir, config):
    """KDE (L1, L5), PCA and t-SNE comparisons of real vs synthetic rows."""
    viz_dir = Path(viz_dir)
    viz_dir.mkdir(parents=True, exist_ok=True)
    for name, idx in (("L1", 0), ("L5", 4)):
        series = []
        for label, ds in (("real", train_s), ("synthetic", synthetic)):
            grid, density = viz.kde_curve(ds.x[:, idx])
            series.append((label, grid, density))
        viz.export_plot(series, "kde", viz_dir / f"kde_{name}.svg",
                        title=f"KDE of {name}: real vs synthetic")

    rng = np.random.default_rng(config.seed)
    cap = config.viz_max_points
    real_rows = train_s.x[rng.choice(len(train_s), size=min(cap, len(train_s)), replace=False)]
    synth_rows = synthetic.x[rng.choice(len(synthetic), size=min(cap, len(synthetic)), replace=False)]
    combined = np.concatenate([real_rows, synth_rows])
    split_at = len(real_rows)

    projected, _, _ = viz.pca_project(combined, k=2)
    viz.export_plot(
        [
            ("real", projected[:split_at, 0], projected[:split_at, 1]),
            ("synthetic", projected[split_at:, 0], projected[split_at:, 1]),
        ],
        "scatter", viz_dir / "pca.svg", title="PCA projection: real vs synthetic",
    )

    result = tsne.tsne_embed(combined, tsne.TsneParams(iters=400, seed=config.seed))
    emb = result.embedding
    viz.export_plot(
        [
            ("real", emb[:split_at, 0], emb[:split_at, 1]),
            ("synthetic", emb[split_at:, 0], emb[split_at:, 1]),
        ],
        "scatter", viz_dir / "tsne.svg", title="t-SNE embedding: real vs synthetic",
    )
