"""Command-line entry points.

Subcommands: gen-corpus, featurize, split, augment, train, eval, viz,
pipeline. `split` writes min-max scaled train/test CSVs (scaler fit on the
train side only), so downstream stages always see [0, 1] features.
"""

import argparse
import dataclasses
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import cgan, corpusgen, features, forest, logs, metrics, nnclf, pipeline, resample, serialize, tsne, viz
from .dataset import (
    apply_scaler,
    fit_scaler,
    label_days,
    read_features_csv,
    stratified_split,
    write_features_csv,
)


def _cmd_gen_corpus(args):
    config = corpusgen.CorpusConfig(n_users=args.users, n_days=args.days, seed=args.seed)
    result = corpusgen.generate_corpus(config, args.out)
    n_mal = sum(1 for v in result.labels.values() if v != "NonMalicious")
    print(f"wrote corpus to {args.out}: {len(result.labels)} user-days, "
          f"{n_mal} malicious ({100.0 * n_mal / len(result.labels):.2f}%)")


def _cmd_featurize(args):
    buckets = logs.scan_corpus(args.corpus)
    d1, d2 = features.default_corpora()
    if args.d1:
        d1 = features.load_corpus("D1", args.d1)
    if args.d2:
        d2 = features.load_corpus("D2", args.d2)
    keys, matrix = features.extract_all(buckets, d1, d2)
    ground_truth = corpusgen.read_labels(Path(args.corpus) / "labels.csv")
    ds = label_days(keys, matrix, ground_truth)
    write_features_csv(ds, args.out)
    print(f"wrote {len(ds)} feature rows to {args.out}")


def _cmd_split(args):
    ds = read_features_csv(args.features)
    train, test = stratified_split(ds, args.test_frac, args.seed)
    scaler = fit_scaler(train)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_features_csv(apply_scaler(train, scaler), out_dir / "train.csv")
    write_features_csv(apply_scaler(test, scaler), out_dir / "test.csv")
    print(f"wrote {len(train)} train / {len(test)} test rows to {out_dir}")


def _cmd_augment(args):
    train = read_features_csv(args.train)
    train.role = "Train"
    if args.method == "ros":
        augmented = resample.ros(train, seed=args.seed)
    elif args.method == "smote":
        augmented = resample.smote(train, k=args.k, seed=args.seed)
    else:
        config = cgan.CganConfig(
            latent_dim=train.n_features,
            epochs=args.epochs,
            batch_size=args.batch_size,
            seed=args.seed,
        )
        model = cgan.train_cgan(train, config)
        if args.model_out:
            cgan.save_cgan(model, args.model_out)
        augmented = cgan.augment_dataset(train, model, seed=args.seed)
    write_features_csv(augmented, args.out)
    print(f"wrote {len(augmented)} rows ({len(augmented) - len(train)} added) to {args.out}")


def _cmd_train(args):
    train = read_features_csv(args.train)
    if args.model == "rf":
        model = forest.train_rf(train, forest.RFParams(n_trees=args.trees, seed=args.seed))
        forest.save_forest(model, args.out)
    elif args.model == "xgb":
        model = forest.train_gbt(train, forest.GBTParams(rounds=args.rounds, seed=args.seed))
        forest.save_forest(model, args.out)
    elif args.model == "mlp":
        model = nnclf.train_mlp(train, nnclf.MLPParams(epochs=args.epochs, seed=args.seed))
        nnclf.save_nn(model, args.out)
    else:
        model = nnclf.train_cnn1d(train, nnclf.CNNParams(epochs=args.epochs, seed=args.seed))
        nnclf.save_nn(model, args.out)
    print(f"trained {args.model} on {len(train)} rows -> {args.out}")


def _load_any_model(path):
    meta, _ = serialize.read_container(path)
    kind = meta.get("kind")
    if kind in ("rf", "gbt"):
        return kind, forest.load_forest(path)
    return kind, nnclf.load_nn(path)


def _cmd_eval(args):
    test = read_features_csv(args.test)
    kind, model = _load_any_model(args.model)
    if kind == "rf":
        y_pred = forest.predict_rf(model, test.x)[0]
        n_classes = model.n_classes
    elif kind == "gbt":
        y_pred = forest.predict_gbt(model, test.x)[0]
        n_classes = model.n_classes
    else:
        y_pred = nnclf.predict_nn(model, test.x)
        n_classes = model.n_classes
    cm, bundle = metrics.evaluate(test.y, y_pred, n_classes)
    report = {"model": kind, "metrics": bundle.as_dict(), "confusion": cm.tolist()}
    with open(args.out, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"kappa={bundle.kappa:.3f} mcc={bundle.mcc:.3f} f1_macro={bundle.f1_macro:.3f}")


def _cmd_viz(args):
    a = read_features_csv(args.a)
    b = read_features_csv(args.b)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, idx in (("L1", 0), ("L5", 4)):
        series = []
        for label, ds in ((args.label_a, a), (args.label_b, b)):
            grid, density = viz.kde_curve(ds.x[:, idx])
            series.append((label, grid, density))
        viz.export_plot(series, "kde", out_dir / f"kde_{name}.svg", title=f"KDE of {name}")
    rng = np.random.default_rng(args.seed)
    cap = args.max_points
    rows_a = a.x[rng.choice(len(a), size=min(cap, len(a)), replace=False)]
    rows_b = b.x[rng.choice(len(b), size=min(cap, len(b)), replace=False)]
    combined = np.concatenate([rows_a, rows_b])
    cut = len(rows_a)
    projected, _, _ = viz.pca_project(combined, k=2)
    viz.export_plot(
        [(args.label_a, projected[:cut, 0], projected[:cut, 1]),
         (args.label_b, projected[cut:, 0], projected[cut:, 1])],
        "scatter", out_dir / "pca.svg", title="PCA projection",
    )
    result = tsne.tsne_embed(combined, tsne.TsneParams(iters=400, seed=args.seed))
    emb = result.embedding
    viz.export_plot(
        [(args.label_a, emb[:cut, 0], emb[:cut, 1]),
         (args.label_b, emb[cut:, 0], emb[cut:, 1])],
        "scatter", out_dir / "tsne.svg", title="t-SNE embedding",
    )
    print(f"wrote viz bundle to {out_dir}")


def _cmd_pipeline(args):
    values = {}
    if args.config:
        with open(args.config, "rb") as fh:
            loaded = tomllib.load(fh)
        field_names = {f.name for f in dataclasses.fields(pipeline.RunConfig)}
        unknown = set(loaded) - field_names
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for f in dataclasses.fields(pipeline.RunConfig):
        override = getattr(args, f.name, None)
        if override is not None:
            values[f.name] = override
    for key in ("augmentations", "models", "nn_hidden"):
        if key in values:
            values[key] = tuple(values[key])
    config = pipeline.RunConfig(**values)
    report = pipeline.run_pipeline(config)
    print(f"wrote report bundle to {config.out_dir} ({len(report['cells'])} cells)")


def _int_list(text):
    return [int(v) for v in text.split(",") if v]


def _str_list(text):
    return [v for v in text.split(",") if v]


def build_parser():
    parser = argparse.ArgumentParser(prog="itgan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", help="generate a synthetic log corpus")
    p.add_argument("--users", type=int, default=200)
    p.add_argument("--days", type=int, default=120)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen_corpus)

    p = sub.add_parser("featurize", help="extract labeled user-day feature vectors")
    p.add_argument("--corpus", required=True)
    p.add_argument("--d1", help="override D1 corpus file (one term per line)")
    p.add_argument("--d2", help="override D2 corpus file")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_featurize)

    p = sub.add_parser("split", help="stratified split + min-max scaling")
    p.add_argument("--features", required=True)
    p.add_argument("--test-frac", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=_cmd_split)

    p = sub.add_parser("augment", help="oversample the training set")
    p.add_argument("--train", required=True)
    p.add_argument("--method", choices=("ros", "smote", "cgan"), required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--model-out", help="save the trained CGAN container here")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_augment)

    p = sub.add_parser("train", help="train one classifier")
    p.add_argument("--train", required=True)
    p.add_argument("--model", choices=pipeline.MODELS, required=True)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--rounds", type=int, default=100)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved model on a test CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("viz", help="KDE/PCA/t-SNE comparison of two feature CSVs")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--label-a", default="real")
    p.add_argument("--label-b", default="synthetic")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--max-points", type=int, default=800)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_viz)

    p = sub.add_parser("pipeline", help="run the full experiment grid")
    p.add_argument("--config", help="TOML config; every key has a flag of the same name")
    p.add_argument("--corpus-dir")
    p.add_argument("--gen-users", type=int)
    p.add_argument("--gen-days", type=int)
    p.add_argument("--test-frac", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--augmentations", type=_str_list)
    p.add_argument("--models", type=_str_list)
    p.add_argument("--mode", choices=pipeline.MODES)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--out", dest="out_dir", help="alias for --out-dir")
    p.add_argument("--cgan-epochs", type=int)
    p.add_argument("--cgan-batch", type=int)
    p.add_argument("--nn-epochs", type=int)
    p.add_argument("--nn-hidden", type=_int_list)
    p.add_argument("--rf-trees", type=int)
    p.add_argument("--gbt-rounds", type=int)
    p.add_argument("--smote-k", type=int)
    p.add_argument("--make-viz", type=lambda v: v.lower() in ("1", "true", "yes"))
    p.add_argument("--viz-max-points", type=int)
    p.set_defaults(fn=_cmd_pipeline)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.fn(args)
    except pipeline.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
