"""Labeled feature datasets: roles, min-max scaling, stratified splitting.

A Dataset carries an n x 20 feature matrix, integer class labels
(NonMalicious=0, S1=1, S2=2, S3=3), an optional fitted scaler and a role tag
(Original / Train / Test / Synthetic / Augment).
"""

import csv
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from . import CLASS_INDEX, CLASS_NAMES
from .features import FEATURE_NAMES, N_FEATURES
from .logs import UserDayKey


@dataclass(frozen=True)
class Scaler:
    """Per-feature (min, max) pairs for min-max scaling to [0, 1]."""

    lo: np.ndarray
    hi: np.ndarray


@dataclass
class Dataset:
    x: np.ndarray  # (n, n_features) float64
    y: np.ndarray  # (n,) int64
    role: str = "Original"
    scaler: Scaler | None = None
    keys: list = field(default_factory=list)  # optional UserDayKey per row

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.x.shape[0] != self.y.shape[0]:
            raise ValueError("feature matrix and labels disagree on row count")

    def __len__(self):
        return self.x.shape[0]

    @property
    def n_features(self):
        return self.x.shape[1]

    def class_counts(self, n_classes=None):
        k = n_classes or (int(self.y.max()) + 1 if len(self) else 0)
        return np.bincount(self.y, minlength=k)

    def subset(self, index, role=None):
        keys = [self.keys[i] for i in index] if self.keys else []
        return Dataset(self.x[index], self.y[index], role or self.role, self.scaler, keys)


def label_days(keys, matrix, ground_truth):
    """Attach ground-truth class labels to featurized user-days."""
    labels = np.zeros(len(keys), dtype=np.int64)
    for i, key in enumerate(keys):
        if key not in ground_truth:
            raise KeyError(f"user-day {key.user}/{key.date} missing from ground truth")
        labels[i] = CLASS_INDEX[ground_truth[key]]
    return Dataset(np.asarray(matrix, dtype=np.float64), labels, role="Original", keys=list(keys))


def fit_scaler(train):
    """Fit per-feature min/max on a Train dataset only."""
    if train.role != "Train":
        raise ValueError(f"scaler must be fit on role Train, got {train.role}")
    if len(train) == 0:
        raise ValueError("cannot fit a scaler on an empty dataset")
    return Scaler(lo=train.x.min(axis=0), hi=train.x.max(axis=0))


def apply_scaler(ds, scaler):
    """Min-max scale to [0, 1]; constant features map to 0, values clamp."""
    span = scaler.hi - scaler.lo
    scaled = np.where(span > 0, (ds.x - scaler.lo) / np.where(span > 0, span, 1.0), 0.0)
    scaled = np.clip(scaled, 0.0, 1.0)
    return Dataset(scaled, ds.y.copy(), ds.role, scaler, list(ds.keys))


def stratified_split(ds, test_frac, seed):
    """Deterministic per-class split; test count = round(class_count * frac), min 1."""
    if not 0.0 < test_frac < 1.0:
        raise ValueError("test_frac must lie in (0, 1)")
    counts = ds.class_counts()
    for cls, count in enumerate(counts):
        if count == 1:
            raise ValueError(f"class {cls} has a single sample; cannot split")
    rng = np.random.default_rng(seed)
    test_mask = np.zeros(len(ds), dtype=bool)
    for cls in np.nonzero(counts)[0]:
        idx = np.nonzero(ds.y == cls)[0]
        n_test = max(1, round(len(idx) * test_frac))
        chosen = rng.choice(idx, size=n_test, replace=False)
        test_mask[chosen] = True
    train_idx = np.nonzero(~test_mask)[0]
    test_idx = np.nonzero(test_mask)[0]
    return ds.subset(train_idx, role="Train"), ds.subset(test_idx, role="Test")


_SYNTHETIC_KEY = UserDayKey("-", date(1970, 1, 1))


def write_features_csv(ds, path):
    """Write user,date,L1..W1,label rows.

    Rows without a user-day key (synthetic/augmented data) get a placeholder
    "-" user and epoch date.
    """
    keys = list(ds.keys) + [_SYNTHETIC_KEY] * (len(ds) - len(ds.keys))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user", "date"] + FEATURE_NAMES + ["label"])
        for key, row, label in zip(keys, ds.x, ds.y):
            writer.writerow(
                [key.user, key.date.isoformat()]
                + [format(v, ".10g") for v in row]
                + [CLASS_NAMES[label]]
            )


def read_features_csv(path):
    expected = ["user", "date"] + FEATURE_NAMES + ["label"]
    keys, rows, labels = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != expected:
            raise ValueError(f"bad features.csv header: {header}")
        for rec in reader:
            keys.append(UserDayKey(rec[0], date.fromisoformat(rec[1])))
            rows.append([float(v) for v in rec[2 : 2 + N_FEATURES]])
            labels.append(CLASS_INDEX[rec[-1]])
    matrix = np.asarray(rows, dtype=np.float64).reshape(len(rows), N_FEATURES)
    return Dataset(matrix, np.asarray(labels, dtype=np.int64), role="Original", keys=keys)
