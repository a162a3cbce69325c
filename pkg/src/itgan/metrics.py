"""Confusion matrix and multi-class evaluation metrics.

Per-class precision/recall/F with macro averaging, Cohen's kappa and the
multiclass Matthews correlation coefficient (Gorodkin R_K). All degenerate
0/0 cases resolve to 0.
"""

from dataclasses import dataclass

import numpy as np


def confusion(y_true, y_pred, n_classes):
    """Build a K x K confusion matrix; rows = true class, cols = predicted."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError(
            f"length mismatch: {y_true.shape[0]} true vs {y_pred.shape[0]} predicted"
        )
    if y_true.size and (y_true.min() < 0 or y_true.max() >= n_classes):
        raise ValueError("true label out of range")
    if y_pred.size and (y_pred.min() < 0 or y_pred.max() >= n_classes):
        raise ValueError("predicted label out of range")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def macro_prf(cm):
    """Per-class precision/recall/F and their macro means.

    Classes that never appear (neither true nor predicted) are excluded from
    the macro mean; 0/0 ratios are defined as 0.
    """
    cm = np.asarray(cm, dtype=np.float64)
    rowsum = cm.sum(axis=1)
    colsum = cm.sum(axis=0)
    diag = np.diag(cm)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(colsum > 0, diag / np.maximum(colsum, 1e-300), 0.0)
        recall = np.where(rowsum > 0, diag / np.maximum(rowsum, 1e-300), 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / np.maximum(denom, 1e-300), 0.0)
    present = (rowsum > 0) | (colsum > 0)
    if not present.any():
        return 0.0, 0.0, 0.0, list(zip(precision, recall, f1))
    macro_p = float(precision[present].mean())
    macro_r = float(recall[present].mean())
    macro_f = float(f1[present].mean())
    per_class = [(float(p), float(r), float(f)) for p, r, f in zip(precision, recall, f1)]
    return macro_p, macro_r, macro_f, per_class


def kappa(cm):
    """Cohen's kappa; chance agreement of exactly 1 is defined as kappa 0."""
    cm = np.asarray(cm, dtype=np.float64)
    n = cm.sum()
    if n == 0:
        return 0.0
    p_o = np.trace(cm) / n
    p_e = float(np.dot(cm.sum(axis=1), cm.sum(axis=0))) / (n * n)
    if abs(1.0 - p_e) < 1e-15:
        return 0.0
    return float((p_o - p_e) / (1.0 - p_e))


def mcc(cm):
    """Multiclass Matthews correlation (Gorodkin R_K); zero denominator -> 0."""
    cm = np.asarray(cm, dtype=np.float64)
    t = cm.sum(axis=1)  # true-class counts
    p = cm.sum(axis=0)  # predicted-class counts
    s = cm.sum()
    c = np.trace(cm)
    cov_ytyp = c * s - float(np.dot(p, t))
    cov_ypyp = s * s - float(np.dot(p, p))
    cov_ytyt = s * s - float(np.dot(t, t))
    denom = np.sqrt(cov_ypyp) * np.sqrt(cov_ytyt)
    if denom == 0:
        return 0.0
    return float(cov_ytyp / denom)


@dataclass
class MetricsBundle:
    precision_macro: float
    recall_macro: float
    f1_macro: float
    kappa: float
    mcc: float
    per_class: list  # (precision, recall, f1) per class index

    def as_dict(self):
        return {
            "precision_macro": self.precision_macro,
            "recall_macro": self.recall_macro,
            "f1_macro": self.f1_macro,
            "kappa": self.kappa,
            "mcc": self.mcc,
            "per_class": [list(t) for t in self.per_class],
        }


def evaluate(y_true, y_pred, n_classes):
    """Confusion matrix plus the full metric bundle for one prediction set."""
    cm = confusion(y_true, y_pred, n_classes)
    p, r, f, per_class = macro_prf(cm)
    return cm, MetricsBundle(p, r, f, kappa(cm), mcc(cm), per_class)
