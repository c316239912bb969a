"""Confusion-matrix metrics with explicit handling of undefined rates."""

from dataclasses import dataclass

import numpy as np

from ..errors import DataError

METRIC_NAMES = ("accuracy", "precision", "recall", "specificity")


@dataclass
class Metrics:
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float | None
    precision: float | None
    recall: float | None
    specificity: float | None

    @classmethod
    def from_counts(cls, tp: int, tn: int, fp: int, fn: int) -> "Metrics":
        def ratio(num, den):
            return num / den if den > 0 else None

        total = tp + tn + fp + fn
        return cls(
            tp=tp, tn=tn, fp=fp, fn=fn,
            accuracy=ratio(tp + tn, total),
            precision=ratio(tp, tp + fp),
            recall=ratio(tp, tp + fn),
            specificity=ratio(tn, tn + fp),
        )

    def as_dict(self) -> dict:
        return {
            "tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn,
            "accuracy": self.accuracy, "precision": self.precision,
            "recall": self.recall, "specificity": self.specificity,
        }


def confusion_counts(y_true, prob, threshold: float = 0.5) -> tuple[int, int, int, int]:
    y_true = np.asarray(y_true).astype(int)
    pred = (np.asarray(prob) >= threshold).astype(int)
    tp = int(np.sum((pred == 1) & (y_true == 1)))
    tn = int(np.sum((pred == 0) & (y_true == 0)))
    fp = int(np.sum((pred == 1) & (y_true == 0)))
    fn = int(np.sum((pred == 0) & (y_true == 1)))
    return tp, tn, fp, fn


def evaluate(model, X, embed, y, threshold: float = 0.5) -> Metrics:
    """Inference-mode predictions thresholded at ``threshold`` (>= is positive)."""
    if len(np.asarray(y)) == 0:
        raise DataError("evaluate: empty evaluation set")
    prob, _ = model.forward(X, embed, training=False)
    return Metrics.from_counts(*confusion_counts(y, prob, threshold))


def aggregate_metrics(per_fold: list[Metrics]) -> dict[str, tuple[float | None, float | None]]:
    """Mean and sample std of each rate over the folds where it is defined."""
    out = {}
    for name in METRIC_NAMES:
        values = [getattr(m, name) for m in per_fold if getattr(m, name) is not None]
        if not values:
            out[name] = (None, None)
        elif len(values) == 1:
            out[name] = (values[0], None)
        else:
            arr = np.array(values)
            out[name] = (float(arr.mean()), float(arr.std(ddof=1)))
    return out
