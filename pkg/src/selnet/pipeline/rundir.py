"""Run directory artifacts: metrics, history, attention, manifest."""

import csv
from pathlib import Path

from ..errors import RunDirExistsError
from .metrics import METRIC_NAMES, aggregate_metrics


def create_run_dir(path) -> Path:
    """Create a fresh run directory; existing ones are never overwritten."""
    path = Path(path)
    if path.exists():
        raise RunDirExistsError(f"run directory {path} already exists (append-only)")
    path.mkdir(parents=True)
    return path


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_metrics_csv(path, fold_results) -> None:
    """Per-fold confusion counts and rates, then mean and std rows."""
    per_fold = [r.metrics for r in fold_results]
    summary = aggregate_metrics(per_fold)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fold", "tp", "tn", "fp", "fn", *METRIC_NAMES])
        for r in fold_results:
            m = r.metrics
            writer.writerow([
                r.fold, m.tp, m.tn, m.fp, m.fn,
                *(_fmt(getattr(m, name)) for name in METRIC_NAMES),
            ])
        writer.writerow(["mean", "", "", "", "",
                         *(_fmt(summary[name][0]) for name in METRIC_NAMES)])
        writer.writerow(["std", "", "", "", "",
                         *(_fmt(summary[name][1]) for name in METRIC_NAMES)])


def write_history_csv(path, fold_results) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fold", "epoch", "train_loss", "val_loss", "lr"])
        for r in fold_results:
            for rec in r.history:
                writer.writerow([
                    r.fold, rec.epoch, _fmt(rec.train_loss), _fmt(rec.val_loss),
                    _fmt(rec.lr),
                ])


def write_manifest(path, entries: dict) -> None:
    """Plain-text key=value manifest capturing every seed and config value."""
    with open(path, "w") as fh:
        for key in sorted(entries):
            fh.write(f"{key}={entries[key]}\n")
