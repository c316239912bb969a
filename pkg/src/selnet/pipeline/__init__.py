from .data import Dataset, NormStats, kfold_split, load_dataset, normalize, save_dataset
from .metrics import METRIC_NAMES, Metrics, aggregate_metrics, confusion_counts, evaluate
from .perturb import PerturbReport, append_noise_features, noise_experiment
from .rundir import create_run_dir, write_history_csv, write_manifest, write_metrics_csv
from .synth import embed_stub, synth_generate
from .training import (
    EpochRecord,
    FoldResult,
    LogisticModel,
    TrainConfig,
    cross_validate,
    logistic_baseline,
    logistic_builder,
    selector_builder,
    train,
)

__all__ = [
    "Dataset",
    "NormStats",
    "kfold_split",
    "load_dataset",
    "normalize",
    "save_dataset",
    "METRIC_NAMES",
    "Metrics",
    "aggregate_metrics",
    "confusion_counts",
    "evaluate",
    "PerturbReport",
    "append_noise_features",
    "noise_experiment",
    "create_run_dir",
    "write_history_csv",
    "write_manifest",
    "write_metrics_csv",
    "embed_stub",
    "synth_generate",
    "EpochRecord",
    "FoldResult",
    "LogisticModel",
    "TrainConfig",
    "cross_validate",
    "logistic_baseline",
    "logistic_builder",
    "selector_builder",
    "train",
]
