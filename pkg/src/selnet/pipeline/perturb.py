"""Noise-perturbation interpretability experiment.

Appends label-independent uniform features, retrains from scratch, and
compares the attention mass the model assigns to planted informative
features against the mass landing on the noise columns.
"""

from dataclasses import dataclass, replace

import numpy as np

from ..errors import PreconditionError
from ..features.schema import FeatureSchema
from ..model.attention import AttentionReport, attention_report
from ..model.network import SelectorNet, SelectorNetConfig
from .data import Dataset, kfold_split, normalize
from .metrics import Metrics, evaluate
from .synth import INFORMATIVE_PREFIX
from .training import TrainConfig, train


@dataclass
class PerturbReport:
    feature_names: list[str]
    mean_abs_attention: np.ndarray
    noise_names: list[str]
    informative_names: list[str]
    informative_mean: float | None
    noise_mean: float | None
    ratio: float | None
    top_feature: str
    metrics: Metrics
    attention: AttentionReport


def append_noise_features(dataset: Dataset, n_noise: int, seed: int) -> Dataset:
    """Uniform-[0,1] features independent of the labels, named noise_00.."""
    if n_noise < 0:
        raise PreconditionError("n_noise must be >= 0")
    if n_noise == 0:
        return dataset
    rng = np.random.default_rng(seed)
    noise = rng.uniform(0.0, 1.0, (len(dataset), n_noise))
    names = tuple(f"noise_{i:02d}" for i in range(n_noise))
    return Dataset(
        schema=FeatureSchema(names=dataset.schema.names + names),
        X=np.concatenate([dataset.X, noise], axis=1),
        y=dataset.y,
        embeddings=dataset.embeddings,
    )


def noise_experiment(dataset: Dataset, n_noise: int, train_config: TrainConfig,
                     model_config: SelectorNetConfig,
                     norm_policy: str = "train_fold",
                     informative_prefix: str = INFORMATIVE_PREFIX) -> PerturbReport:
    """Retrain with ``n_noise`` appended noise features and report per-feature
    mean absolute attention over a held-out fifth of the rows."""
    extended = append_noise_features(dataset, n_noise, seed=train_config.seed)
    folds = kfold_split(len(extended), 5, train_config.seed)
    val_idx = folds[0]
    train_idx = np.setdiff1d(np.arange(len(extended)), val_idx)
    normalized, _ = normalize(
        extended, norm_policy,
        fit_indices=train_idx if norm_policy == "train_fold" else None,
    )
    config = replace(model_config, feature_dim=len(extended.schema),
                     embed_dim=extended.embed_dim)
    model = SelectorNet(config)
    model, _ = train(model, normalized.take(train_idx), normalized.take(val_idx),
                     train_config)

    X_val, emb_val, y_val = normalized.take(val_idx)
    metrics = evaluate(model, X_val, emb_val, y_val, train_config.threshold)
    _, traces = model.forward(X_val, emb_val, training=False)
    report = attention_report(traces, feature_names=extended.schema.names)
    mean_abs = np.abs(report.attn_all).mean(axis=0)

    names = list(extended.schema.names)
    noise_names = names[len(names) - n_noise:] if n_noise else []
    informative_names = [n for n in dataset.schema.names
                         if n.startswith(informative_prefix)]

    informative_mean = None
    noise_mean = None
    ratio = None
    if informative_names:
        inf_idx = [names.index(n) for n in informative_names]
        informative_mean = float(mean_abs[inf_idx].mean())
    if noise_names:
        noise_idx = [names.index(n) for n in noise_names]
        noise_mean = float(mean_abs[noise_idx].mean())
    if informative_mean is not None and noise_mean is not None and noise_mean > 0:
        ratio = informative_mean / noise_mean

    return PerturbReport(
        feature_names=names,
        mean_abs_attention=mean_abs,
        noise_names=noise_names,
        informative_names=informative_names,
        informative_mean=informative_mean,
        noise_mean=noise_mean,
        ratio=ratio,
        top_feature=names[int(np.argmax(mean_abs))],
        metrics=metrics,
        attention=report,
    )
