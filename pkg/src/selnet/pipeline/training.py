"""Minibatch training loop, k-fold protocol, and the linear reference model."""

from dataclasses import dataclass, replace

import numpy as np

from ..core import autodiff as ad
from ..core.autodiff import Var, backward
from ..core.layers import LinearLayer, bce_loss
from ..core.optim import OptimizerState, cosine_lr, sgd_step, zero_grads
from ..errors import PreconditionError, ShapeError, StateError, TrainingDivergedError
from ..model.attention import AttentionReport, attention_report
from ..model.network import SelectorNet, SelectorNetConfig
from .data import Dataset, NormStats, kfold_split, normalize
from .metrics import Metrics, evaluate


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.4637
    epochs: int = 584
    batch_size: int = 128
    early_stop_patience: int = 50  # 0 disables early stopping
    threshold: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0:
            raise PreconditionError("lr must be positive")
        if self.epochs < 0:
            raise PreconditionError("epochs must be >= 0")
        if self.batch_size < 2:
            raise PreconditionError("batch_size must be >= 2 (batch norm)")
        if self.early_stop_patience < 0:
            raise PreconditionError("early_stop_patience must be >= 0")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    lr: float


def train(model, train_data, val_data, config: TrainConfig, log=None):
    """Train in place and return (model at its best validation loss, history).

    ``train_data`` and ``val_data`` are (X, embeddings-or-None, labels)
    triples of already-normalized rows.  Each epoch reshuffles with the
    config seed's generator, walks minibatches of ``batch_size`` (a final
    fragment of fewer than 2 rows is dropped), and steps plain gradient
    descent at the cosine-annealed rate for that epoch.  ``log`` is called
    with each EpochRecord as it is produced.
    """
    X_tr, emb_tr, y_tr = train_data
    X_val, emb_val, y_val = val_data
    n = X_tr.shape[0]
    history: list[EpochRecord] = []
    if config.epochs == 0:
        return model, history

    rng = np.random.default_rng(config.seed)
    best_val = np.inf
    best_state = None
    bad_epochs = 0

    for epoch in range(config.epochs):
        lr = cosine_lr(OptimizerState(config.lr, epoch, config.epochs))
        perm = rng.permutation(n)
        loss_sum = 0.0
        rows_seen = 0
        for start in range(0, n, config.batch_size):
            idx = perm[start:start + config.batch_size]
            if idx.size < 2:
                continue
            zero_grads(model.parameters())
            emb_batch = None if emb_tr is None else emb_tr[idx]
            loss, _, _ = model.loss_graph(X_tr[idx], emb_batch, y_tr[idx], training=True)
            value = float(loss.value)
            if not np.isfinite(value):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {start // config.batch_size}, "
                    f"lr {lr:.6g}"
                )
            model.backward()
            sgd_step(model.parameters(), lr)
            loss_sum += value * idx.size
            rows_seen += idx.size

        train_loss = loss_sum / rows_seen if rows_seen else float("nan")
        if X_val.shape[0] > 0:
            val_prob, _ = model.forward(X_val, emb_val, training=False)
            val_loss = bce_loss(val_prob, y_val.astype(np.float64))
        else:
            val_loss = float("nan")
        record = EpochRecord(epoch=epoch, train_loss=train_loss,
                             val_loss=val_loss, lr=lr)
        history.append(record)
        if log is not None:
            log(record)

        if np.isfinite(val_loss) and val_loss < best_val:
            best_val = val_loss
            best_state = model.get_state()
            bad_epochs = 0
        else:
            bad_epochs += 1
            if config.early_stop_patience and bad_epochs >= config.early_stop_patience:
                break

    if best_state is not None:
        model.set_state(best_state)
    return model, history


class LogisticModel:
    """Single linear layer plus sigmoid; the sanity reference model.

    Implements the same protocol as the selector network (loss_graph /
    backward / parameters / state) so the training loop is shared.
    """

    def __init__(self, feature_dim: int, embed_dim: int = 0, seed: int = 0):
        self.feature_dim = feature_dim
        self.embed_dim = embed_dim
        rng = np.random.default_rng(seed)
        self.linear = LinearLayer(feature_dim + embed_dim, 1, rng)
        self._pending_loss = None

    def _stack(self, X, embed):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.feature_dim:
            raise ShapeError(
                f"logistic forward: data width {X.shape} vs feature_dim {self.feature_dim}"
            )
        if self.embed_dim == 0:
            return X
        if embed is None:
            raise ShapeError(f"logistic forward: embedding of width {self.embed_dim} required")
        return np.concatenate([X, np.asarray(embed, dtype=np.float64)], axis=1)

    def forward(self, X, embed=None, training: bool = False):
        with ad.no_grad():
            prob = ad.sigmoid(self.linear(Var(self._stack(X, embed))))
        return prob.value.reshape(-1), None

    def loss_graph(self, X, embed, labels, training: bool = True, update_stats: bool = True):
        labels = np.asarray(labels, dtype=np.float64).reshape(-1, 1)
        prob = ad.sigmoid(self.linear(Var(self._stack(X, embed))))
        loss = ad.bce_loss_graph(prob, labels)
        self._pending_loss = loss
        return loss, prob.value.reshape(-1), None

    def backward(self):
        if self._pending_loss is None:
            raise StateError("backward called without a preceding loss_graph forward")
        backward(self._pending_loss)
        self._pending_loss = None

    def parameters(self):
        return [(f"linear.{name}", p) for name, p in self.linear.parameters()]

    def zero_grad(self):
        zero_grads(self.parameters())

    def get_state(self):
        return {name: p.value.copy() for name, p in self.parameters()}

    def set_state(self, state):
        for name, p in self.parameters():
            p.value = np.asarray(state[name], dtype=np.float64).copy()


def logistic_baseline(train_data, val_data, config: TrainConfig,
                      feature_dim: int, embed_dim: int, seed: int | None = None):
    """Train the linear reference on the same loop; returns (model, metrics, history)."""
    model = LogisticModel(feature_dim, embed_dim, seed=config.seed if seed is None else seed)
    model, history = train(model, train_data, val_data, config)
    X_val, emb_val, y_val = val_data
    metrics = evaluate(model, X_val, emb_val, y_val, config.threshold)
    return model, metrics, history


@dataclass
class FoldResult:
    fold: int
    model: object
    metrics: Metrics
    history: list[EpochRecord]
    norm_stats: NormStats
    val_indices: np.ndarray
    attention: AttentionReport | None


def cross_validate(dataset: Dataset, k: int, train_config: TrainConfig,
                   build_model, norm_policy: str = "train_fold",
                   split_seed: int | None = None,
                   collect_attention: bool = False,
                   epoch_log=None) -> list[FoldResult]:
    """K-fold protocol: for each fold, fit normalization per policy, train a
    fresh model from ``build_model(fold_index, feature_dim, embed_dim)``, and
    evaluate on the held-out fold.  Fold seeds derive from the config seed
    plus the fold index, so folds are independent and reproducible."""
    folds = kfold_split(len(dataset), k, train_config.seed if split_seed is None else split_seed)
    results = []
    all_indices = np.arange(len(dataset))
    for fold_index, val_idx in enumerate(folds):
        train_idx = np.setdiff1d(all_indices, val_idx)
        normalized, stats = normalize(
            dataset,
            norm_policy,
            fit_indices=train_idx if norm_policy == "train_fold" else None,
        )
        fold_config = replace(train_config, seed=train_config.seed + fold_index)
        model = build_model(fold_index, len(dataset.schema), dataset.embed_dim)
        log = None if epoch_log is None else (
            lambda rec, _fold=fold_index: epoch_log(_fold, rec)
        )
        model, history = train(
            model, normalized.take(train_idx), normalized.take(val_idx), fold_config,
            log=log,
        )
        X_val, emb_val, y_val = normalized.take(val_idx)
        fold_metrics = evaluate(model, X_val, emb_val, y_val, train_config.threshold)
        report = None
        if collect_attention and isinstance(model, SelectorNet):
            _, traces = model.forward(X_val, emb_val, training=False)
            report = attention_report(traces, feature_names=dataset.schema.names)
        results.append(
            FoldResult(fold=fold_index, model=model, metrics=fold_metrics,
                       history=history, norm_stats=stats, val_indices=val_idx,
                       attention=report)
        )
    return results


def selector_builder(base_config: SelectorNetConfig):
    """Model factory for cross_validate: per-fold seed offset on one config."""

    def build(fold_index: int, feature_dim: int, embed_dim: int) -> SelectorNet:
        config = replace(base_config, feature_dim=feature_dim, embed_dim=embed_dim,
                         seed=base_config.seed + fold_index)
        return SelectorNet(config)

    return build


def logistic_builder(seed: int):
    def build(fold_index: int, feature_dim: int, embed_dim: int) -> LogisticModel:
        return LogisticModel(feature_dim, embed_dim, seed=seed + fold_index)

    return build
