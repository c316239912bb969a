"""Dataset CSV ingestion, min-max normalization, and fold splitting."""

import csv
import re
from dataclasses import dataclass

import numpy as np

from ..errors import DataError, PreconditionError
from ..features.schema import FeatureSchema

_EMB_RE = re.compile(r"^emb_(\d+)$")


@dataclass
class Dataset:
    schema: FeatureSchema
    X: np.ndarray               # (n, F) float64
    y: np.ndarray               # (n,) int, 1 = positive
    embeddings: np.ndarray | None = None  # (n, E) float64

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or self.X.shape[1] != len(self.schema):
            raise DataError(
                f"dataset width {self.X.shape} does not match schema of {len(self.schema)}"
            )
        if self.y.shape != (self.X.shape[0],):
            raise DataError("dataset labels do not align with rows")
        if self.embeddings is not None:
            self.embeddings = np.asarray(self.embeddings, dtype=np.float64)
            if self.embeddings.shape[0] != self.X.shape[0]:
                raise DataError("dataset embeddings do not align with rows")

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def embed_dim(self) -> int:
        return 0 if self.embeddings is None else self.embeddings.shape[1]

    def take(self, indices) -> tuple[np.ndarray, np.ndarray | None, np.ndarray]:
        emb = None if self.embeddings is None else self.embeddings[indices]
        return self.X[indices], emb, self.y[indices]


def load_dataset(path, schema: FeatureSchema | None = None) -> Dataset:
    """Read a feature CSV: schema columns, a ``label`` column, and optional
    contiguous ``emb_0..emb_{E-1}`` columns.  Lines starting with ``#`` are
    generator comments and skipped.  Columns beyond schema/label/emb (such
    as validity flags) are ignored."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if "label" not in header:
        raise DataError(f"{path}: missing required column 'label'")

    emb_cols = sorted(
        ((int(m.group(1)), h) for h in header if (m := _EMB_RE.match(h))),
    )
    emb_names = [h for _, h in emb_cols]
    if [i for i, _ in emb_cols] != list(range(len(emb_cols))):
        raise DataError(f"{path}: embedding columns must be emb_0..emb_{{E-1}} with no gaps")

    reserved = set(emb_names) | {"label"}
    if schema is None:
        feature_names = [h for h in header if h not in reserved]
        schema = FeatureSchema(names=tuple(feature_names))
    else:
        present = set(header)
        for name in schema.names:
            if name not in present:
                raise DataError(f"{path}: missing feature column {name!r}")

    col_of = {h: i for i, h in enumerate(header)}
    feat_idx = [col_of[name] for name in schema.names]
    emb_idx = [col_of[name] for name in emb_names]
    label_idx = col_of["label"]

    n = len(rows) - 1
    X = np.empty((n, len(schema)))
    y = np.empty(n, dtype=np.int64)
    emb = np.empty((n, len(emb_idx))) if emb_idx else None

    def cell(row_no, row, idx, col_name):
        try:
            return float(row[idx])
        except (ValueError, IndexError):
            raise DataError(
                f"{path}: non-numeric value in column {col_name!r} at data row {row_no}"
            ) from None

    for r, row in enumerate(rows[1:], start=1):
        for c, name in enumerate(schema.names):
            X[r - 1, c] = cell(r, row, feat_idx[c], name)
        label = cell(r, row, label_idx, "label")
        if label not in (0.0, 1.0):
            raise DataError(f"{path}: label outside {{0,1}} at data row {r}")
        y[r - 1] = int(label)
        for c, name in enumerate(emb_names):
            emb[r - 1, c] = cell(r, row, emb_idx[c], name)

    return Dataset(schema=schema, X=X, y=y, embeddings=emb)


def save_dataset(dataset: Dataset, path, header_comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        emb_names = [f"emb_{i}" for i in range(dataset.embed_dim)]
        writer.writerow(list(dataset.schema.names) + emb_names + ["label"])
        for i in range(len(dataset)):
            row = [repr(float(v)) for v in dataset.X[i]]
            if dataset.embeddings is not None:
                row += [repr(float(v)) for v in dataset.embeddings[i]]
            row.append(str(int(dataset.y[i])))
            writer.writerow(row)


@dataclass
class NormStats:
    """Per-feature min/max from the fit rows, plus the fitting policy."""

    k_min: np.ndarray
    k_max: np.ndarray
    policy: str

    def apply(self, X: np.ndarray) -> np.ndarray:
        span = self.k_max - self.k_min
        safe = np.where(span > 0, span, 1.0)
        out = (X - self.k_min) / safe
        out = np.where(span > 0, out, 0.0)
        return np.clip(out, 0.0, 1.0)

    def save(self, path, feature_names) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["feature", "k_min", "k_max", "policy"])
            for name, lo, hi in zip(feature_names, self.k_min, self.k_max):
                writer.writerow([name, repr(float(lo)), repr(float(hi)), self.policy])

    @classmethod
    def load(cls, path) -> "NormStats":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][:3] != ["feature", "k_min", "k_max"]:
            raise DataError(f"{path}: not a normalization stats file")
        body = rows[1:]
        return cls(
            k_min=np.array([float(r[1]) for r in body]),
            k_max=np.array([float(r[2]) for r in body]),
            policy=body[0][3] if body else "global",
        )


def normalize(dataset: Dataset, policy: str = "train_fold",
              fit_indices=None) -> tuple[Dataset, NormStats]:
    """Min-max scale every feature to [0, 1].

    ``global`` fits the statistics on all rows; ``train_fold`` fits on the
    given indices only and clamps everything else into [0, 1].  A constant
    feature maps to 0.
    """
    if policy not in ("global", "train_fold"):
        raise PreconditionError(f"unknown normalization policy {policy!r}")
    if policy == "global":
        fit_indices = np.arange(len(dataset))
    else:
        if fit_indices is None or len(fit_indices) == 0:
            raise PreconditionError("train_fold normalization needs non-empty fit indices")
        fit_indices = np.asarray(fit_indices)
    fit = dataset.X[fit_indices]
    stats = NormStats(k_min=fit.min(axis=0), k_max=fit.max(axis=0), policy=policy)
    return (
        Dataset(schema=dataset.schema, X=stats.apply(dataset.X), y=dataset.y,
                embeddings=dataset.embeddings),
        stats,
    )


def kfold_split(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Seeded shuffle into k disjoint covering folds with sizes within 1."""
    if k < 2:
        raise PreconditionError("kfold_split needs k >= 2")
    if n < k:
        raise PreconditionError(f"kfold_split: {n} rows cannot fill {k} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(fold) for fold in np.array_split(perm, k)]
