"""Command-line entry point.

Exit codes: 0 success, 1 data/domain errors, 2 usage errors.  Diagnostics
go to stderr; machine-readable output goes to files only.  When --seed is
omitted, the SELNET_SEED environment variable is used, then 42.
"""

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import SelnetError
from .features.extract import extract_features, load_observation
from .features.glcm import GlcmConfig
from .features.io import (
    detections_for,
    load_detections_csv,
    load_physio_csv,
    write_feature_csv,
)
from .features.schema import canonical_schema
from .model.attention import attention_report, write_attention_csv
from .model.checkpoint import load_checkpoint, save_checkpoint
from .model.blocks import FAB_VARIANTS, RESBLOCK_VARIANTS, SELECTOR_VARIANTS
from .model.network import SelectorNetConfig
from .pipeline.data import NormStats, load_dataset, normalize, save_dataset
from .pipeline.metrics import METRIC_NAMES, aggregate_metrics, evaluate
from .pipeline.perturb import noise_experiment
from .pipeline.rundir import (
    create_run_dir,
    write_history_csv,
    write_manifest,
    write_metrics_csv,
)
from .pipeline.synth import INFORMATIVE_PREFIX, embed_stub, synth_generate
from .pipeline.training import (
    TrainConfig,
    cross_validate,
    logistic_builder,
    selector_builder,
)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def _seed_or_env(value) -> int:
    if value is not None:
        return value
    return int(os.environ.get("SELNET_SEED", "42"))


def _add_train_flags(p: argparse.ArgumentParser):
    p.add_argument("--lr", type=float, default=0.4637, help="initial learning rate (default %(default)s)")
    p.add_argument("--epochs", type=int, default=584, help="training epochs (default %(default)s)")
    p.add_argument("--batch-size", type=int, default=128, help="minibatch size (default %(default)s)")
    p.add_argument("--patience", type=int, default=50,
                   help="early-stopping patience in epochs, 0 disables (default %(default)s)")
    p.add_argument("--threshold", type=float, default=0.5,
                   help="decision threshold on the output probability (default %(default)s)")
    p.add_argument("--norm", choices=("train_fold", "global"), default="train_fold",
                   help="min-max normalization policy (default %(default)s)")
    p.add_argument("--steps", type=int, default=3, help="selection steps (default %(default)s)")
    p.add_argument("--single-thread", action="store_true",
                   help="force deterministic serial fold training (the default and only mode)")


def _model_config(args, feature_dim, embed_dim, seed) -> SelectorNetConfig:
    return SelectorNetConfig(
        feature_dim=feature_dim,
        steps=args.steps,
        embed_dim=embed_dim,
        selector_variant=getattr(args, "selector_variant", "full"),
        fab_variant=getattr(args, "fab_variant", "attention"),
        resblock_variant=getattr(args, "resblock_variant", "residual"),
        seed=seed,
    )


def _epoch_logger(quiet: bool):
    if quiet:
        return None

    def log(fold, rec):
        print(
            f"fold {fold} epoch {rec.epoch}: train {rec.train_loss:.4f} "
            f"val {rec.val_loss:.4f} lr {rec.lr:.4f}",
            file=sys.stderr,
        )

    return log


def _write_single_metrics(path, metrics, threshold):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tp", "tn", "fp", "fn", *METRIC_NAMES, "threshold"])
        writer.writerow([
            metrics.tp, metrics.tn, metrics.fp, metrics.fn,
            *("" if getattr(metrics, m) is None else repr(getattr(metrics, m))
              for m in METRIC_NAMES),
            repr(threshold),
        ])


def _normalized_for_checkpoint(args):
    dataset = load_dataset(args.data)
    if args.norm_stats:
        stats = NormStats.load(args.norm_stats)
        X = stats.apply(dataset.X)
        from .pipeline.data import Dataset

        return Dataset(schema=dataset.schema, X=X, y=dataset.y,
                       embeddings=dataset.embeddings)
    print("note: no --norm-stats given; normalizing with global min/max of "
          "the provided data", file=sys.stderr)
    normalized, _ = normalize(dataset, "global")
    return normalized


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    seed = _seed_or_env(args.seed)
    dataset, comment = synth_generate(args.n, args.informative, args.nuisance,
                                      seed=seed, embed_dim=args.embed_dim)
    save_dataset(dataset, args.out, header_comment=comment)
    print(f"wrote {len(dataset)} rows x {len(dataset.schema)} features to {args.out}",
          file=sys.stderr)
    return 0


def cmd_extract(args) -> int:
    schema = canonical_schema()
    physio = load_physio_csv(args.physio)
    boxes = load_detections_csv(args.detections) if args.detections else {}
    glcm_config = GlcmConfig(levels=args.glcm_levels)
    image_dir = Path(args.images)
    mask_dir = Path(args.masks)
    images = sorted(
        p for p in image_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not images:
        raise SelnetError(f"no images found under {image_dir}")

    embeddings = {}
    if args.embeddings:
        with open(args.embeddings, newline="") as fh:
            rows = list(csv.reader(fh))
        header = rows[0]
        emb_cols = [i for i, h in enumerate(header) if h.startswith("emb_")]
        for row in rows[1:]:
            embeddings[row[0]] = [float(row[i]) for i in emb_cols]
        embed_dim = len(emb_cols)
    else:
        embed_dim = args.embed_dim

    results = []
    labels = {}
    have_labels = True
    seed = _seed_or_env(args.seed)
    for image_path in images:
        image_id = image_path.stem
        if image_id not in physio:
            raise SelnetError(f"no physiological record for image {image_id!r}")
        mask_path = None
        for suffix in IMAGE_SUFFIXES:
            candidate = mask_dir / f"{image_id}{suffix}"
            if candidate.exists():
                mask_path = candidate
                break
        if mask_path is None:
            raise SelnetError(f"no mask found for image {image_id!r} under {mask_dir}")
        obs = load_observation(image_path, mask_path)
        record, label = physio[image_id]
        result = extract_features(obs, record, detections_for(obs, boxes, image_id),
                                  schema, glcm_config)
        results.append((image_id, result))
        if label is None:
            have_labels = False
        else:
            labels[image_id] = label
        if not args.embeddings and embed_dim:
            embeddings[image_id] = list(embed_stub(image_id, embed_dim, seed=seed))

    write_feature_csv(args.out, schema, results,
                      labels=labels if have_labels else None,
                      embeddings=embeddings if embed_dim else None,
                      embed_dim=embed_dim)
    if not have_labels:
        print("note: physio CSV has no label column; feature CSV written without "
              "labels (explain-only)", file=sys.stderr)
    print(f"extracted {len(results)} observations to {args.out}", file=sys.stderr)
    return 0


def cmd_train(args) -> int:
    seed = _seed_or_env(args.seed)
    dataset = load_dataset(args.data)
    run_dir = create_run_dir(args.out)
    train_config = TrainConfig(lr=args.lr, epochs=args.epochs, batch_size=args.batch_size,
                               early_stop_patience=args.patience,
                               threshold=args.threshold, seed=seed)
    base = _model_config(args, len(dataset.schema), dataset.embed_dim, seed)
    results = cross_validate(
        dataset, args.folds, train_config, selector_builder(base),
        norm_policy=args.norm, split_seed=seed, collect_attention=True,
        epoch_log=_epoch_logger(args.quiet),
    )

    write_metrics_csv(run_dir / "metrics.csv", results)
    write_history_csv(run_dir / "history.csv", results)
    attn_rows = np.concatenate([r.attention.attn_all for r in results], axis=0)
    first = results[0].attention
    write_attention_csv(
        run_dir / "attention.csv",
        type(first)(attn_all=attn_rows, attn_step=[], feature_names=first.feature_names),
    )
    for r in results:
        save_checkpoint(r.model, run_dir / f"fold{r.fold}.ckpt")
        r.norm_stats.save(run_dir / f"norm_fold{r.fold}.csv", dataset.schema.names)
    manifest = {
        "command": "train", "version": __version__, "data": args.data,
        "folds": args.folds, "seed": seed, "split_seed": seed,
        "fold_seeds": ",".join(str(seed + r.fold) for r in results),
        "norm_policy": args.norm, "lr": train_config.lr,
        "epochs": train_config.epochs, "batch_size": train_config.batch_size,
        "early_stop_patience": train_config.early_stop_patience,
        "threshold": train_config.threshold, "steps": base.steps,
        "embed_dim": dataset.embed_dim, "feature_dim": len(dataset.schema),
        "selector_variant": base.selector_variant, "fab_variant": base.fab_variant,
        "resblock_variant": base.resblock_variant,
        "single_thread": True,
    }
    write_manifest(run_dir / "manifest.txt", manifest)
    summary = aggregate_metrics([r.metrics for r in results])
    mean_acc = summary["accuracy"][0]
    print(f"run {run_dir}: mean accuracy "
          f"{'n/a' if mean_acc is None else f'{mean_acc:.4f}'}", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    model = load_checkpoint(args.checkpoint)
    normalized = _normalized_for_checkpoint(args)
    X, emb, y = normalized.take(np.arange(len(normalized)))
    metrics = evaluate(model, X, emb, y, args.threshold)
    _write_single_metrics(args.out, metrics, args.threshold)
    print(f"evaluated {len(normalized)} rows: accuracy "
          f"{'n/a' if metrics.accuracy is None else f'{metrics.accuracy:.4f}'}",
          file=sys.stderr)
    return 0


def cmd_explain(args) -> int:
    model = load_checkpoint(args.checkpoint)
    normalized = _normalized_for_checkpoint(args)
    X, emb, _ = normalized.take(np.arange(len(normalized)))
    _, traces = model.forward(X, emb, training=False)
    report = attention_report(traces, feature_names=normalized.schema.names)
    write_attention_csv(args.out, report)
    print(f"wrote attention for {len(normalized)} rows to {args.out}", file=sys.stderr)
    return 0


def cmd_ablate(args) -> int:
    seed = _seed_or_env(args.seed)
    dataset = load_dataset(args.data)
    run_dir = create_run_dir(args.out)
    train_config = TrainConfig(lr=args.lr, epochs=args.epochs, batch_size=args.batch_size,
                               early_stop_patience=args.patience,
                               threshold=args.threshold, seed=seed)
    variants = [("no_change", {})]
    variants.append(("resblock_linear_relu", {"resblock_variant": "linear_relu"}))
    for sv in ("concat", "add", "hadamard", "stage1_only", "stage2_only"):
        variants.append((f"selector_{sv}", {"selector_variant": sv}))
    variants.append(("fab_concat_linear_relu", {"fab_variant": "concat_linear_relu"}))

    rows = []
    for name, overrides in variants:
        base = SelectorNetConfig(
            feature_dim=len(dataset.schema), steps=args.steps,
            embed_dim=dataset.embed_dim, seed=seed, **overrides,
        )
        results = cross_validate(
            dataset, args.folds, train_config, selector_builder(base),
            norm_policy=args.norm, split_seed=seed,
            epoch_log=_epoch_logger(args.quiet),
        )
        summary = aggregate_metrics([r.metrics for r in results])
        rows.append((name, summary))
        acc = summary["accuracy"][0]
        print(f"variant {name}: accuracy "
              f"{'n/a' if acc is None else f'{acc:.4f}'}", file=sys.stderr)

    with open(run_dir / "ablation.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["variant"]
        for m in METRIC_NAMES:
            header += [f"{m}_mean", f"{m}_std"]
        writer.writerow(header)
        for name, summary in rows:
            out = [name]
            for m in METRIC_NAMES:
                mean, std = summary[m]
                out += ["" if mean is None else repr(mean),
                        "" if std is None else repr(std)]
            writer.writerow(out)
    write_manifest(run_dir / "manifest.txt", {
        "command": "ablate", "version": __version__, "data": args.data,
        "folds": args.folds, "seed": seed, "lr": train_config.lr,
        "epochs": train_config.epochs, "batch_size": train_config.batch_size,
        "norm_policy": args.norm, "steps": args.steps,
    })
    return 0


def cmd_perturb(args) -> int:
    seed = _seed_or_env(args.seed)
    dataset = load_dataset(args.data)
    run_dir = create_run_dir(args.out)
    train_config = TrainConfig(lr=args.lr, epochs=args.epochs, batch_size=args.batch_size,
                               early_stop_patience=args.patience,
                               threshold=args.threshold, seed=seed)
    model_config = _model_config(args, len(dataset.schema), dataset.embed_dim, seed)
    report = noise_experiment(dataset, args.noise, train_config, model_config,
                              norm_policy=args.norm,
                              informative_prefix=args.informative_prefix)

    with open(run_dir / "perturb_attention.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "mean_abs_attention", "group"])
        for name, value in zip(report.feature_names, report.mean_abs_attention):
            if name in report.noise_names:
                group = "noise"
            elif name in report.informative_names:
                group = "informative"
            else:
                group = "original"
            writer.writerow([name, repr(float(value)), group])
    write_attention_csv(run_dir / "attention.csv", report.attention)
    summary = {
        "command": "perturb", "version": __version__, "data": args.data,
        "noise_features": args.noise, "seed": seed,
        "informative_prefix": args.informative_prefix,
        "top_feature": report.top_feature,
        "informative_mean_attention": report.informative_mean,
        "noise_mean_attention": report.noise_mean,
        "informative_to_noise_ratio": report.ratio,
        "val_accuracy": report.metrics.accuracy,
        "lr": train_config.lr, "epochs": train_config.epochs,
        "batch_size": train_config.batch_size, "norm_policy": args.norm,
    }
    write_manifest(run_dir / "summary.txt", summary)
    print(f"perturb: top feature {report.top_feature}, ratio "
          f"{'n/a' if report.ratio is None else f'{report.ratio:.3f}'}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selnet",
        description="Tongue-feature extraction and attentive tabular diagnosis toolkit",
    )
    parser.add_argument("--version", action="version", version=f"selnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a planted-signal synthetic dataset")
    p.add_argument("--n", type=int, required=True, help="number of rows (>= 100)")
    p.add_argument("--informative", type=int, default=5,
                   help="informative features (default %(default)s)")
    p.add_argument("--nuisance", type=int, default=15,
                   help="label-independent features (default %(default)s)")
    p.add_argument("--embed-dim", type=int, default=10,
                   help="stub embedding width (default %(default)s)")
    p.add_argument("--seed", type=int, default=None,
                   help="generator seed (default: SELNET_SEED or 42)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="extract tongue features from images and masks")
    p.add_argument("--images", required=True, help="directory of RGB images (png/jpg)")
    p.add_argument("--masks", required=True,
                   help="directory of mask images (same stem, nonzero = tongue)")
    p.add_argument("--physio", required=True, help="physiological indicators CSV")
    p.add_argument("--detections", default=None,
                   help="texture detection boxes CSV (image_id,class,x_min,y_min,x_max,y_max)")
    p.add_argument("--embeddings", default=None,
                   help="CSV of precomputed embeddings (image_id,emb_0..); overrides the stub")
    p.add_argument("--embed-dim", type=int, default=10,
                   help="stub embedding width when --embeddings is absent, 0 disables "
                        "(default %(default)s)")
    p.add_argument("--glcm-levels", type=int, default=64,
                   help="gray levels for texture statistics (default %(default)s)")
    p.add_argument("--seed", type=int, default=None,
                   help="stub embedding seed (default: SELNET_SEED or 42)")
    p.add_argument("--out", required=True, help="output feature CSV path")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="k-fold training run")
    p.add_argument("--data", required=True, help="feature CSV (schema + label [+ emb_*])")
    p.add_argument("--folds", type=int, default=5, help="cross-validation folds (default %(default)s)")
    p.add_argument("--seed", type=int, default=None,
                   help="master seed for split/model/shuffle (default: SELNET_SEED or 42)")
    p.add_argument("--selector-variant", choices=SELECTOR_VARIANTS, default="full",
                   help="selector block form (default %(default)s)")
    p.add_argument("--fab-variant", choices=FAB_VARIANTS, default="attention",
                   help="fusion block form (default %(default)s)")
    p.add_argument("--resblock-variant", choices=RESBLOCK_VARIANTS, default="residual",
                   help="residual block form (default %(default)s)")
    _add_train_flags(p)
    p.add_argument("--quiet", action="store_true", help="suppress the per-epoch log line")
    p.add_argument("--out", required=True, help="run directory to create (must not exist)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a feature CSV")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--norm-stats", default=None,
                   help="normalization stats CSV saved by train (norm_fold*.csv)")
    p.add_argument("--threshold", type=float, default=0.5,
                   help="decision threshold (default %(default)s)")
    p.add_argument("--out", required=True, help="metrics CSV path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("explain", help="write the per-sample attention report")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--norm-stats", default=None,
                   help="normalization stats CSV saved by train (norm_fold*.csv)")
    p.add_argument("--out", required=True, help="attention CSV path")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("ablate", help="train every block-variant configuration and compare")
    p.add_argument("--data", required=True)
    p.add_argument("--folds", type=int, default=5, help="folds per variant (default %(default)s)")
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: SELNET_SEED or 42)")
    _add_train_flags(p)
    p.add_argument("--quiet", action="store_true", help="suppress the per-epoch log line")
    p.add_argument("--out", required=True, help="run directory to create (must not exist)")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("perturb", help="noise-perturbation interpretability experiment")
    p.add_argument("--data", required=True)
    p.add_argument("--noise", type=int, default=30,
                   help="appended uniform noise features (default %(default)s)")
    p.add_argument("--informative-prefix", default=INFORMATIVE_PREFIX,
                   help="feature-name prefix marking planted signal (default %(default)s)")
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: SELNET_SEED or 42)")
    _add_train_flags(p)
    p.add_argument("--quiet", action="store_true", help="suppress the per-epoch log line")
    p.add_argument("--out", required=True, help="run directory to create (must not exist)")
    p.set_defaults(func=cmd_perturb)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SelnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
