"""Per-feature attention computed from step traces.

For each step, the selection weight of a feature is S1 + S2 and the step's
contribution to the decision is the sum over the entries of its x_dec; the
step attention is their product, and the overall attention is the sum over
steps.  Everything here is a pure function of recorded traces, so reports
can be recomputed and audited after the fact.
"""

import csv
from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError, ShapeError
from .network import StepTrace


@dataclass
class AttentionReport:
    attn_all: np.ndarray          # (B, F)
    attn_step: list[np.ndarray]   # per step, each (B, F)
    feature_names: list[str] | None = None


def step_attention(trace: StepTrace) -> np.ndarray:
    """(S1 + S2) scaled per sample by the summed decision contribution."""
    selection = trace.s1 + trace.s2
    contribution = trace.x_dec.sum(axis=-1)
    return selection * contribution[:, None]


def attention_report(traces: list[StepTrace], feature_names=None) -> AttentionReport:
    if not traces:
        raise PreconditionError("attention report needs at least one step trace")
    shape = traces[0].s1.shape
    for t in traces:
        if t.s1.shape != shape or t.s2.shape != shape or t.x_dec.shape != shape:
            raise ShapeError("attention report: inconsistent trace shapes")
    per_step = [step_attention(t) for t in traces]
    attn_all = per_step[0].copy()
    for a in per_step[1:]:
        attn_all += a
    if feature_names is not None and len(feature_names) != shape[1]:
        raise ShapeError(
            f"attention report: {len(feature_names)} names for {shape[1]} features"
        )
    return AttentionReport(attn_all=attn_all, attn_step=per_step,
                           feature_names=list(feature_names) if feature_names else None)


def write_attention_csv(path, report: AttentionReport) -> None:
    """One row per sample, one column per feature, header of feature names."""
    names = report.feature_names
    if names is None:
        names = [f"f{i}" for i in range(report.attn_all.shape[1])]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in report.attn_all:
            writer.writerow([repr(float(v)) for v in row])
