"""Threshold-sweep evaluation of scored rankings against labels.

A sample is predicted positive when its score is >= the threshold;
thresholds sweep the distinct scores.  AUC is the trapezoid area under
the ROC curve, which equals the concordant-pair fraction with ties
counted half.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError
from .serialize import write_json


@dataclass(frozen=True)
class CurvePoint:
    """Confusion-derived rates at one decision threshold."""

    threshold: float
    fpr: float
    tpr: float
    precision: float
    recall: float


def _validate(scores, labels):
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    if s.ndim != 1 or y.shape != s.shape:
        raise DataError(
            f"scores and labels must be equal-length 1-D arrays, got "
            f"{s.shape} and {y.shape}"
        )
    if s.size == 0:
        raise DataError("cannot sweep thresholds over zero samples")
    if not np.all(np.isfinite(s)):
        raise DataError("scores contain non-finite values")
    return s, y


def _sweep(s: np.ndarray, y: np.ndarray):
    """Cumulative true/false positives at each distinct threshold,
    descending, under the score >= threshold rule."""
    order = np.argsort(-s, kind="stable")
    s = s[order]
    y = y[order]
    # Last index of each tie group marks the cumulative counts once the
    # whole group is predicted positive.
    distinct = np.flatnonzero(np.diff(s) != 0.0)
    last = np.concatenate([distinct, [s.size - 1]])
    tp = np.cumsum(y)[last].astype(float)
    fp = np.cumsum(~y)[last].astype(float)
    return s[last], tp, fp


def roc(scores, labels):
    """ROC curve and its AUC.

    Returns (points, auc).  Points are sorted by ascending threshold and
    include a (fpr 0, tpr 0) anchor at threshold +inf, where precision is
    1.0 by the empty-prediction convention.  Requires both classes.
    """
    s, y = _validate(scores, labels)
    pos = float(y.sum())
    neg = float(s.size - pos)
    if pos == 0.0 or neg == 0.0:
        raise DataError("ROC needs at least one positive and one negative label")
    thresholds, tp, fp = _sweep(s, y)
    fpr = fp / neg
    tpr = tp / pos
    auc = float(np.trapezoid(np.concatenate([[0.0], tpr]),
                             np.concatenate([[0.0], fpr])))
    points = [CurvePoint(threshold=math.inf, fpr=0.0, tpr=0.0,
                         precision=1.0, recall=0.0)]
    for t, tpv, fpv in zip(thresholds, tp, fp):
        predicted = tpv + fpv
        points.append(CurvePoint(
            threshold=float(t),
            fpr=float(fpv / neg),
            tpr=float(tpv / pos),
            precision=float(tpv / predicted),
            recall=float(tpv / pos),
        ))
    points.reverse()  # ascending threshold
    return points, auc


def pr_curve(scores, labels):
    """Precision-recall points at each distinct threshold, ascending.

    The lowest threshold predicts everything positive, so recall ends at
    1 there.  Requires at least one positive label.
    """
    s, y = _validate(scores, labels)
    pos = float(y.sum())
    if pos == 0.0:
        raise DataError("a precision-recall curve needs at least one positive label")
    thresholds, tp, fp = _sweep(s, y)
    points = [
        CurvePoint(
            threshold=float(t),
            fpr=float(fpv / (s.size - pos)) if s.size > pos else 0.0,
            tpr=float(tpv / pos),
            precision=float(tpv / (tpv + fpv)),
            recall=float(tpv / pos),
        )
        for t, tpv, fpv in zip(thresholds, tp, fp)
    ]
    points.reverse()
    return points


def write_curve_csv(points: Sequence[CurvePoint], path) -> None:
    """CSV export; float cells use repr so they round-trip exactly."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("threshold,fpr,tpr,precision,recall\n")
        for p in points:
            handle.write(",".join([
                repr(p.threshold), repr(p.fpr), repr(p.tpr),
                repr(p.precision), repr(p.recall),
            ]) + "\n")


def write_summary(path, auc: float, n: int, positives: int, **extra) -> None:
    """Small JSON summary for a scored evaluation."""
    payload = {"auc": auc, "n": n, "positives": positives}
    payload.update(extra)
    write_json(payload, path)
