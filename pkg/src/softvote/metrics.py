"""Evaluation metrics for fused ensembles: NLL, accuracy, confusion matrix.

NLL is the arithmetic mean over samples of -ln(p_true), in nats, with the
true-class probability clipped to [1e-15, 1] inside the log. The lower
clip keeps degenerate inputs finite; the upper clip only absorbs rounding
dust above 1.0 so the loss can never dip below zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    EnsembleInputs,
    LabeledSamples,
    _frozen,
    argmax_classes,
    fuse_majority,
    fuse_weighted,
)
from .errors import (
    AlignmentError,
    DimensionError,
    EmptyInputError,
    LabelRangeError,
    ValidationError,
)

NLL_EPSILON = 1e-15


def _as_fused(fused: np.ndarray) -> np.ndarray:
    f = np.asarray(fused, dtype=np.float64)
    if f.ndim != 2 or f.shape[1] == 0:
        raise DimensionError("fused distributions must form an (S, C) matrix")
    return f


def _as_labels(labels: LabeledSamples | Sequence[int] | np.ndarray) -> np.ndarray:
    if isinstance(labels, LabeledSamples):
        return labels.labels
    y = np.asarray(labels, dtype=np.int64)
    if y.ndim != 1:
        raise DimensionError(f"labels must be 1-D, got shape {y.shape}")
    return y


def _check_pair(fused: np.ndarray, labels) -> tuple[np.ndarray, np.ndarray]:
    f = _as_fused(fused)
    y = _as_labels(labels)
    if f.shape[0] == 0:
        raise EmptyInputError("need at least one sample")
    if y.shape[0] != f.shape[0]:
        raise AlignmentError(f"{y.shape[0]} labels for {f.shape[0]} fused rows")
    if y.min() < 0 or y.max() >= f.shape[1]:
        raise LabelRangeError(f"labels must lie in [0, {f.shape[1]})")
    return f, y


def nll(fused: np.ndarray, labels: LabeledSamples | Sequence[int] | np.ndarray) -> float:
    """Mean negative log likelihood of the true classes, in nats."""
    f, y = _check_pair(fused, labels)
    p = f[np.arange(f.shape[0]), y]
    return float(np.mean(-np.log(np.clip(p, NLL_EPSILON, 1.0))))


def accuracy(fused: np.ndarray, labels: LabeledSamples | Sequence[int] | np.ndarray) -> float:
    """Top-1 accuracy as a percentage; argmax ties break to the lowest index."""
    f, y = _check_pair(fused, labels)
    correct = int(np.sum(argmax_classes(f) == y))
    return 100.0 * correct / f.shape[0]


def confusion_matrix(
    fused: np.ndarray,
    labels: LabeledSamples | Sequence[int] | np.ndarray,
    num_classes: int,
) -> np.ndarray:
    """Row-percentage confusion matrix, shape (C, C).

    Entry [a, p] is the percentage of samples with actual class ``a``
    predicted as ``p``. Rows for classes with no actual samples are all
    zero; every other row sums to 100 within 1e-6.
    """
    if num_classes < 1:
        raise DimensionError("num_classes must be >= 1")
    f, y = _check_pair(fused, labels)
    if f.shape[1] != num_classes:
        raise DimensionError(f"fused rows have {f.shape[1]} classes, expected {num_classes}")
    preds = argmax_classes(f)
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (y, preds), 1)
    totals = counts.sum(axis=1)
    percent = np.zeros((num_classes, num_classes), dtype=np.float64)
    nonzero = totals > 0
    percent[nonzero] = (100.0 * counts[nonzero]) / totals[nonzero, None]
    return percent


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    """One ensemble evaluation: loss, accuracy, and the confusion structure."""

    nll: float
    accuracy_percent: float
    confusion: np.ndarray
    per_class_accuracy: np.ndarray
    classifier_names: tuple[str, ...]
    sample_count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "classifier_names", tuple(self.classifier_names))
        conf = np.array(self.confusion, dtype=np.float64)
        if conf.ndim != 2 or conf.shape[0] != conf.shape[1] or conf.shape[0] == 0:
            raise DimensionError(f"confusion matrix must be square, got shape {conf.shape}")
        per_class = np.array(self.per_class_accuracy, dtype=np.float64)
        if per_class.shape != (conf.shape[0],):
            raise DimensionError("per_class_accuracy length must match the confusion matrix")
        if not np.allclose(per_class, np.diagonal(conf), atol=1e-9, rtol=0.0):
            raise ValidationError("per_class_accuracy must equal the confusion diagonal")
        sums = conf.sum(axis=1)
        ok = (np.abs(sums - 100.0) <= 1e-6) | (sums == 0.0)
        if not np.all(ok):
            row = int(np.argmax(~ok))
            raise ValidationError(f"confusion row {row} sums to {sums[row]!r}, want 100 or 0")
        if not np.isfinite(self.nll) or self.nll < 0.0:
            raise ValidationError(f"nll must be a non-negative real, got {self.nll!r}")
        if not 0.0 <= self.accuracy_percent <= 100.0:
            raise ValidationError(f"accuracy_percent out of [0, 100]: {self.accuracy_percent!r}")
        if self.sample_count < 0:
            raise ValidationError("sample_count must be non-negative")
        object.__setattr__(self, "nll", float(self.nll))
        object.__setattr__(self, "accuracy_percent", float(self.accuracy_percent))
        object.__setattr__(self, "sample_count", int(self.sample_count))
        object.__setattr__(self, "confusion", _frozen(conf))
        object.__setattr__(self, "per_class_accuracy", _frozen(per_class))

    @property
    def num_classes(self) -> int:
        return self.confusion.shape[0]

    @property
    def empty_classes(self) -> tuple[int, ...]:
        """Classes with no actual samples (their confusion rows are all zero)."""
        return tuple(int(i) for i in np.flatnonzero(self.confusion.sum(axis=1) == 0.0))


def evaluate(
    inputs: EnsembleInputs,
    weights: Sequence[float] | np.ndarray | None = None,
) -> EvaluationReport:
    """Fuse and score an ensemble; majority fusion when ``weights`` is None.

    The report's accuracy always equals the sample-weighted mean of the
    confusion diagonal within 1e-9.
    """
    fused = fuse_majority(inputs) if weights is None else fuse_weighted(inputs, weights)
    y = inputs.label_array
    conf = confusion_matrix(fused, y, inputs.num_classes)
    return EvaluationReport(
        nll=nll(fused, y),
        accuracy_percent=accuracy(fused, y),
        confusion=conf,
        per_class_accuracy=np.diagonal(conf).copy(),
        classifier_names=inputs.classifier_names,
        sample_count=inputs.num_samples,
    )
