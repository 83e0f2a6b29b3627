"""Accuracy and disparate-impact reporting for binary group-labeled data.

Disparate impact is the raw ratio of positive-prediction rates,
minority (s = 0) over majority (s = 1).  It is deliberately not symmetrized;
a value below 1 means the minority group receives fewer positives.  When the
majority rate is zero the ratio is undefined and reported as such.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractError, ParameterError

REPORT_COLUMNS = (
    "threshold",
    "accuracy",
    "pos_rate_minority",
    "pos_rate_majority",
    "di",
    "n_minority",
    "n_majority",
)

CSV_HEADER = ",".join(REPORT_COLUMNS)

UNDEFINED = "undefined"


def _as_binary(name: str, values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ContractError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr = arr.astype(np.int64, copy=False) if arr.dtype.kind in "iub" else arr
    if arr.dtype.kind == "f":
        if not np.all((arr == 0.0) | (arr == 1.0)):
            raise ContractError(f"{name} must contain only 0 and 1")
        arr = arr.astype(np.int64)
    elif not np.all((arr == 0) | (arr == 1)):
        raise ContractError(f"{name} must contain only 0 and 1")
    return arr


def binarize(probabilities, threshold: float) -> np.ndarray:
    """1 where probability >= threshold, else 0.  Threshold is strict (0, 1)."""
    thr = float(threshold)
    if not 0.0 < thr < 1.0:
        raise ParameterError(f"threshold must lie strictly in (0, 1), got {threshold!r}")
    p = np.asarray(probabilities, dtype=np.float64)
    if p.ndim != 1:
        raise ContractError(f"probabilities must be one-dimensional, got shape {p.shape}")
    if p.size and (not np.all(np.isfinite(p)) or p.min() < 0.0 or p.max() > 1.0):
        raise ContractError("probabilities must lie in [0, 1]")
    return (p >= thr).astype(np.int64)


def accuracy(predictions, labels) -> float:
    """Fraction of agreeing entries."""
    pred = _as_binary("predictions", predictions)
    y = _as_binary("labels", labels)
    if pred.shape != y.shape:
        raise ContractError(f"length mismatch: predictions {pred.shape}, labels {y.shape}")
    if pred.size == 0:
        raise ContractError("accuracy of an empty prediction vector is undefined")
    return float(np.mean(pred == y))


@dataclass(frozen=True)
class GroupRates:
    """Positive-prediction rates per group and their ratio."""

    pos_rate_minority: float
    pos_rate_majority: float
    disparate_impact: Optional[float]
    n_minority: int
    n_majority: int


def disparate_impact(predictions, sensitive) -> GroupRates:
    """Group positive rates and the minority-over-majority ratio."""
    pred = _as_binary("predictions", predictions)
    s = _as_binary("sensitive", sensitive)
    if pred.shape != s.shape:
        raise ContractError(f"length mismatch: predictions {pred.shape}, sensitive {s.shape}")
    minority = pred[s == 0]
    majority = pred[s == 1]
    if minority.size == 0 or majority.size == 0:
        raise ContractError("disparate impact needs at least one row in each group")
    rate_min = float(np.mean(minority))
    rate_maj = float(np.mean(majority))
    di = rate_min / rate_maj if rate_maj > 0.0 else None
    return GroupRates(
        pos_rate_minority=rate_min,
        pos_rate_majority=rate_maj,
        disparate_impact=di,
        n_minority=int(minority.size),
        n_majority=int(majority.size),
    )


@dataclass(frozen=True)
class FairnessReport:
    """Accuracy plus group rates at one decision threshold."""

    threshold: float
    accuracy: float
    pos_rate_minority: float
    pos_rate_majority: float
    disparate_impact: Optional[float]
    n_minority: int
    n_majority: int

    def as_csv_row(self) -> str:
        di = UNDEFINED if self.disparate_impact is None else repr(float(self.disparate_impact))
        return ",".join(
            [
                repr(float(self.threshold)),
                repr(float(self.accuracy)),
                repr(float(self.pos_rate_minority)),
                repr(float(self.pos_rate_majority)),
                di,
                str(int(self.n_minority)),
                str(int(self.n_majority)),
            ]
        )

    def as_kv_record(self) -> str:
        di = UNDEFINED if self.disparate_impact is None else repr(float(self.disparate_impact))
        parts = [
            f"threshold={float(self.threshold)!r}",
            f"accuracy={float(self.accuracy)!r}",
            f"pos_rate_minority={float(self.pos_rate_minority)!r}",
            f"pos_rate_majority={float(self.pos_rate_majority)!r}",
            f"di={di}",
            f"n_minority={int(self.n_minority)}",
            f"n_majority={int(self.n_majority)}",
        ]
        return " ".join(parts)


def evaluate(model, dataset, threshold: float = 0.5) -> FairnessReport:
    """Score a model on a dataset and report accuracy and group rates."""
    from .booster import predict_proba

    proba = predict_proba(model, dataset.features)
    predictions = binarize(proba, threshold)
    rates = disparate_impact(predictions, dataset.sensitive)
    return FairnessReport(
        threshold=float(threshold),
        accuracy=accuracy(predictions, dataset.labels),
        pos_rate_minority=rates.pos_rate_minority,
        pos_rate_majority=rates.pos_rate_majority,
        disparate_impact=rates.disparate_impact,
        n_minority=rates.n_minority,
        n_majority=rates.n_majority,
    )
