"""Binary logistic training objective with an optional group-decorrelation term.

The regularized loss adds, with weight ``mu``, the negative cross-entropy
between the predicted probability and the sensitive group indicator.  Pushing
that term down makes scores uninformative about group membership, which is
what trades accuracy for a better disparate-impact ratio.  ``mu = 0`` recovers
plain logistic boosting through the same code path, bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import expit

from .errors import ContractError, ParameterError

VANILLA_LOGISTIC = "vanilla_logistic"
FAIR_LOGISTIC = "fair_logistic"

OBJECTIVE_KINDS = (VANILLA_LOGISTIC, FAIR_LOGISTIC)

# Smallest admissible log argument; keeps the loss finite at saturated scores.
LOG_FLOOR = 1e-15

# Open-interval bounds for probabilities: nearest doubles to 0 and 1.
_P_LO = np.nextafter(0.0, 1.0)
_P_HI = np.nextafter(1.0, 0.0)


def sigmoid(raw_score):
    """Logistic function, elementwise, clamped to the open interval (0, 1).

    Saturated inputs map to the nearest representable double inside (0, 1)
    instead of exactly 0 or 1, so downstream gradients and log terms never
    see a degenerate probability.
    """
    p = expit(raw_score)
    return np.clip(p, _P_LO, _P_HI)


@dataclass(frozen=True)
class ObjectiveConfig:
    """Which loss to optimize and how strongly to decorrelate from the group.

    ``mu`` must lie in [0, 1].  The vanilla kind is the mu = 0 special case
    and rejects any other value so a config can never be ambiguous.
    """

    mu: float = 0.0
    kind: str = FAIR_LOGISTIC

    def __post_init__(self):
        if self.kind not in OBJECTIVE_KINDS:
            raise ParameterError(
                f"unknown objective kind {self.kind!r}; expected one of {OBJECTIVE_KINDS}"
            )
        mu = float(self.mu)
        if not np.isfinite(mu) or not 0.0 <= mu <= 1.0:
            raise ParameterError(f"mu must lie in [0, 1], got {self.mu!r}")
        object.__setattr__(self, "mu", mu)
        if self.kind == VANILLA_LOGISTIC and mu != 0.0:
            raise ParameterError("vanilla_logistic requires mu == 0")


class GradHess(NamedTuple):
    """Per-instance first and second derivatives of the regularized loss."""

    grad: np.ndarray
    hess: np.ndarray


def _as_float_vector(name: str, values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ContractError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def _check_indicator(name: str, arr: np.ndarray) -> None:
    if not np.all((arr == 0.0) | (arr == 1.0)):
        raise ContractError(f"{name} must contain only 0 and 1")


def grad_hess(
    raw_scores, labels, sensitive, config: ObjectiveConfig
) -> GradHess:
    """Gradient and hessian of the regularized loss at the given raw scores.

    With p = sigmoid(raw): grad = (p - y) + mu * (s - p) and
    hess = (1 - mu) * p * (1 - p).  At mu = 1 every hessian is exactly zero,
    which is why training then requires a positive l2 penalty.
    """
    raw = _as_float_vector("raw_scores", raw_scores)
    y = _as_float_vector("labels", labels)
    s = _as_float_vector("sensitive", sensitive)
    if not (raw.shape == y.shape == s.shape):
        raise ContractError(
            f"length mismatch: raw_scores {raw.shape}, labels {y.shape}, sensitive {s.shape}"
        )
    if raw.size and not np.all(np.isfinite(raw)):
        raise ContractError("raw_scores must be finite")
    _check_indicator("labels", y)
    _check_indicator("sensitive", s)

    mu = config.mu
    p = sigmoid(raw)
    grad = (p - y) + mu * (s - p)
    hess = (1.0 - mu) * (p * (1.0 - p))
    return GradHess(grad=grad, hess=hess)


def regularized_loss(raw_scores, labels, sensitive, config: ObjectiveConfig) -> float:
    """Total regularized loss over all instances (a sum, not a mean).

    Log arguments are clamped below at LOG_FLOOR so saturated scores yield a
    large finite penalty rather than an infinity.
    """
    raw = _as_float_vector("raw_scores", raw_scores)
    y = _as_float_vector("labels", labels)
    s = _as_float_vector("sensitive", sensitive)
    if not (raw.shape == y.shape == s.shape):
        raise ContractError(
            f"length mismatch: raw_scores {raw.shape}, labels {y.shape}, sensitive {s.shape}"
        )
    if raw.size and not np.all(np.isfinite(raw)):
        raise ContractError("raw_scores must be finite")
    _check_indicator("labels", y)
    _check_indicator("sensitive", s)

    p = sigmoid(raw)
    log_p = np.log(np.maximum(p, LOG_FLOOR))
    log_1p = np.log(np.maximum(1.0 - p, LOG_FLOOR))
    data_term = -np.sum(y * log_p + (1.0 - y) * log_1p)
    group_term = np.sum(s * log_p + (1.0 - s) * log_1p)
    return float(data_term + config.mu * group_term)
