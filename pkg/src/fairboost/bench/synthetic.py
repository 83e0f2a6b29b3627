"""Deterministic synthetic dataset with a built-in group disparity.

Group membership leaks into the first two features and directly into the
label odds, so a vanilla model picks up the disparity and the decorrelation
penalty has something to remove.  The sensitive bit itself is never a
feature.
"""

from __future__ import annotations

import numpy as np

from ..data import Dataset
from ..errors import DataError, ParameterError
from ..objective import sigmoid


def synthetic_biased(
    n_rows: int = 500,
    n_features: int = 8,
    seed: int = 0,
    majority_fraction: float = 0.65,
    group_shift: float = 0.9,
    group_logit: float = 1.4,
) -> Dataset:
    """Draw a biased binary classification problem.

    Disadvantaged rows (s = 0) get shifted proxy features and lower label
    odds, which yields a disparate impact well below 1 for an unconstrained
    model.
    """
    if n_rows < 10:
        raise ParameterError(f"n_rows must be >= 10, got {n_rows}")
    if n_features < 2:
        raise ParameterError(f"n_features must be >= 2, got {n_features}")
    if not 0.0 < majority_fraction < 1.0:
        raise ParameterError("majority_fraction must lie strictly in (0, 1)")

    rng = np.random.default_rng(seed)
    s = (rng.random(n_rows) < majority_fraction).astype(np.int64)
    x = rng.normal(size=(n_rows, n_features))
    sign = 2.0 * s - 1.0
    x[:, 0] += group_shift * sign
    x[:, 1] += 0.5 * group_shift * sign

    logit = 0.9 * x[:, 0] + 0.7 * x[:, 1] + group_logit * (s - 0.5) - 0.3
    if n_features >= 3:
        logit = logit - 0.5 * x[:, 2]
    if n_features >= 4:
        logit = logit + 0.3 * x[:, 3]
    y = (rng.random(n_rows) < sigmoid(logit)).astype(np.int64)

    if len(np.unique(s)) < 2 or len(np.unique(y)) < 2:
        raise DataError(
            "synthetic draw produced a single group or a single label; "
            "use more rows or another seed"
        )
    return Dataset(
        features=x,
        labels=y,
        sensitive=s,
        feature_names=tuple(f"x{j}" for j in range(n_features)),
    )
