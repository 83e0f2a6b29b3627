"""Independent reference computations the tests check the engine against.

Everything here is written directly from the definitions with plain loops
and ``float`` arithmetic where practical, on purpose: these functions must
not share code paths with the package.
"""

from __future__ import annotations

import math
from typing import List, Optional, Tuple

import numpy as np


def instance_losses(raw_scores, labels, sensitive, mu: float) -> np.ndarray:
    """Per-instance regularized loss, clamping log arguments at 1e-15."""
    out = np.empty(len(raw_scores), dtype=np.float64)
    for i, (z, y, s) in enumerate(zip(raw_scores, labels, sensitive)):
        p = 1.0 / (1.0 + math.exp(-float(z)))
        log_p = math.log(max(p, 1e-15))
        log_1p = math.log(max(1.0 - p, 1e-15))
        data = -(y * log_p + (1.0 - y) * log_1p)
        group = s * log_p + (1.0 - s) * log_1p
        out[i] = data + mu * group
    return out


def fd_centered(fn, x: np.ndarray, step: float) -> np.ndarray:
    """Elementwise centered difference of a vectorized scalar map."""
    return (fn(x + step) - fn(x - step)) / (2.0 * step)


def leaf_objective(grad_sum: float, hess_sum: float, reg_lambda: float, gamma: float) -> float:
    """Second-order objective value of one leaf at its optimal weight."""
    return -0.5 * grad_sum * grad_sum / (hess_sum + reg_lambda) + gamma


def brute_force_best_split(
    features: np.ndarray,
    grads: np.ndarray,
    hesses: np.ndarray,
    ids: np.ndarray,
    max_depth_unused: int = 0,
    reg_lambda: float = 1.0,
    gamma: float = 0.0,
    min_child_weight: float = 1e-3,
    min_split_gain: float = 0.0,
) -> Optional[Tuple[int, float, float]]:
    """Enumerate every (feature, midpoint) partition and return the best.

    Returns (feature, threshold, gain) under the same acceptance rule the
    engine documents: gain must strictly exceed min_split_gain and both
    children need hessian mass of at least min_child_weight.  Ties keep the
    lower feature index, then the lower threshold.
    """
    ids = np.asarray(ids)
    g_total = float(sum(float(grads[i]) for i in ids))
    h_total = float(sum(float(hesses[i]) for i in ids))

    def part(g: float, h: float) -> float:
        return g * g / (h + reg_lambda)

    best: Optional[Tuple[int, float, float]] = None
    n_features = features.shape[1]
    for f in range(n_features):
        values = sorted(set(float(features[i, f]) for i in ids))
        for lo, hi in zip(values, values[1:]):
            # same documented midpoint rule as the engine, so thresholds
            # compare exactly rather than to the last ulp
            thr = lo + (hi - lo) / 2.0
            if thr <= lo:
                thr = hi
            gl = hl = 0.0
            for i in ids:
                if features[i, f] < thr:
                    gl += float(grads[i])
                    hl += float(hesses[i])
            gr = g_total - gl
            hr = h_total - hl
            if hl < min_child_weight or hr < min_child_weight:
                continue
            denom_ok = (hl + reg_lambda) > 0 and (hr + reg_lambda) > 0 and (h_total + reg_lambda) > 0
            if not denom_ok:
                continue
            gain = 0.5 * (part(gl, hl) + part(gr, hr) - part(g_total, h_total)) - gamma
            if not math.isfinite(gain) or not gain > min_split_gain:
                continue
            if best is None or gain > best[2]:
                best = (f, thr, gain)
    return best


def route_node_members(tree, features: np.ndarray) -> dict:
    """Map node id -> list of row indices reaching that node."""
    members = {0: list(range(features.shape[0]))}
    order = [0]
    while order:
        node_id = order.pop()
        node = tree.nodes[node_id]
        if not hasattr(node, "feature"):
            continue
        left: List[int] = []
        right: List[int] = []
        for i in members[node_id]:
            if features[i, node.feature] < node.threshold:
                left.append(i)
            else:
                right.append(i)
        members[node.left] = left
        members[node.right] = right
        order.extend((node.left, node.right))
    return members
