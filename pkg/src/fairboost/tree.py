"""Exact greedy regression trees on per-instance gradient and hessian sums.

A tree is grown depth-first.  At every node each feature column is scanned in
sorted order and every midpoint between consecutive distinct values is scored
with the second-order gain formula; the best candidate wins with ties broken
toward the lower feature index and then the lower threshold.  Rows route left
when ``value < threshold``, so equal values go right.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from .errors import ContractError, ModelStructureError, ParameterError, TrainingError
from .objective import GradHess

# Children must conserve the parent's gradient and hessian sums this tightly.
SUM_MATCH_TOL = 1e-6


@dataclass(frozen=True)
class TreeParams:
    """Growth limits and regularization constants for a single tree."""

    max_depth: int = 4
    reg_lambda: float = 1.0
    gamma: float = 0.0
    min_child_weight: float = 1e-3
    min_split_gain: float = 0.0

    def __post_init__(self):
        if isinstance(self.max_depth, bool) or not isinstance(self.max_depth, (int, np.integer)):
            raise ParameterError(f"max_depth must be an integer, got {self.max_depth!r}")
        if self.max_depth < 0:
            raise ParameterError(f"max_depth must be >= 0, got {self.max_depth}")
        object.__setattr__(self, "max_depth", int(self.max_depth))
        for name in ("reg_lambda", "gamma", "min_child_weight", "min_split_gain"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value < 0.0:
                raise ParameterError(f"{name} must be finite and >= 0, got {getattr(self, name)!r}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class SplitNode:
    feature: int
    threshold: float
    left: int
    right: int


@dataclass(frozen=True)
class LeafNode:
    weight: float


Node = Union[SplitNode, LeafNode]


@dataclass
class Tree:
    """Nodes stored in preorder; ids are list indices and the root is 0."""

    nodes: List[Node]

    def n_leaves(self) -> int:
        return sum(1 for node in self.nodes if isinstance(node, LeafNode))

    def depth(self) -> int:
        """Number of edges on the longest root-to-leaf path."""
        deepest = 0
        stack = [(0, 0)]
        while stack:
            node_id, depth = stack.pop()
            node = self.nodes[node_id]
            if isinstance(node, SplitNode):
                stack.append((node.left, depth + 1))
                stack.append((node.right, depth + 1))
            else:
                deepest = max(deepest, depth)
        return deepest


@dataclass(frozen=True)
class SplitCandidate:
    """Winning split for one node, with the child sums that scored it."""

    feature: int
    threshold: float
    gain: float
    left_grad_sum: float
    left_hess_sum: float
    right_grad_sum: float
    right_hess_sum: float


def leaf_weight(grad_sum: float, hess_sum: float, reg_lambda: float) -> float:
    """Optimal leaf output -G / (H + lambda)."""
    denom = hess_sum + reg_lambda
    if not denom > 0.0:
        raise TrainingError(
            f"degenerate leaf: hessian sum {hess_sum} plus lambda {reg_lambda} is not positive"
        )
    return -grad_sum / denom


def split_gain(
    parent: Tuple[float, float],
    left: Tuple[float, float],
    right: Tuple[float, float],
    reg_lambda: float,
    gamma: float,
) -> float:
    """Objective reduction from splitting a node with the given (G, H) sums."""
    pg, ph = (float(v) for v in parent)
    lg, lh = (float(v) for v in left)
    rg, rh = (float(v) for v in right)
    if abs((lg + rg) - pg) > SUM_MATCH_TOL or abs((lh + rh) - ph) > SUM_MATCH_TOL:
        raise ContractError(
            "child sums do not match parent: "
            f"grad {lg + rg} vs {pg}, hess {lh + rh} vs {ph}"
        )
    for h in (ph, lh, rh):
        if not h + reg_lambda > 0.0:
            raise ContractError(f"hessian sum {h} plus lambda {reg_lambda} must be positive")
    score = lambda g, h: g * g / (h + reg_lambda)  # noqa: E731
    return 0.5 * (score(lg, lh) + score(rg, rh) - score(pg, ph)) - gamma


def _scan_columns(values, grads, hesses, params: TreeParams):
    """Score every candidate midpoint over per-feature sorted rows.

    ``values``, ``grads`` and ``hesses`` all have shape (n_features, m) where
    row j holds the node's instances ordered by feature j.  Returns the
    winning (feature, threshold, gain, left/right sums) or None.
    """
    d, m = values.shape
    if m < 2:
        return None
    cum_g = np.cumsum(grads, axis=1)
    cum_h = np.cumsum(hesses, axis=1)
    total_g = cum_g[:, -1:]
    total_h = cum_h[:, -1:]
    left_g = cum_g[:, :-1]
    left_h = cum_h[:, :-1]
    right_g = total_g - left_g
    right_h = total_h - left_h

    lo = values[:, :-1]
    hi = values[:, 1:]
    valid = (hi > lo) & (left_h >= params.min_child_weight) & (right_h >= params.min_child_weight)

    lam = params.reg_lambda
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = 0.5 * (
            left_g * left_g / (left_h + lam)
            + right_g * right_g / (right_h + lam)
            - total_g * total_g / (total_h + lam)
        ) - params.gamma
    gain = np.where(valid & np.isfinite(gain), gain, -np.inf)

    # First maximum in C order implements the tie-break: lower feature index
    # first, then lower threshold (column order follows sorted values).
    flat = int(np.argmax(gain))
    best_gain = float(gain.reshape(-1)[flat])
    if not best_gain > params.min_split_gain:
        return None
    f, k = divmod(flat, m - 1)

    threshold = lo[f, k] + (hi[f, k] - lo[f, k]) / 2.0
    if threshold <= lo[f, k]:
        # Adjacent doubles can round the midpoint onto the left value, which
        # would send the left block right; the upper value keeps it exact.
        threshold = hi[f, k]

    return (
        int(f),
        float(threshold),
        best_gain,
        float(left_g[f, k]),
        float(left_h[f, k]),
        float(right_g[f, k]),
        float(right_h[f, k]),
    )


def _checked_ids(data, instance_set) -> np.ndarray:
    ids = np.asarray(instance_set, dtype=np.intp)
    if ids.ndim != 1 or ids.size == 0:
        raise ContractError("instance set must be a non-empty 1-d index array")
    if ids.min() < 0 or ids.max() >= data.n_rows:
        raise ContractError("instance set contains out-of-range row indices")
    if np.unique(ids).size != ids.size:
        raise ContractError("instance set contains duplicate row indices")
    return ids


def _checked_gh(data, gh: GradHess) -> Tuple[np.ndarray, np.ndarray]:
    grad = np.asarray(gh.grad, dtype=np.float64)
    hess = np.asarray(gh.hess, dtype=np.float64)
    if grad.shape != (data.n_rows,) or hess.shape != (data.n_rows,):
        raise ContractError(
            f"gradient/hessian arrays must have one entry per dataset row ({data.n_rows})"
        )
    if not (np.all(np.isfinite(grad)) and np.all(np.isfinite(hess))):
        raise ContractError("gradients and hessians must be finite")
    return grad, hess


def _sorted_orders(data, ids: np.ndarray) -> np.ndarray:
    """(n_features, m) matrix of absolute row ids, row j sorted by feature j.

    The sort is stable, so ties keep the order of ``ids`` itself; stable
    partitioning during growth preserves exactly this property for children.
    """
    sub = data.features_by_column()[:, ids]
    return ids[np.argsort(sub, axis=1, kind="stable")]


def find_best_split(data, instance_set, gh: GradHess, params: TreeParams) -> Optional[SplitCandidate]:
    """Best split over all features for one node, or None if nothing qualifies."""
    ids = _checked_ids(data, instance_set)
    grad, hess = _checked_gh(data, gh)
    order = _sorted_orders(data, ids)
    columns = data.features_by_column()
    values = columns[np.arange(columns.shape[0])[:, None], order]
    found = _scan_columns(values, grad[order], hess[order], params)
    if found is None:
        return None
    f, thr, gain, lg, lh, rg, rh = found
    return SplitCandidate(
        feature=f,
        threshold=thr,
        gain=gain,
        left_grad_sum=lg,
        left_hess_sum=lh,
        right_grad_sum=rg,
        right_hess_sum=rh,
    )


def build_tree(data, instance_set, gh: GradHess, params: TreeParams) -> Tree:
    """Grow one tree depth-first until max_depth or no split qualifies."""
    ids = _checked_ids(data, instance_set)
    grad, hess = _checked_gh(data, gh)
    columns = data.features_by_column()
    d = columns.shape[0]
    row_selector = np.arange(d)[:, None]

    nodes: List[Node] = []

    def grow(order: np.ndarray, depth: int) -> int:
        node_id = len(nodes)
        nodes.append(None)  # reserve the preorder slot
        member_ids = order[0]
        g_total = float(grad[member_ids].sum())
        h_total = float(hess[member_ids].sum())

        found = None
        if depth < params.max_depth and order.shape[1] >= 2:
            values = columns[row_selector, order]
            found = _scan_columns(values, grad[order], hess[order], params)

        if found is None:
            nodes[node_id] = LeafNode(weight=leaf_weight(g_total, h_total, params.reg_lambda))
            return node_id

        f, thr, _gain, *_sums = found
        keep = columns[f][order] < thr
        m_left = int(np.count_nonzero(keep[0]))
        m_right = order.shape[1] - m_left
        if m_left == 0 or m_right == 0:
            raise TrainingError("split produced an empty child")
        left_order = order[keep].reshape(d, m_left)
        right_order = order[~keep].reshape(d, m_right)

        left_id = grow(left_order, depth + 1)
        right_id = grow(right_order, depth + 1)
        nodes[node_id] = SplitNode(feature=f, threshold=thr, left=left_id, right=right_id)
        return node_id

    grow(_sorted_orders(data, ids), 0)
    return Tree(nodes=nodes)


def _checked_feature(node: SplitNode, width: int) -> int:
    if node.feature < 0 or node.feature >= width:
        raise ModelStructureError(
            f"split references feature {node.feature} but rows have {width} values"
        )
    return node.feature


def predict_tree(tree: Tree, row) -> float:
    """Route a single row to its leaf and return the leaf weight."""
    x = np.asarray(row, dtype=np.float64)
    if x.ndim != 1:
        raise ContractError(f"row must be one-dimensional, got shape {x.shape}")
    node = tree.nodes[0]
    while isinstance(node, SplitNode):
        f = _checked_feature(node, x.shape[0])
        node = tree.nodes[node.left] if x[f] < node.threshold else tree.nodes[node.right]
    return node.weight


def predict_tree_matrix(tree: Tree, rows: np.ndarray) -> np.ndarray:
    """Leaf weights for every row of a (m, n_features) matrix."""
    x = np.asarray(rows, dtype=np.float64)
    if x.ndim != 2:
        raise ContractError(f"rows must be a 2-d matrix, got shape {x.shape}")
    out = np.empty(x.shape[0], dtype=np.float64)
    stack = [(0, np.arange(x.shape[0]))]
    while stack:
        node_id, idx = stack.pop()
        node = tree.nodes[node_id]
        if isinstance(node, LeafNode):
            out[idx] = node.weight
            continue
        f = _checked_feature(node, x.shape[1])
        mask = x[idx, f] < node.threshold
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))
    return out


def validate_tree_structure(nodes: List[Node], n_features: Optional[int] = None) -> None:
    """Reject node lists that do not describe one well-formed rooted tree."""
    if not nodes:
        raise ModelStructureError("tree has no nodes")
    n = len(nodes)
    ref_count = [0] * n
    for node_id, node in enumerate(nodes):
        if isinstance(node, SplitNode):
            for child in (node.left, node.right):
                if child < 0 or child >= n:
                    raise ModelStructureError(
                        f"node {node_id} references missing child {child}"
                    )
                ref_count[child] += 1
            if node.left == node.right:
                raise ModelStructureError(f"node {node_id} uses one child twice")
            if n_features is not None and not 0 <= node.feature < n_features:
                raise ModelStructureError(
                    f"node {node_id} splits on feature {node.feature} "
                    f"but the model has {n_features} features"
                )
        elif not isinstance(node, LeafNode):
            raise ModelStructureError(f"node {node_id} has unknown type {type(node)!r}")
    if ref_count[0] != 0:
        raise ModelStructureError("root node 0 is referenced as a child")
    bad = [i for i in range(1, n) if ref_count[i] != 1]
    if bad:
        raise ModelStructureError(
            f"nodes {bad} are not referenced exactly once; tree is disconnected or tangled"
        )
    seen = set()
    stack = [0]
    while stack:
        node_id = stack.pop()
        if node_id in seen:
            raise ModelStructureError(f"node {node_id} is reachable along two paths")
        seen.add(node_id)
        node = nodes[node_id]
        if isinstance(node, SplitNode):
            stack.extend((node.left, node.right))
    if len(seen) != n:
        unreachable = sorted(set(range(n)) - seen)
        raise ModelStructureError(f"nodes {unreachable} are unreachable from the root")
