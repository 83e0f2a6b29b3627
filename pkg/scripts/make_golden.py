"""Regenerate tests/golden/reference_run.txt.

This script trains the golden-file model with a deliberately naive,
self-contained boosting implementation: plain Python floats, O(n) recounts
per candidate threshold, no code shared with the package except the dataset
generator (both sides must see identical inputs).  The engine test suite
compares structures and leaf weights against the file this writes, so CI
never needs this script or any third-party learner.

Run from the repository root:

    python3 scripts/make_golden.py
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fairboost.bench import synthetic_biased  # noqa: E402  (dataset only)

# Keep in sync with tests/test_booster.py::TestGoldenReference
DATASET = dict(n_rows=150, n_features=5, seed=77)
NUM_ROUNDS = 10
LEARNING_RATE = 0.3
MAX_DEPTH = 3
REG_LAMBDA = 1.0
GAMMA = 0.0
MIN_CHILD_WEIGHT = 1e-3
MIN_SPLIT_GAIN = 0.0
BASE_SCORE = 0.0

OUT_PATH = Path(__file__).resolve().parent.parent / "tests" / "golden" / "reference_run.txt"


def best_split(rows, xs, grads, hesses):
    """Exhaustive scan; ties keep the lowest feature, then lowest threshold."""
    g_total = 0.0
    h_total = 0.0
    for i in rows:
        g_total += grads[i]
        h_total += hesses[i]

    def part(g, h):
        return g * g / (h + REG_LAMBDA)

    best = None  # (gain, feature, threshold)
    n_features = len(xs[0])
    for f in range(n_features):
        values = sorted(set(xs[i][f] for i in rows))
        for lo, hi in zip(values, values[1:]):
            thr = lo + (hi - lo) / 2.0
            if thr <= lo:
                thr = hi
            gl = hl = 0.0
            for i in rows:
                if xs[i][f] < thr:
                    gl += grads[i]
                    hl += hesses[i]
            gr = g_total - gl
            hr = h_total - hl
            if hl < MIN_CHILD_WEIGHT or hr < MIN_CHILD_WEIGHT:
                continue
            gain = 0.5 * (part(gl, hl) + part(gr, hr) - part(g_total, h_total)) - GAMMA
            if not gain > MIN_SPLIT_GAIN:
                continue
            if best is None or gain > best[0]:
                best = (gain, f, thr)
    return best


def grow(rows, xs, grads, hesses, depth, nodes):
    node_id = len(nodes)
    nodes.append(None)
    found = best_split(rows, xs, grads, hesses) if depth < MAX_DEPTH and len(rows) >= 2 else None
    if found is None:
        g = sum(grads[i] for i in rows)
        h = sum(hesses[i] for i in rows)
        nodes[node_id] = ("leaf", -g / (h + REG_LAMBDA))
        return node_id
    _gain, f, thr = found
    left_rows = [i for i in rows if xs[i][f] < thr]
    right_rows = [i for i in rows if not xs[i][f] < thr]
    left_id = grow(left_rows, xs, grads, hesses, depth + 1, nodes)
    right_id = grow(right_rows, xs, grads, hesses, depth + 1, nodes)
    nodes[node_id] = ("split", f, thr, left_id, right_id)
    return node_id


def tree_value(nodes, row):
    node = nodes[0]
    while node[0] == "split":
        _, f, thr, left, right = node
        node = nodes[left] if row[f] < thr else nodes[right]
    return node[1]


def main() -> None:
    data = synthetic_biased(**DATASET)
    xs = [[float(v) for v in row] for row in data.features]
    ys = [int(v) for v in data.labels]
    n = len(xs)

    scores = [BASE_SCORE] * n
    trees = []
    for _ in range(NUM_ROUNDS):
        grads = []
        hesses = []
        for i in range(n):
            p = 1.0 / (1.0 + math.exp(-scores[i]))
            grads.append(p - ys[i])
            hesses.append(p * (1.0 - p))
        nodes = []
        grow(list(range(n)), xs, grads, hesses, 0, nodes)
        trees.append(nodes)
        for i in range(n):
            scores[i] = scores[i] + LEARNING_RATE * tree_value(nodes, xs[i])

    lines = [
        "fairboost-model v1",
        "kind=vanilla_logistic",
        "mu=0.0",
        f"num_rounds={NUM_ROUNDS}",
        f"learning_rate={LEARNING_RATE!r}",
        f"base_score_raw={BASE_SCORE!r}",
        f"max_depth={MAX_DEPTH}",
        f"lambda={REG_LAMBDA!r}",
        f"gamma={GAMMA!r}",
        f"min_child_weight={MIN_CHILD_WEIGHT!r}",
        f"min_split_gain={MIN_SPLIT_GAIN!r}",
        'feature_names=["x0", "x1", "x2", "x3", "x4"]',
    ]
    for index, nodes in enumerate(trees):
        lines.append(f"tree {index}")
        for node_id, node in enumerate(nodes):
            if node[0] == "split":
                _, f, thr, left, right = node
                lines.append(f"node {node_id} split {f} {thr!r} {left} {right}")
            else:
                lines.append(f"leaf {node_id} {node[1]!r}")

    OUT_PATH.parent.mkdir(parents=True, exist_ok=True)
    OUT_PATH.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {OUT_PATH} ({len(trees)} trees)")


if __name__ == "__main__":
    main()
