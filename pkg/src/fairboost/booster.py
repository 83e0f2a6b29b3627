"""Boosting loop, additive prediction and the text model format.

Training is plain second-order boosting: each round evaluates the objective's
gradients and hessians at the current raw scores, fits one tree to them and
adds ``learning_rate`` times the tree's output to the running scores.  The
same accumulation order is used at prediction time so a reloaded model
reproduces training-time scores bit for bit.

Model files are line-oriented UTF-8 text: a version header, a ``key=value``
parameter block, then one block per tree listing its nodes by id.  Floats are
written with ``repr`` so a save/load round trip is exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .data import Dataset, require_both_groups
from .errors import (
    ContractError,
    ModelParseError,
    ModelStructureError,
    ModelVersionError,
    ParameterError,
    TrainingError,
)
from .ioutil import atomic_write_text
from .metrics import accuracy, binarize, disparate_impact
from .objective import ObjectiveConfig, grad_hess, regularized_loss, sigmoid
from .tree import (
    LeafNode,
    Node,
    SplitNode,
    Tree,
    TreeParams,
    build_tree,
    predict_tree_matrix,
    validate_tree_structure,
)

MODEL_HEADER = "fairboost-model v1"

_PARAM_KEYS = (
    "kind",
    "mu",
    "num_rounds",
    "learning_rate",
    "base_score_raw",
    "max_depth",
    "lambda",
    "gamma",
    "min_child_weight",
    "min_split_gain",
    "feature_names",
)


@dataclass(frozen=True)
class BoosterParams:
    """Everything train() needs besides the data."""

    num_rounds: int = 100
    learning_rate: float = 0.1
    base_score_raw: float = 0.0
    objective: ObjectiveConfig = field(default_factory=ObjectiveConfig)
    tree: TreeParams = field(default_factory=TreeParams)

    def __post_init__(self):
        if isinstance(self.num_rounds, bool) or not isinstance(self.num_rounds, (int, np.integer)):
            raise ParameterError(f"num_rounds must be an integer, got {self.num_rounds!r}")
        if self.num_rounds < 1:
            raise ParameterError(f"num_rounds must be >= 1, got {self.num_rounds}")
        object.__setattr__(self, "num_rounds", int(self.num_rounds))
        lr = float(self.learning_rate)
        if not np.isfinite(lr) or not 0.0 < lr <= 1.0:
            raise ParameterError(f"learning_rate must lie in (0, 1], got {self.learning_rate!r}")
        object.__setattr__(self, "learning_rate", lr)
        base = float(self.base_score_raw)
        if not np.isfinite(base):
            raise ParameterError(f"base_score_raw must be finite, got {self.base_score_raw!r}")
        object.__setattr__(self, "base_score_raw", base)
        if self.objective.mu == 1.0 and self.tree.reg_lambda <= 0.0:
            raise ParameterError(
                "mu = 1 zeroes every hessian, so reg_lambda must be positive"
            )


@dataclass(frozen=True)
class TrainRecord:
    """One boosting round: objective value and training metrics at 0.5."""

    round: int
    loss: float
    accuracy: float
    di: Optional[float]


@dataclass(frozen=True)
class TrainLog:
    records: Tuple[TrainRecord, ...]

    def losses(self) -> List[float]:
        return [r.loss for r in self.records]

    def to_csv(self) -> str:
        lines = ["round,loss,accuracy,di"]
        for r in self.records:
            di = "undefined" if r.di is None else repr(float(r.di))
            lines.append(f"{r.round},{float(r.loss)!r},{float(r.accuracy)!r},{di}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class BoosterModel:
    """A trained additive ensemble plus the params that produced it."""

    trees: Tuple[Tree, ...]
    params: BoosterParams
    feature_names: Tuple[str, ...]

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def predict_raw(self, rows) -> np.ndarray:
        return predict_raw(self, rows)

    def predict_proba(self, rows) -> np.ndarray:
        return predict_proba(self, rows)

    def save(self, path) -> None:
        save_model(self, path)


def train(data: Dataset, params: BoosterParams) -> Tuple[BoosterModel, TrainLog]:
    """Fit an ensemble of params.num_rounds trees to the dataset."""
    require_both_groups(data, "training data")
    scores = np.full(data.n_rows, params.base_score_raw, dtype=np.float64)
    all_rows = np.arange(data.n_rows)
    trees: List[Tree] = []
    records: List[TrainRecord] = []
    for t in range(params.num_rounds):
        gh = grad_hess(scores, data.labels, data.sensitive, params.objective)
        try:
            tree = build_tree(data, all_rows, gh, params.tree)
        except TrainingError as exc:
            raise TrainingError(f"round {t}: {exc}") from exc
        trees.append(tree)
        scores = scores + params.learning_rate * predict_tree_matrix(tree, data.features)
        predictions = binarize(sigmoid(scores), 0.5)
        rates = disparate_impact(predictions, data.sensitive)
        records.append(
            TrainRecord(
                round=t,
                loss=regularized_loss(scores, data.labels, data.sensitive, params.objective),
                accuracy=accuracy(predictions, data.labels),
                di=rates.disparate_impact,
            )
        )
    model = BoosterModel(trees=tuple(trees), params=params, feature_names=data.feature_names)
    return model, TrainLog(records=tuple(records))


def _checked_rows(model: BoosterModel, rows) -> np.ndarray:
    x = np.asarray(rows, dtype=np.float64)
    if x.ndim != 2:
        raise ContractError(f"rows must be a 2-d matrix, got shape {x.shape}")
    if x.shape[1] != model.n_features:
        raise ContractError(
            f"rows have {x.shape[1]} columns but the model expects {model.n_features}"
        )
    if x.size and not np.all(np.isfinite(x)):
        raise ContractError("rows must be finite")
    return x


def predict_raw(model: BoosterModel, rows) -> np.ndarray:
    """Additive raw scores; an empty ensemble returns the base score."""
    x = _checked_rows(model, rows)
    scores = np.full(x.shape[0], model.params.base_score_raw, dtype=np.float64)
    for tree in model.trees:
        scores = scores + model.params.learning_rate * predict_tree_matrix(tree, x)
    return scores


def predict_proba(model: BoosterModel, rows) -> np.ndarray:
    return sigmoid(predict_raw(model, rows))


def _serialize(model: BoosterModel) -> str:
    p = model.params
    lines = [
        MODEL_HEADER,
        f"kind={p.objective.kind}",
        f"mu={p.objective.mu!r}",
        f"num_rounds={p.num_rounds}",
        f"learning_rate={p.learning_rate!r}",
        f"base_score_raw={p.base_score_raw!r}",
        f"max_depth={p.tree.max_depth}",
        f"lambda={p.tree.reg_lambda!r}",
        f"gamma={p.tree.gamma!r}",
        f"min_child_weight={p.tree.min_child_weight!r}",
        f"min_split_gain={p.tree.min_split_gain!r}",
        f"feature_names={json.dumps(list(model.feature_names))}",
    ]
    for index, tree in enumerate(model.trees):
        lines.append(f"tree {index}")
        for node_id, node in enumerate(tree.nodes):
            if isinstance(node, SplitNode):
                lines.append(
                    f"node {node_id} split {node.feature} {node.threshold!r} "
                    f"{node.left} {node.right}"
                )
            else:
                lines.append(f"leaf {node_id} {node.weight!r}")
    return "\n".join(lines) + "\n"


def save_model(model: BoosterModel, path) -> None:
    atomic_write_text(path, _serialize(model))


def _parse_int(text: str, offset: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ModelParseError(f"byte {offset}: {what} {text!r} is not an integer") from None


def _parse_float(text: str, offset: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ModelParseError(f"byte {offset}: {what} {text!r} is not a number") from None
    if not np.isfinite(value):
        raise ModelParseError(f"byte {offset}: {what} {text!r} is not finite")
    return value


def _finish_tree(index: int, nodes_by_id, n_features: int) -> Tree:
    if not nodes_by_id:
        raise ModelStructureError(f"tree {index} has no nodes")
    n = len(nodes_by_id)
    missing = [i for i in range(n) if i not in nodes_by_id]
    if missing:
        raise ModelStructureError(
            f"tree {index}: node ids must cover 0..{n - 1}, missing {missing}"
        )
    nodes: List[Node] = [nodes_by_id[i] for i in range(n)]
    try:
        validate_tree_structure(nodes, n_features=n_features)
    except ModelStructureError as exc:
        raise ModelStructureError(f"tree {index}: {exc}") from exc
    return Tree(nodes=nodes)


def load_model(path) -> BoosterModel:
    """Parse a model file; errors carry the byte offset of the bad line."""
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ModelParseError(f"byte {exc.start}: file is not valid UTF-8") from exc

    # Keep (offset, line) pairs; a trailing newline produces one empty tail
    # segment which is not a line.
    lines: List[Tuple[int, str]] = []
    offset = 0
    for segment in text.split("\n"):
        lines.append((offset, segment))
        offset += len(segment.encode("utf-8")) + 1
    if lines and lines[-1][1] == "":
        lines.pop()

    if not lines:
        raise ModelParseError("byte 0: file is empty")
    first_offset, first = lines[0]
    if first != MODEL_HEADER:
        if first.startswith("fairboost-model"):
            raise ModelVersionError(
                f"unsupported model version {first!r}; this build reads {MODEL_HEADER!r}"
            )
        raise ModelParseError(f"byte {first_offset}: not a fairboost model file")

    params_raw = {}
    i = 1
    while i < len(lines) and not lines[i][1].startswith("tree "):
        off, line = lines[i]
        key, sep, value = line.partition("=")
        if not sep:
            raise ModelParseError(f"byte {off}: expected key=value, got {line!r}")
        if key not in _PARAM_KEYS:
            raise ModelParseError(f"byte {off}: unknown parameter {key!r}")
        if key in params_raw:
            raise ModelParseError(f"byte {off}: duplicate parameter {key!r}")
        params_raw[key] = (off, value)
        i += 1
    missing = [k for k in _PARAM_KEYS if k not in params_raw]
    if missing:
        raise ModelParseError(f"model file is missing parameters {missing}")

    def take_int(key: str) -> int:
        off, value = params_raw[key]
        return _parse_int(value, off, key)

    def take_float(key: str) -> float:
        off, value = params_raw[key]
        return _parse_float(value, off, key)

    names_off, names_value = params_raw["feature_names"]
    try:
        names = json.loads(names_value)
    except json.JSONDecodeError:
        raise ModelParseError(f"byte {names_off}: feature_names is not valid JSON") from None
    if not isinstance(names, list) or not all(isinstance(v, str) for v in names):
        raise ModelParseError(f"byte {names_off}: feature_names must be a JSON list of strings")

    try:
        params = BoosterParams(
            num_rounds=take_int("num_rounds"),
            learning_rate=take_float("learning_rate"),
            base_score_raw=take_float("base_score_raw"),
            objective=ObjectiveConfig(mu=take_float("mu"), kind=params_raw["kind"][1]),
            tree=TreeParams(
                max_depth=take_int("max_depth"),
                reg_lambda=take_float("lambda"),
                gamma=take_float("gamma"),
                min_child_weight=take_float("min_child_weight"),
                min_split_gain=take_float("min_split_gain"),
            ),
        )
    except ParameterError as exc:
        raise ModelParseError(f"model file carries invalid parameters: {exc}") from exc

    trees: List[Tree] = []
    current: Optional[dict] = None
    current_index = -1
    while i < len(lines):
        off, line = lines[i]
        tokens = line.split(" ")
        if tokens[0] == "tree":
            if len(tokens) != 2:
                raise ModelParseError(f"byte {off}: malformed tree header {line!r}")
            index = _parse_int(tokens[1], off, "tree index")
            if current is not None:
                trees.append(_finish_tree(current_index, current, len(names)))
                current = None
            if index != len(trees):
                raise ModelParseError(
                    f"byte {off}: tree indices must be sequential, got {index}"
                )
            current = {}
            current_index = index
        elif tokens[0] == "node":
            if current is None:
                raise ModelParseError(f"byte {off}: node record outside any tree block")
            if len(tokens) != 7 or tokens[2] != "split":
                raise ModelParseError(f"byte {off}: malformed node record {line!r}")
            node_id = _parse_int(tokens[1], off, "node id")
            if node_id in current:
                raise ModelParseError(f"byte {off}: duplicate node id {node_id}")
            current[node_id] = SplitNode(
                feature=_parse_int(tokens[3], off, "feature index"),
                threshold=_parse_float(tokens[4], off, "threshold"),
                left=_parse_int(tokens[5], off, "left child"),
                right=_parse_int(tokens[6], off, "right child"),
            )
        elif tokens[0] == "leaf":
            if current is None:
                raise ModelParseError(f"byte {off}: leaf record outside any tree block")
            if len(tokens) != 3:
                raise ModelParseError(f"byte {off}: malformed leaf record {line!r}")
            node_id = _parse_int(tokens[1], off, "node id")
            if node_id in current:
                raise ModelParseError(f"byte {off}: duplicate node id {node_id}")
            current[node_id] = LeafNode(weight=_parse_float(tokens[2], off, "leaf weight"))
        else:
            raise ModelParseError(f"byte {off}: unrecognized record {line!r}")
        i += 1
    if current is not None:
        trees.append(_finish_tree(current_index, current, len(names)))

    return BoosterModel(trees=tuple(trees), params=params, feature_names=tuple(names))
