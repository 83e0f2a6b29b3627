"""Gradient boosted decision trees with a disparate-impact regularizer.

The training objective blends the usual logistic loss with a term that
penalizes correlation between the predicted probability and a binary group
attribute; its weight ``mu`` moves along the accuracy/fairness trade-off.
"""

from .booster import (
    BoosterModel,
    BoosterParams,
    TrainLog,
    TrainRecord,
    load_model,
    predict_proba,
    predict_raw,
    save_model,
    train,
)
from .data import (
    KIND_CATEGORICAL,
    KIND_NUMERIC,
    ROLE_FEATURE,
    ROLE_SENSITIVE,
    ROLE_TARGET,
    ColumnSchema,
    ColumnSpec,
    Dataset,
    load_csv,
    load_schema,
    require_both_groups,
    roundtrip_schema,
    save_schema,
    train_test_split,
    write_csv,
)
from .errors import (
    ContractError,
    DataError,
    FairboostError,
    IngestionError,
    ModelError,
    ModelParseError,
    ModelStructureError,
    ModelVersionError,
    ParameterError,
    SchemaError,
    TrainingError,
)
from .metrics import (
    CSV_HEADER,
    FairnessReport,
    GroupRates,
    accuracy,
    binarize,
    disparate_impact,
    evaluate,
)
from .objective import (
    FAIR_LOGISTIC,
    VANILLA_LOGISTIC,
    GradHess,
    ObjectiveConfig,
    grad_hess,
    regularized_loss,
    sigmoid,
)
from .tree import (
    LeafNode,
    SplitCandidate,
    SplitNode,
    Tree,
    TreeParams,
    build_tree,
    find_best_split,
    leaf_weight,
    predict_tree,
    predict_tree_matrix,
    split_gain,
)

__version__ = "0.1.0"

__all__ = [
    "BoosterModel",
    "BoosterParams",
    "CSV_HEADER",
    "ColumnSchema",
    "ColumnSpec",
    "KIND_CATEGORICAL",
    "KIND_NUMERIC",
    "ROLE_FEATURE",
    "ROLE_SENSITIVE",
    "ROLE_TARGET",
    "require_both_groups",
    "roundtrip_schema",
    "ContractError",
    "DataError",
    "Dataset",
    "FAIR_LOGISTIC",
    "FairboostError",
    "FairnessReport",
    "GradHess",
    "GroupRates",
    "IngestionError",
    "LeafNode",
    "ModelError",
    "ModelParseError",
    "ModelStructureError",
    "ModelVersionError",
    "ObjectiveConfig",
    "ParameterError",
    "SchemaError",
    "SplitCandidate",
    "SplitNode",
    "TrainLog",
    "TrainRecord",
    "TrainingError",
    "Tree",
    "TreeParams",
    "VANILLA_LOGISTIC",
    "accuracy",
    "binarize",
    "build_tree",
    "disparate_impact",
    "evaluate",
    "find_best_split",
    "grad_hess",
    "leaf_weight",
    "load_csv",
    "load_model",
    "load_schema",
    "predict_proba",
    "predict_raw",
    "predict_tree",
    "predict_tree_matrix",
    "regularized_loss",
    "save_model",
    "save_schema",
    "sigmoid",
    "split_gain",
    "train",
    "train_test_split",
    "write_csv",
]
