"""Four from-scratch detectors behind one train/predict interface."""

from .base import (
    ALGORITHMS,
    MODEL_MAGIC,
    MODEL_SCHEMA_VERSION,
    Hyperparams,
    Model,
    Standardizer,
    knn_brute_force,
    load_model,
    predict,
    predict_batch,
    save_model,
    train,
)
from .knn import KnnParams, brute_force_label, predict_knn
from .mlp import MlpParams, cross_entropy, gradients, init_params, train_mlp
from .tree import (
    ForestParams,
    TreeArrays,
    build_forest,
    build_tree,
    gini,
    predict_forest,
    predict_tree,
)

__all__ = [
    "ALGORITHMS",
    "MODEL_MAGIC",
    "MODEL_SCHEMA_VERSION",
    "Hyperparams",
    "Model",
    "Standardizer",
    "KnnParams",
    "ForestParams",
    "TreeArrays",
    "MlpParams",
    "train",
    "predict",
    "predict_batch",
    "knn_brute_force",
    "save_model",
    "load_model",
    "gini",
    "build_tree",
    "build_forest",
    "predict_tree",
    "predict_forest",
    "predict_knn",
    "brute_force_label",
    "gradients",
    "cross_entropy",
    "init_params",
    "train_mlp",
]
