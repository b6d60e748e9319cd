"""Sparse online classification with voted regularized dual averaging."""

from .core import Dataset, Example, PredictorSnapshot, SparseVector, TrainingRun, add_scaled, dot, l2_norm, nnz
from .losses import LossKind, loss_subgradient, loss_value
from .regularization import RdaState, RegKind, RegularizerSpec, rda_update, shrink
from .trainer import TrainConfig, replay_on_subsequence, train
from .predictor import averaged_weights, evaluate, predict_linear, vote_predict

__version__ = "0.1.0"

__all__ = [
    "Dataset", "Example", "PredictorSnapshot", "SparseVector", "TrainingRun",
    "add_scaled", "dot", "l2_norm", "nnz",
    "LossKind", "loss_subgradient", "loss_value",
    "RdaState", "RegKind", "RegularizerSpec", "rda_update", "shrink",
    "TrainConfig", "replay_on_subsequence", "train",
    "averaged_weights", "evaluate", "predict_linear", "vote_predict",
]
