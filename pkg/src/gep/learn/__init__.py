"""Classifiers, sampling and cross-validation over chain feature matrices."""

from .dataset import MLDataset
from .models import KINDS, Prediction, TrainedModel, load_model, order_labels, predict, save_model, train
from .sampling import balance_equal_size, enrich_training, oversample, split_train_val, split_train_val_test
from .tree import DecisionTree
from .validation import BALANCING, SCHEMES, CVResult, cross_validate, make_folds

__all__ = [
    "BALANCING",
    "CVResult",
    "DecisionTree",
    "KINDS",
    "MLDataset",
    "Prediction",
    "SCHEMES",
    "TrainedModel",
    "balance_equal_size",
    "cross_validate",
    "enrich_training",
    "load_model",
    "make_folds",
    "order_labels",
    "oversample",
    "predict",
    "save_model",
    "split_train_val",
    "split_train_val_test",
    "train",
]
