"""Classifiers, evaluation metrics and experiment harnesses."""

from .evaluation import (
    EvalReport,
    GridSearchClassifier,
    SweepPoint,
    cross_validate,
    dyadic_range,
    evaluate,
    f_measure,
    fit_estimator,
    grid_search,
    holdout,
    stratified_folds,
    stratified_indices,
    unbalanced_sweep,
)
from .forest import DecisionTree, RandomForestClassifier
from .knn import KNNClassifier
from .persistence import TrainedModel
from .preprocessing import Standardizer, encode_labels, standardize_fit_apply
from .svm import NuSVMClassifier, nu_feasible, rbf_kernel, solve_nu_svc

__all__ = [
    "EvalReport", "GridSearchClassifier", "SweepPoint", "cross_validate",
    "dyadic_range", "evaluate", "f_measure", "fit_estimator", "grid_search", "holdout",
    "stratified_folds", "stratified_indices", "unbalanced_sweep",
    "DecisionTree", "RandomForestClassifier", "KNNClassifier", "TrainedModel",
    "Standardizer", "encode_labels", "standardize_fit_apply",
    "NuSVMClassifier", "nu_feasible", "rbf_kernel", "solve_nu_svc",
]
