"""Hierarchical clustering with dot products."""

from ._dphc import (
    Error,
    IoError,
    NumericError,
    ValidationError,
    affinity_cosine,
    affinity_data,
    affinity_pca,
    cluster,
    cluster_dot,
    kendall_tau_b,
    score_against_truth,
    select_rank,
    simulate,
)

__all__ = [
    "Error",
    "IoError",
    "NumericError",
    "ValidationError",
    "affinity_cosine",
    "affinity_data",
    "affinity_pca",
    "cluster",
    "cluster_dot",
    "kendall_tau_b",
    "score_against_truth",
    "select_rank",
    "simulate",
]
