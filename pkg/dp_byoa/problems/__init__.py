"""Datasets, domains, problem descriptors and synthetic families."""

from .base import (
    BallDomain,
    ConstantsReport,
    MinConstants,
    MinimaxConstants,
    MinimaxProblem,
    MinProblem,
    Problem,
    SampleSet,
    block_bounds,
    empirical_grad,
    empirical_value,
    load_samples,
    partition_disjoint,
    probe_constants,
    project,
    sample_in_ball,
    save_samples,
)
from .bilinear import BilinearStructure, encode_bilinear_samples, make_bilinear_saddle_problem
from .families import BilinearFamily, LogisticFamily, ProblemFamily, QuadraticFamily
from .logistic import LogisticStructure, make_logistic_min_problem
from .quadratic import QuadraticStructure, make_quadratic_min_problem

__all__ = [
    "BallDomain",
    "BilinearFamily",
    "BilinearStructure",
    "ConstantsReport",
    "LogisticFamily",
    "LogisticStructure",
    "MinConstants",
    "MinimaxConstants",
    "MinimaxProblem",
    "MinProblem",
    "Problem",
    "ProblemFamily",
    "QuadraticFamily",
    "QuadraticStructure",
    "SampleSet",
    "block_bounds",
    "empirical_grad",
    "empirical_value",
    "encode_bilinear_samples",
    "load_samples",
    "make_bilinear_saddle_problem",
    "make_logistic_min_problem",
    "make_quadratic_min_problem",
    "partition_disjoint",
    "probe_constants",
    "project",
    "sample_in_ball",
    "save_samples",
]
