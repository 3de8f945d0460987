"""Domains, evaluation backends, CSE and fitness."""

from .backends import (
    default_chunk_size,
    default_workers,
    eval_domain_iterative,
    eval_domain_vectorized,
    eval_point,
)
from .dag import Dag, DagNode, to_dag, to_postfix
from .domain import (
    Domain,
    make_grid,
    pagie_target,
    read_buffer,
    square_grid,
    write_buffer,
)
from .fitness import BACKENDS, FitnessCache, Problem, evaluate_expr, evaluate_individual, rmse

__all__ = [
    "BACKENDS",
    "Dag",
    "DagNode",
    "Domain",
    "FitnessCache",
    "Problem",
    "default_chunk_size",
    "default_workers",
    "eval_domain_iterative",
    "eval_domain_vectorized",
    "eval_point",
    "evaluate_expr",
    "evaluate_individual",
    "make_grid",
    "pagie_target",
    "read_buffer",
    "rmse",
    "square_grid",
    "to_dag",
    "to_postfix",
    "write_buffer",
]
