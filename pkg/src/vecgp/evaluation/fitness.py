"""RMSE fitness, the genotype-keyed fitness cache and the evaluation context."""

import math
import threading
import time

import numpy as np

from ..errors import InvalidParameterError
from ..expr import Expr, Individual, to_text
from . import kernels
from .backends import eval_domain_iterative, eval_domain_vectorized
from .dag import to_dag
from .domain import Domain

BACKENDS = ("iterative", "vectorized", "vectorized_cse")


def rmse(pred, target) -> float:
    """Root mean squared error, accumulated with a fixed pairwise tree."""
    pred = np.ascontiguousarray(pred, dtype=np.float64)
    target = np.ascontiguousarray(target, dtype=np.float64)
    if pred.shape != target.shape or pred.ndim != 1:
        raise InvalidParameterError(f"length mismatch: {pred.shape} vs {target.shape}")
    if pred.size == 0:
        raise InvalidParameterError("rmse needs at least one value")
    if not (np.isfinite(pred).all() and np.isfinite(target).all()):
        raise InvalidParameterError("rmse inputs must be finite")
    total = kernels.squared_error_sum(pred, target, 1.0)
    if math.isfinite(total):
        return math.sqrt(total / pred.size)
    # residuals near the clamp limit overflow when squared; rescale by the largest
    scale = kernels.max_abs_residual(pred, target)
    if not math.isfinite(scale):
        # pred and target both within +/-LIMIT but of opposite sign
        scale = float(np.finfo(np.float64).max)
    return scale * math.sqrt(kernels.squared_error_sum(pred, target, scale) / pred.size)


class FitnessCache:
    """Maps canonical genotype text to its RMSE. Safe for concurrent use."""

    def __init__(self):
        self._store = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: str):
        with self._lock:
            value = self._store.get(key)
            if value is None:
                self.misses += 1
            else:
                self.hits += 1
            return value

    def put(self, key: str, value: float) -> None:
        with self._lock:
            self._store[key] = value

    def __len__(self):
        return len(self._store)


def evaluate_expr(e: Expr, d: Domain, backend: str, workers=None, chunk_size=None, mem_budget=None):
    """Phenotype buffer of ``e`` over ``d`` computed by the named backend."""
    if backend == "iterative":
        return eval_domain_iterative(e, d)
    if backend == "vectorized":
        return eval_domain_vectorized(e, d, chunk_size, workers, mem_budget)
    if backend == "vectorized_cse":
        return eval_domain_vectorized(to_dag(e), d, chunk_size, workers, mem_budget)
    raise InvalidParameterError(f"unknown backend {backend!r}; expected one of {BACKENDS}")


class Problem:
    """Everything needed to score a genotype: domain, target and backend.

    ``eval_seconds`` and ``backend_calls`` accumulate across calls so the
    harness can attribute time to evaluation.
    """

    def __init__(self, domain: Domain, target, backend="vectorized_cse", cache=True,
                 workers=None, chunk_size=None, mem_budget=None):
        if backend not in BACKENDS:
            raise InvalidParameterError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
        target = np.ascontiguousarray(target, dtype=np.float64)
        if target.shape != (domain.point_count,):
            raise InvalidParameterError("target length must equal the domain's point count")
        self.domain = domain
        self.target = target
        self.backend = backend
        if cache is True:
            cache = FitnessCache()
        self.cache = None if cache is None or cache is False else cache
        self.workers = workers
        self.chunk_size = chunk_size
        self.mem_budget = mem_budget
        self.eval_seconds = 0.0
        self.backend_calls = 0

    def predict(self, e: Expr) -> np.ndarray:
        return evaluate_expr(e, self.domain, self.backend, self.workers, self.chunk_size, self.mem_budget)

    def __call__(self, e: Expr) -> float:
        t0 = time.perf_counter()
        try:
            key = None
            if self.cache is not None:
                key = to_text(e)
                hit = self.cache.get(key)
                if hit is not None:
                    return hit
            self.backend_calls += 1
            value = rmse(self.predict(e), self.target)
            if key is not None:
                self.cache.put(key, value)
            return value
        finally:
            self.eval_seconds += time.perf_counter() - t0


def evaluate_individual(ind: Individual, d: Domain, target, backend="vectorized_cse",
                        cache: FitnessCache = None, **kwargs) -> float:
    """Score ``ind`` (setting its fitness) with an optional shared cache."""
    problem = Problem(d, target, backend, cache=cache if cache is not None else False, **kwargs)
    ind.fitness = problem(ind.genotype)
    return ind.fitness
