"""Iterative (per fitness case) and vectorized (per node) evaluation backends."""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence, Union

import numpy as np

from ..errors import CapacityError, InvalidParameterError
from ..expr import Expr, Function, Variable
from ..operators import OP_CONST, OP_VAR, OPERATORS
from . import kernels
from .dag import Dag, to_dag, to_postfix
from .domain import Domain, default_mem_budget

MIN_CHUNK = 4096
MAX_CHUNK = 16384  # keeps a chunk's live buffers within L2


def eval_point(e: Expr, point: Sequence[float]) -> float:
    """Recursive scalar evaluation at a single fitness case."""
    if isinstance(e, Function):
        args = [eval_point(c, point) for c in e.children]
        return OPERATORS[e.name].scalar(*args)
    if isinstance(e, Variable):
        return float(point[e.index])
    return e.value


def eval_domain_iterative(e: Expr, d: Domain) -> np.ndarray:
    """Interpret ``e`` case by case over the whole domain (single-threaded)."""
    code, iargs, fargs, stack_size = to_postfix(e)
    out = np.empty(d.point_count, dtype=np.float64)
    kernels.interpret(code, iargs, fargs, d.coords, out, stack_size)
    return out


def default_workers() -> int:
    env = os.environ.get("VECGP_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise InvalidParameterError(f"VECGP_WORKERS must be an integer, got {env!r}") from None
        if n >= 1:
            return n
    return os.cpu_count() or 1


def default_chunk_size(point_count: int, workers: int) -> int:
    """A quarter of each worker's share, bounded to [MIN_CHUNK, MAX_CHUNK]."""
    share = point_count // (4 * workers)
    return min(point_count, max(MIN_CHUNK, min(MAX_CHUNK, share)))


class _Plan:
    """Execution schedule for a DAG: kernels, operands and buffer release points."""

    __slots__ = ("steps", "root", "peak_buffers")

    def __init__(self, dag: Dag):
        nodes = dag.nodes
        last_use = [-1] * len(nodes)
        for k, node in enumerate(nodes):
            for o in node.operands:
                last_use[o] = k
        last_use[dag.root] = len(nodes)
        steps = []
        live = peak = 0
        for k, node in enumerate(nodes):
            frees = tuple(sorted({o for o in node.operands if last_use[o] == k and nodes[o].op != "var"}))
            if node.op == "var":
                steps.append((OP_VAR, node.value, None, (), frees))
                continue
            live += 1
            peak = max(peak, live)
            if node.op == "const":
                steps.append((OP_CONST, node.value, None, (), frees))
            else:
                opcode = OPERATORS[node.op].opcode
                fn = kernels.UNARY.get(opcode) or kernels.BINARY[opcode]
                steps.append((opcode, None, fn, node.operands, frees))
            live -= len(frees)
        self.steps = steps
        self.root = dag.root
        self.peak_buffers = peak


def _run_chunk(plan: _Plan, coords: np.ndarray, start: int, stop: int, out: np.ndarray) -> None:
    n = stop - start
    bufs = [None] * len(plan.steps)
    pool = []
    for k, (opcode, arg, fn, operands, frees) in enumerate(plan.steps):
        if opcode == OP_VAR:
            bufs[k] = coords[arg, start:stop]
            continue
        b = pool.pop() if pool else np.empty(n, dtype=np.float64)
        if opcode == OP_CONST:
            b.fill(arg)
        elif len(operands) == 1:
            fn(bufs[operands[0]], b)
        else:
            fn(bufs[operands[0]], bufs[operands[1]], b)
            # variable arity folds left, one operand at a time
            for o in operands[2:]:
                fn(b, bufs[o], b)
        bufs[k] = b
        for o in frees:
            pool.append(bufs[o])
            bufs[o] = None
    out[start:stop] = bufs[plan.root]


_pools = {}


def _executor(workers: int) -> ThreadPoolExecutor:
    ex = _pools.get(workers)
    if ex is None:
        ex = _pools[workers] = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="vecgp")
    return ex


def eval_domain_vectorized(
    e: Union[Expr, Dag],
    d: Domain,
    chunk_size: int = None,
    workers: int = None,
    mem_budget: int = None,
) -> np.ndarray:
    """Evaluate node by node, each node applied to a whole buffer of cases.

    A :class:`Dag` input is executed as given; a tree is executed without
    subexpression sharing.  The domain is cut into chunks of ``chunk_size``
    cases which ``workers`` threads process independently, each writing a
    disjoint slice of the output.
    """
    dag = e if isinstance(e, Dag) else to_dag(e, cse=False)
    workers = default_workers() if workers is None else workers
    if workers < 1:
        raise InvalidParameterError("workers must be >= 1")
    n = d.point_count
    if chunk_size is None:
        chunk_size = default_chunk_size(n, workers)
    elif chunk_size < 1:
        raise InvalidParameterError("chunk_size must be >= 1")
    chunk_size = min(chunk_size, n)
    plan = _Plan(dag)
    starts = range(0, n, chunk_size)
    concurrent = min(workers, len(starts))
    budget = default_mem_budget() if mem_budget is None else mem_budget
    need = plan.peak_buffers * chunk_size * 8 * concurrent + n * 8
    if need > budget:
        raise CapacityError(f"evaluation needs {need} bytes of buffers, budget is {budget}")
    out = np.empty(n, dtype=np.float64)
    if concurrent == 1:
        for s in starts:
            _run_chunk(plan, d.coords, s, min(n, s + chunk_size), out)
    else:
        futures = [
            _executor(workers).submit(_run_chunk, plan, d.coords, s, min(n, s + chunk_size), out)
            for s in starts
        ]
        for f in futures:
            f.result()
    return out
