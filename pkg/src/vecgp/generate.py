"""Random tree construction: full, grow and population-level ramped half-and-half."""

import random
from typing import List, NamedTuple

from .errors import InvalidParameterError
from .expr import Constant, Expr, Function, PrimitiveSet, Variable


def _terminal(ps: PrimitiveSet, rng: random.Random) -> Expr:
    if ps.erc_probability > 0 and rng.random() < ps.erc_probability:
        lo, hi = ps.erc_range
        return Constant(rng.uniform(lo, hi))
    return Variable(rng.randrange(ps.n_variables))


def _function_node(ps: PrimitiveSet, rng: random.Random, make_child) -> Expr:
    prim = ps.functions[rng.randrange(len(ps.functions))]
    arity = rng.randint(prim.min_arity, prim.max_arity)
    return Function(prim.name, tuple(make_child() for _ in range(arity)))


def gen_full(target_depth: int, ps: PrimitiveSet, rng: random.Random) -> Expr:
    """Tree whose leaves all sit at exactly ``target_depth``."""
    if target_depth < 0:
        raise InvalidParameterError("target_depth must be >= 0")
    if target_depth == 0:
        return _terminal(ps, rng)
    return _function_node(ps, rng, lambda: gen_full(target_depth - 1, ps, rng))


def gen_grow(max_depth: int, ps: PrimitiveSet, rng: random.Random) -> Expr:
    """Tree of depth at most ``max_depth``.

    The root is always a function when ``max_depth >= 1``.  Below it, each
    position becomes a terminal with probability T / (T + F), where T and F
    are the terminal and function set sizes.
    """
    if max_depth < 0:
        raise InvalidParameterError("max_depth must be >= 0")
    if max_depth == 0:
        return _terminal(ps, rng)
    p_terminal = ps.terminal_count / (ps.terminal_count + len(ps.functions))

    def grow(remaining):
        if remaining == 0 or rng.random() < p_terminal:
            return _terminal(ps, rng)
        return _function_node(ps, rng, lambda: grow(remaining - 1))

    return _function_node(ps, rng, lambda: grow(max_depth - 1))


class TraceEntry(NamedTuple):
    depth: int
    method: str  # "full" or "grow"


def rhh_block_sizes(pop_size: int, min_depth: int, max_depth: int) -> List[int]:
    """Trees per depth block; the remainder goes to the deepest blocks."""
    n_blocks = max_depth - min_depth + 1
    base, rem = divmod(pop_size, n_blocks)
    return [base + (1 if b >= n_blocks - rem else 0) for b in range(n_blocks)]


def ramped_half_and_half(
    pop_size: int,
    min_depth: int,
    max_depth: int,
    ps: PrimitiveSet,
    rng: random.Random,
    trace: list = None,
) -> List[Expr]:
    """Population-level ramped half-and-half.

    The population is split into one block per depth in
    ``[min_depth, max_depth]``.  Each block holds ``size // 2`` full trees
    followed by the remaining grow trees, so an odd block gives its extra
    slot to grow.  When ``pop_size`` is smaller than the number of blocks the
    shallow blocks end up empty.  If ``trace`` is a list, one
    :class:`TraceEntry` per tree is appended to it.
    """
    if pop_size < 1:
        raise InvalidParameterError("pop_size must be >= 1")
    if not 0 <= min_depth <= max_depth:
        raise InvalidParameterError("need 0 <= min_depth <= max_depth")
    pop = []
    for offset, size in enumerate(rhh_block_sizes(pop_size, min_depth, max_depth)):
        d = min_depth + offset
        n_full = size // 2
        for k in range(size):
            if k < n_full:
                pop.append(gen_full(d, ps, rng))
                method = "full"
            else:
                pop.append(gen_grow(d, ps, rng))
                method = "grow"
            if trace is not None:
                trace.append(TraceEntry(d, method))
    return pop
