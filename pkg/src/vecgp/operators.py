"""Protected primitive operators and their scalar semantics.

Every operator is total over finite inputs: results are clamped to
``[-LIMIT, LIMIT]`` and the singular points of division and logarithm map to
fixed fallbacks.  The scalar functions here are the reference semantics; the
compiled kernels in :mod:`vecgp.evaluation.kernels` reproduce them bit for bit.

Protection uses exact-zero tests rather than an epsilon band so that every
backend makes the same branch decision on the same input.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

LIMIT = 1e300

# Opcodes used by the compiled interpreters. Terminals first.
OP_VAR = 0
OP_CONST = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_PDIV = 5
OP_SIN = 6
OP_COS = 7
OP_EXP = 8
OP_PLOG = 9


def clamp(v: float) -> float:
    if v > LIMIT:
        return LIMIT
    if v < -LIMIT:
        return -LIMIT
    return v


def _add(*args):
    acc = args[0]
    for b in args[1:]:
        acc = clamp(acc + b)
    return acc


def _sub(*args):
    acc = args[0]
    for b in args[1:]:
        acc = clamp(acc - b)
    return acc


def _mul(*args):
    acc = args[0]
    for b in args[1:]:
        acc = clamp(acc * b)
    return acc


def pdiv(a: float, b: float) -> float:
    """Protected division: 1.0 when the divisor is exactly zero."""
    if b == 0.0:
        return 1.0
    return clamp(a / b)


def pexp(a: float) -> float:
    try:
        return clamp(math.exp(a))
    except OverflowError:
        return LIMIT


def plog(a: float) -> float:
    """Protected logarithm: ln|a|, and 0.0 at exactly zero."""
    if a == 0.0:
        return 0.0
    return math.log(abs(a))


@dataclass(frozen=True)
class Operator:
    name: str
    opcode: int
    min_arity: int
    max_arity: Optional[int]  # None means any arity >= min_arity
    scalar: Callable[..., float]

    def supports(self, arity: int) -> bool:
        if arity < self.min_arity:
            return False
        return self.max_arity is None or arity <= self.max_arity


OPERATORS = {
    op.name: op
    for op in (
        Operator("add", OP_ADD, 2, None, _add),
        Operator("sub", OP_SUB, 2, None, _sub),
        Operator("mul", OP_MUL, 2, None, _mul),
        Operator("pdiv", OP_PDIV, 2, 2, pdiv),
        Operator("sin", OP_SIN, 1, 1, math.sin),
        Operator("cos", OP_COS, 1, 1, math.cos),
        Operator("exp", OP_EXP, 1, 1, pexp),
        Operator("plog", OP_PLOG, 1, 1, plog),
    )
}
