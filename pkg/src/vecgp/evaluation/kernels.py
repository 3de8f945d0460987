"""Compiled kernels shared by the evaluation backends.

All transcendental calls go through the platform libm (as :mod:`math` does),
never through numpy's SIMD ufuncs, whose ``exp``/``log`` may differ from
libm in the last bit on AVX-512 hardware.  That keeps the scalar reference,
the per-case interpreter and the whole-buffer kernels bit-identical.
"""

import math

import numpy as np
from numba import njit

from ..operators import (
    LIMIT,
    OP_ADD,
    OP_CONST,
    OP_COS,
    OP_EXP,
    OP_MUL,
    OP_PDIV,
    OP_PLOG,
    OP_SIN,
    OP_SUB,
    OP_VAR,
)

_JIT = dict(nogil=True, cache=True)


@njit(inline="always")
def _clamp(v):
    if v > LIMIT:
        return LIMIT
    if v < -LIMIT:
        return -LIMIT
    return v


@njit(inline="always")
def _pdiv(a, b):
    if b == 0.0:
        return 1.0
    return _clamp(a / b)


@njit(inline="always")
def _plog(a):
    if a == 0.0:
        return 0.0
    return math.log(abs(a))


@njit(inline="always")
def _pexp(a):
    return _clamp(math.exp(a))


# --- whole-buffer kernels -------------------------------------------------


@njit(**_JIT)
def vadd(a, b, out):
    for i in range(out.size):
        out[i] = _clamp(a[i] + b[i])


@njit(**_JIT)
def vsub(a, b, out):
    for i in range(out.size):
        out[i] = _clamp(a[i] - b[i])


@njit(**_JIT)
def vmul(a, b, out):
    for i in range(out.size):
        out[i] = _clamp(a[i] * b[i])


@njit(**_JIT)
def vpdiv(a, b, out):
    for i in range(out.size):
        out[i] = _pdiv(a[i], b[i])


@njit(**_JIT)
def vsin(a, out):
    for i in range(out.size):
        out[i] = math.sin(a[i])


@njit(**_JIT)
def vcos(a, out):
    for i in range(out.size):
        out[i] = math.cos(a[i])


@njit(**_JIT)
def vexp(a, out):
    for i in range(out.size):
        out[i] = _pexp(a[i])


@njit(**_JIT)
def vplog(a, out):
    for i in range(out.size):
        out[i] = _plog(a[i])


BINARY = {OP_ADD: vadd, OP_SUB: vsub, OP_MUL: vmul, OP_PDIV: vpdiv}
UNARY = {OP_SIN: vsin, OP_COS: vcos, OP_EXP: vexp, OP_PLOG: vplog}


# --- per-case interpreter -------------------------------------------------


@njit(**_JIT)
def interpret(code, iargs, fargs, coords, out, stack_size):
    """Run a postfix program once per fitness case.

    ``code[k]`` is an opcode; ``iargs[k]`` holds the variable index or the
    operand count; ``fargs[k]`` holds a constant's value.
    """
    stack = np.empty(stack_size, dtype=np.float64)
    n_code = code.size
    for j in range(out.size):
        sp = 0
        for pc in range(n_code):
            op = code[pc]
            if op == OP_VAR:
                stack[sp] = coords[iargs[pc], j]
                sp += 1
            elif op == OP_CONST:
                stack[sp] = fargs[pc]
                sp += 1
            elif op == OP_SIN:
                stack[sp - 1] = math.sin(stack[sp - 1])
            elif op == OP_COS:
                stack[sp - 1] = math.cos(stack[sp - 1])
            elif op == OP_EXP:
                stack[sp - 1] = _pexp(stack[sp - 1])
            elif op == OP_PLOG:
                stack[sp - 1] = _plog(stack[sp - 1])
            elif op == OP_PDIV:
                stack[sp - 2] = _pdiv(stack[sp - 2], stack[sp - 1])
                sp -= 1
            else:
                n = iargs[pc]
                base = sp - n
                acc = stack[base]
                for k in range(1, n):
                    b = stack[base + k]
                    if op == OP_ADD:
                        acc = _clamp(acc + b)
                    elif op == OP_SUB:
                        acc = _clamp(acc - b)
                    else:
                        acc = _clamp(acc * b)
                stack[base] = acc
                sp = base + 1
        out[j] = stack[0]


# --- reductions -----------------------------------------------------------

_BLOCK = 128


@njit(**_JIT)
def squared_error_sum(pred, target, scale):
    """Sum of squared ``(pred - target) / scale`` over a fixed pairwise tree.

    Residuals are summed sequentially within 128-element blocks; block
    sums are then combined pairwise, level by level, carrying an odd tail.
    ``scale == 1.0`` skips the division.
    """
    n = pred.size
    n_blocks = (n + _BLOCK - 1) // _BLOCK
    partial = np.empty(max(n_blocks, 1), dtype=np.float64)
    partial[0] = 0.0
    for b in range(n_blocks):
        s = 0.0
        end = min(n, (b + 1) * _BLOCK)
        for i in range(b * _BLOCK, end):
            d = pred[i] - target[i]
            if scale != 1.0:
                d = d / scale
            s += d * d
        partial[b] = s
    m = n_blocks
    while m > 1:
        half = m // 2
        for k in range(half):
            partial[k] = partial[2 * k] + partial[2 * k + 1]
        if m % 2:
            partial[half] = partial[m - 1]
            m = half + 1
        else:
            m = half
    return partial[0]


@njit(**_JIT)
def max_abs_residual(pred, target):
    m = 0.0
    for i in range(pred.size):
        d = abs(pred[i] - target[i])
        if d > m:
            m = d
    return m
