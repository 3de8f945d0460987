"""Tree to DAG lowering with structural common-subexpression elimination."""

import struct
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from ..expr import Expr, Function, Variable
from ..operators import OP_CONST, OP_VAR, OPERATORS


@dataclass(frozen=True)
class DagNode:
    op: str  # "var", "const" or a function symbol
    value: Union[int, float, None]
    operands: Tuple[int, ...] = ()


@dataclass(frozen=True)
class Dag:
    """Topologically ordered nodes; operands always point at earlier nodes."""

    nodes: Tuple[DagNode, ...]
    root: int

    def __len__(self):
        return len(self.nodes)


def to_dag(e: Expr, cse: bool = True) -> Dag:
    """Lower ``e`` to a DAG in post-order.

    With ``cse`` on, structurally identical subtrees collapse onto a single
    node; constants are compared by bit pattern.  With it off, the result
    mirrors the tree one node per tree node.
    """
    nodes = []
    memo = {}

    def visit(node):
        if isinstance(node, Function):
            ids = tuple(visit(c) for c in node.children)
            key = (node.name, ids)
            dn = DagNode(node.name, None, ids)
        elif isinstance(node, Variable):
            key = ("var", node.index)
            dn = DagNode("var", node.index)
        else:
            key = ("const", struct.pack("<d", node.value))
            dn = DagNode("const", node.value)
        if cse:
            hit = memo.get(key)
            if hit is not None:
                return hit
            memo[key] = len(nodes)
        nodes.append(dn)
        return len(nodes) - 1

    root = visit(e)
    return Dag(tuple(nodes), root)


def to_postfix(e: Expr):
    """Flatten a tree into arrays for the per-case interpreter.

    Returns ``(code, iargs, fargs, stack_size)``.
    """
    code, iargs, fargs = [], [], []
    max_sp = 0
    sp = 0
    # explicit post-order without recursion: (node, expanded?)
    stack = [(e, False)]
    while stack:
        node, expanded = stack.pop()
        if isinstance(node, Function) and not expanded:
            stack.append((node, True))
            for c in reversed(node.children):
                stack.append((c, False))
            continue
        if isinstance(node, Function):
            n = len(node.children)
            code.append(OPERATORS[node.name].opcode)
            iargs.append(n)
            fargs.append(0.0)
            sp -= n - 1
        elif isinstance(node, Variable):
            code.append(OP_VAR)
            iargs.append(node.index)
            fargs.append(0.0)
            sp += 1
        else:
            code.append(OP_CONST)
            iargs.append(0)
            fargs.append(node.value)
            sp += 1
        max_sp = max(max_sp, sp)
    return (
        np.array(code, dtype=np.int64),
        np.array(iargs, dtype=np.int64),
        np.array(fargs, dtype=np.float64),
        max_sp,
    )
