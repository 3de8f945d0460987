"""Expression trees, primitive sets and the prefix s-expression text format."""

import math
import re
import struct
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Tuple, Union

from .errors import InvalidParameterError, ParseError
from .operators import OPERATORS


@dataclass(frozen=True, slots=True)
class Function:
    name: str
    children: Tuple["Expr", ...]


@dataclass(frozen=True, slots=True)
class Variable:
    index: int


@dataclass(frozen=True, slots=True, eq=False)
class Constant:
    value: float

    # Bit-pattern equality so 0.0 and -0.0 stay distinct through round trips.
    def bits(self) -> bytes:
        return struct.pack("<d", self.value)

    def __eq__(self, other):
        return isinstance(other, Constant) and self.bits() == other.bits()

    def __hash__(self):
        return hash(("c", self.bits()))


Expr = Union[Function, Variable, Constant]


@dataclass(frozen=True)
class Primitive:
    name: str
    min_arity: int
    max_arity: int


_VAR_RE = re.compile(r"x(\d+)\Z")
_NUM_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?\Z")


@dataclass(frozen=True)
class PrimitiveSet:
    """Functions and terminals available to evolution.

    Terminals are the ``n_variables`` coordinate variables ``x0..x{n-1}`` plus
    ephemeral random constants drawn uniformly from ``erc_range`` at node
    creation time.
    """

    functions: Tuple[Primitive, ...]
    n_variables: int
    erc_range: Tuple[float, float] = (-1.0, 1.0)
    erc_probability: float = 0.2
    _by_name: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "erc_range", tuple(float(v) for v in self.erc_range))
        if not self.functions:
            raise InvalidParameterError("primitive set needs at least one function")
        if self.n_variables < 1:
            raise InvalidParameterError("n_variables must be >= 1")
        lo, hi = self.erc_range
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
            raise InvalidParameterError(f"invalid erc_range {self.erc_range}")
        if not 0.0 <= self.erc_probability <= 1.0:
            raise InvalidParameterError("erc_probability must lie in [0, 1]")
        by_name = {}
        for p in self.functions:
            if p.name in by_name:
                raise InvalidParameterError(f"duplicate function symbol {p.name!r}")
            if p.name not in OPERATORS:
                raise InvalidParameterError(f"no operator implements {p.name!r}")
            if not 1 <= p.min_arity <= p.max_arity:
                raise InvalidParameterError(f"bad arity range for {p.name!r}")
            op = OPERATORS[p.name]
            if not (op.supports(p.min_arity) and op.supports(p.max_arity)):
                raise InvalidParameterError(
                    f"{p.name!r} does not support arities {p.min_arity}..{p.max_arity}"
                )
            by_name[p.name] = p
        object.__setattr__(self, "_by_name", by_name)

    def __getitem__(self, name: str) -> Primitive:
        return self._by_name[name]

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    @property
    def terminal_count(self) -> int:
        # the ERC counts as one terminal symbol when it can be generated
        return self.n_variables + (1 if self.erc_probability > 0 else 0)


DEFAULT_FUNCTIONS = ("add", "sub", "mul", "pdiv", "sin", "cos", "exp", "plog")


def make_primitive_set(
    names: Sequence[str] = DEFAULT_FUNCTIONS,
    n_variables: int = 2,
    erc_range=(-1.0, 1.0),
    erc_probability: float = 0.2,
) -> PrimitiveSet:
    """Build a primitive set using each operator's natural arity.

    A name may carry an explicit arity range as ``add:2-3``.
    """
    prims = []
    for spec in names:
        name, _, arity = spec.partition(":")
        name = name.strip()
        if name not in OPERATORS:
            raise InvalidParameterError(f"unknown function {name!r}")
        if arity:
            lo, _, hi = arity.partition("-")
            try:
                lo_i = int(lo)
                hi_i = int(hi) if hi else lo_i
            except ValueError:
                raise InvalidParameterError(f"bad arity in {spec!r}") from None
        else:
            lo_i = OPERATORS[name].min_arity
            hi_i = OPERATORS[name].max_arity or lo_i
        prims.append(Primitive(name, lo_i, hi_i))
    return PrimitiveSet(tuple(prims), n_variables, erc_range, erc_probability)


def pagie_primitives(**kwargs) -> PrimitiveSet:
    return make_primitive_set(DEFAULT_FUNCTIONS, n_variables=2, **kwargs)


def depth(e: Expr) -> int:
    """Edges on the longest root-to-leaf path."""
    if isinstance(e, Function):
        return 1 + max(depth(c) for c in e.children)
    return 0


def node_count(e: Expr) -> int:
    if isinstance(e, Function):
        return 1 + sum(node_count(c) for c in e.children)
    return 1


def subtrees(e: Expr) -> Iterator[Tuple[Tuple[int, ...], Expr]]:
    """Yield ``(path, node)`` in preorder; ``len(path)`` is the node's depth."""
    stack = [((), e)]
    while stack:
        path, node = stack.pop()
        yield path, node
        if isinstance(node, Function):
            for i in range(len(node.children) - 1, -1, -1):
                stack.append((path + (i,), node.children[i]))


def replace_at(e: Expr, path: Tuple[int, ...], new: Expr) -> Expr:
    if not path:
        return new
    head, rest = path[0], path[1:]
    kids = list(e.children)
    kids[head] = replace_at(kids[head], rest, new)
    return Function(e.name, tuple(kids))


def to_text(e: Expr) -> str:
    parts = []

    def emit(node):
        if isinstance(node, Function):
            parts.append("(" + node.name)
            for c in node.children:
                parts.append(" ")
                emit(c)
            parts.append(")")
        elif isinstance(node, Variable):
            parts.append(f"x{node.index}")
        else:
            # repr gives the shortest string that round-trips exactly
            parts.append(repr(node.value))

    emit(e)
    return "".join(parts)


_TOKEN_RE = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


def _tokenize(s: str):
    pos = 0
    n = len(s)
    while pos < n:
        m = _TOKEN_RE.match(s, pos)
        if m is None:
            break  # trailing whitespace
        if m.group(1):
            yield "(", m.start(1)
        elif m.group(2):
            yield ")", m.start(2)
        else:
            yield m.group(3), m.start(3)
        pos = m.end()


def _parse_terminal(tok: str, pos: int, ps: PrimitiveSet) -> Expr:
    m = _VAR_RE.match(tok)
    if m:
        idx = int(m.group(1))
        if idx >= ps.n_variables:
            raise ParseError(f"variable {tok} out of range for {ps.n_variables} variables", pos)
        return Variable(idx)
    if _NUM_RE.match(tok):
        value = float(tok)
        if not math.isfinite(value):
            raise ParseError(f"non-finite constant {tok!r}", pos)
        return Constant(value)
    if tok in ps:
        raise ParseError(f"function {tok!r} used as a terminal", pos)
    if tok[:1].isdigit() or tok[:1] in "+-.":
        raise ParseError(f"malformed number {tok!r}", pos)
    raise ParseError(f"unknown symbol {tok!r}", pos)


def parse(s: str, ps: PrimitiveSet) -> Expr:
    """Parse a prefix s-expression such as ``(add x0 1.5)``."""
    tokens = list(_tokenize(s))
    if not tokens:
        raise ParseError("empty expression", 0)
    i = 0

    def parse_at():
        nonlocal i
        if i >= len(tokens):
            raise ParseError("unexpected end of input", len(s))
        tok, pos = tokens[i]
        i += 1
        if tok == ")":
            raise ParseError("unexpected ')'", pos)
        if tok != "(":
            return _parse_terminal(tok, pos, ps)
        if i >= len(tokens):
            raise ParseError("unexpected end of input", len(s))
        name, npos = tokens[i]
        i += 1
        if name in ("(", ")"):
            raise ParseError("expected a function symbol", npos)
        if name not in ps:
            raise ParseError(f"unknown symbol {name!r}", npos)
        children = []
        while True:
            if i >= len(tokens):
                raise ParseError("missing ')'", len(s))
            if tokens[i][0] == ")":
                i += 1
                break
            children.append(parse_at())
        prim = ps[name]
        if not prim.min_arity <= len(children) <= prim.max_arity:
            raise ParseError(
                f"{name} takes {prim.min_arity}..{prim.max_arity} arguments, got {len(children)}",
                pos,
            )
        return Function(name, tuple(children))

    e = parse_at()
    if i != len(tokens):
        raise ParseError("trailing input", tokens[i][1])
    return e


def read_population(path, ps: PrimitiveSet):
    """Read a ``.pop`` file: one expression per line, blank lines ignored."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(parse(line, ps))
    return out


def write_population(path, exprs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in exprs:
            fh.write(to_text(e) + "\n")


@dataclass(eq=False)
class Individual:
    """A genotype with its cached fitness (RMSE) and shape metadata."""

    genotype: Expr
    fitness: float = None
    depth: int = field(init=False)
    node_count: int = field(init=False)

    def __post_init__(self):
        self.depth = depth(self.genotype)
        self.node_count = node_count(self.genotype)
        if self.fitness is not None and not (math.isfinite(self.fitness) and self.fitness >= 0):
            raise InvalidParameterError(f"invalid fitness {self.fitness!r}")

    @property
    def text(self) -> str:
        return to_text(self.genotype)
