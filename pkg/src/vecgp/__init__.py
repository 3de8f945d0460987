"""Tree-based genetic programming with interchangeable evaluation backends.

The iterative backend interprets each expression once per fitness case; the
vectorized backends apply every expression node to whole buffers of cases,
optionally after collapsing repeated subtrees into a DAG.  All backends
produce bit-identical results, so evolutionary runs are reproducible across
them.
"""

from .errors import CapacityError, InvalidParameterError, ParseError, TimeLimitExceeded
from .evolution import RunParams, RunResult, run
from .expr import (
    Constant,
    Function,
    Individual,
    PrimitiveSet,
    Variable,
    depth,
    make_primitive_set,
    node_count,
    pagie_primitives,
    parse,
    to_text,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "Constant",
    "Function",
    "Individual",
    "InvalidParameterError",
    "ParseError",
    "PrimitiveSet",
    "RunParams",
    "RunResult",
    "TimeLimitExceeded",
    "Variable",
    "depth",
    "make_primitive_set",
    "node_count",
    "pagie_primitives",
    "parse",
    "run",
    "to_text",
]
