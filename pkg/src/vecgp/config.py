"""Flat ``key = value`` configuration with the reference experiment as defaults."""

from dataclasses import dataclass, fields
from typing import Dict, Iterable, Optional, Tuple

from .bench import test_ladder
from .errors import InvalidParameterError
from .evaluation import BACKENDS
from .evolution import RunParams
from .expr import DEFAULT_FUNCTIONS, PrimitiveSet, make_primitive_set

_RUN_FIELDS = tuple(f.name for f in fields(RunParams))


class ConfigError(InvalidParameterError):
    def __init__(self, message, line: Optional[int] = None, source: str = None):
        where = ""
        if source and line is not None:
            where = f"{source}:{line}: "
        elif line is not None:
            where = f"line {line}: "
        elif source:
            where = f"{source}: "
        super().__init__(where + message)
        self.line = line


@dataclass
class Config:
    # evolution
    runs: int = 30
    generations: int = 50
    pop_size: int = 50
    elite_size: int = 1
    tournament_size: int = 3
    crossover_prob: float = 0.9
    mutation_prob: float = 0.1
    min_init_depth: int = 1
    max_init_depth: int = 10
    max_depth: int = 10
    seed: int = 0
    epsilon_hit: float = 1e-12
    # primitives
    functions: str = ",".join(DEFAULT_FUNCTIONS)
    erc_lo: float = -1.0
    erc_hi: float = 1.0
    erc_probability: float = 0.2
    # domain and ladder
    domain_lo: float = -5.0
    domain_hi: float = 5.0
    side: int = 64
    min_side: int = 64
    max_side: int = 4096
    # evaluation
    backend: str = "vectorized_cse"
    backends: str = "iterative,vectorized_cse"
    workers: int = 0  # 0: VECGP_WORKERS or the CPU count
    chunk_size: int = 0  # 0: automatic
    cache: bool = True
    # budgets and output
    time_budget_s: float = 3600.0
    mem_budget_bytes: int = 0  # 0: 75% of available memory
    out: str = "out"
    charts: bool = True
    export_buffers: bool = False

    def run_params(self) -> RunParams:
        return RunParams(**{k: getattr(self, k) for k in _RUN_FIELDS})

    def primitive_set(self) -> PrimitiveSet:
        names = [n.strip() for n in self.functions.split(",") if n.strip()]
        return make_primitive_set(names, n_variables=2, erc_range=(self.erc_lo, self.erc_hi),
                                  erc_probability=self.erc_probability)

    def backend_list(self) -> Tuple[str, ...]:
        return tuple(b.strip() for b in self.backends.split(",") if b.strip())

    @property
    def worker_count(self) -> Optional[int]:
        return self.workers or None

    @property
    def mem_budget(self) -> Optional[int]:
        return self.mem_budget_bytes or None

    def validate(self) -> "Config":
        self.run_params().validate()
        self.primitive_set()
        if not self.domain_lo < self.domain_hi:
            raise InvalidParameterError("domain_lo must be < domain_hi")
        if self.side < 2:
            raise InvalidParameterError("side must be >= 2")
        test_ladder(self.min_side, self.max_side)
        for b in (self.backend,) + self.backend_list():
            if b not in BACKENDS:
                raise InvalidParameterError(f"unknown backend {b!r}; expected one of {BACKENDS}")
        if not self.backend_list():
            raise InvalidParameterError("backends must name at least one backend")
        for name in ("workers", "chunk_size", "mem_budget_bytes"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be >= 0")
        if not self.time_budget_s > 0:
            raise InvalidParameterError("time_budget_s must be > 0")
        return self


_TYPES = {f.name: f.type for f in fields(Config)}
_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _coerce(key: str, raw: str):
    kind = _TYPES[key]
    if kind in (bool, "bool"):
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if kind in (int, "int"):
        return int(raw)
    if kind in (float, "float"):
        return float(raw)
    return raw


def _apply(values: Dict[str, object], key: str, raw: str, line=None, source=None):
    key = key.strip()
    if key not in _TYPES:
        raise ConfigError(f"unknown key {key!r}", line, source)
    try:
        values[key] = _coerce(key, raw.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}", line, source) from None


def parse_config_text(text: str, overrides: Iterable[Tuple[str, str]] = (), source=None) -> Config:
    values: Dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, raw = body.partition("=")
        if not sep:
            raise ConfigError(f"expected 'key = value', got {line.strip()!r}", lineno, source)
        if key.strip() in values:
            raise ConfigError(f"duplicate key {key.strip()!r}", lineno, source)
        _apply(values, key, raw, lineno, source)
    for key, raw in overrides:
        _apply(values, key, str(raw), source="override")
    try:
        return Config(**values).validate()
    except ConfigError:
        raise
    except InvalidParameterError as exc:
        raise ConfigError(str(exc), source=source) from None


def parse_config(path=None, overrides: Iterable[Tuple[str, str]] = ()) -> Config:
    """Read ``path`` (if given), then apply ``overrides`` on top."""
    text = ""
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from None
    return parse_config_text(text, overrides, source=str(path) if path else None)


def serialize_config(cfg: Config) -> str:
    lines = []
    for f in fields(Config):
        v = getattr(cfg, f.name)
        if isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
