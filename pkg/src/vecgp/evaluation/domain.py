"""Evaluation grids with precomputed coordinate buffers."""

import os
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..errors import CapacityError, InvalidParameterError

DEFAULT_MEM_FRACTION = 0.75


def available_memory() -> int:
    """Bytes of physical memory currently available (0 if unknown)."""
    try:
        return os.sysconf("SC_AVPHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError, AttributeError):
        return 0


def default_mem_budget() -> int:
    avail = available_memory()
    return int(avail * DEFAULT_MEM_FRACTION) if avail else 1 << 34


Axis = Tuple[float, float, int]


@dataclass(frozen=True, eq=False)
class Domain:
    """A rectangular lattice of fitness cases.

    ``coords`` has shape ``(n_dims, point_count)``; row ``i`` holds the
    axis-``i`` coordinate of every fitness case in row-major order (last
    axis varies fastest).
    """

    axes: Tuple[Axis, ...]
    coords: np.ndarray

    @property
    def n_dims(self) -> int:
        return len(self.axes)

    @property
    def point_count(self) -> int:
        return self.coords.shape[1]

    @property
    def coord(self):
        return list(self.coords)

    def point(self, j: int) -> Tuple[float, ...]:
        return tuple(float(v) for v in self.coords[:, j])

    def spec(self) -> str:
        return ",".join(f"{lo!r}:{hi!r}:{res}" for lo, hi, res in self.axes)


def _validate_axes(axes) -> Tuple[Axis, ...]:
    out = []
    if not axes:
        raise InvalidParameterError("a domain needs at least one axis")
    for ax in axes:
        lo, hi, res = ax
        lo, hi = float(lo), float(hi)
        if int(res) != res or res < 2:
            raise InvalidParameterError(f"resolution must be an integer >= 2, got {res!r}")
        if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
            raise InvalidParameterError(f"axis bounds must satisfy lo < hi, got ({lo}, {hi})")
        out.append((lo, hi, int(res)))
    return tuple(out)


def make_grid(axes: Sequence[Axis], mem_budget: int = None) -> Domain:
    """Inclusive linearly spaced lattice over ``axes`` of ``(lo, hi, resolution)``.

    Raises :class:`CapacityError` when the coordinate buffers alone would
    exceed ``mem_budget`` bytes (default: 75% of available memory).
    """
    axes = _validate_axes(axes)
    n = 1
    for _, _, res in axes:
        n *= res
    budget = default_mem_budget() if mem_budget is None else mem_budget
    need = n * len(axes) * 8
    if need > budget:
        raise CapacityError(f"grid of {n} points needs {need} bytes, budget is {budget}")
    coords = np.empty((len(axes), n), dtype=np.float64)
    for i, (lo, hi, res) in enumerate(axes):
        line = np.linspace(lo, hi, res)
        line[0], line[-1] = lo, hi
        inner = 1
        for _, _, r in axes[i + 1:]:
            inner *= r
        outer = n // (inner * res)
        coords[i] = np.tile(np.repeat(line, inner), outer)
    coords.setflags(write=False)
    return Domain(axes, coords)


def square_grid(side: int, lo: float = -5.0, hi: float = 5.0, mem_budget: int = None) -> Domain:
    return make_grid([(lo, hi, side), (lo, hi, side)], mem_budget=mem_budget)


def pagie_target(d: Domain) -> np.ndarray:
    """x^4/(1+x^4) + y^4/(1+y^4): the Pagie polynomial without the pole at 0."""
    if d.n_dims != 2:
        raise InvalidParameterError(f"the Pagie polynomial needs 2 axes, domain has {d.n_dims}")
    x, y = d.coords
    x2 = x * x
    x4 = x2 * x2
    y2 = y * y
    y4 = y2 * y2
    return x4 / (1.0 + x4) + y4 / (1.0 + y4)


def write_buffer(path, buf: np.ndarray, domain: Domain) -> None:
    """Write ``buf`` as raw little-endian float64 plus a ``.hdr`` sidecar."""
    buf = np.asarray(buf, dtype="<f8")
    if buf.shape != (domain.point_count,):
        raise InvalidParameterError("buffer length does not match the domain")
    path = os.fspath(path)
    buf.tofile(path)
    with open(path + ".hdr", "w", encoding="utf-8") as fh:
        fh.write(f"axes={domain.spec()} dtype=<f8 count={domain.point_count}\n")


def read_buffer(path):
    """Inverse of :func:`write_buffer`; returns ``(array, axes)``."""
    path = os.fspath(path)
    with open(path + ".hdr", encoding="utf-8") as fh:
        fields = dict(item.split("=", 1) for item in fh.readline().split())
    axes = []
    for ax in fields["axes"].split(","):
        lo, hi, res = ax.split(":")
        axes.append((float(lo), float(hi), int(res)))
    buf = np.fromfile(path, dtype="<f8")
    if buf.size != int(fields["count"]):
        raise ValueError(f"{path}: expected {fields['count']} values, found {buf.size}")
    return buf, tuple(axes)
