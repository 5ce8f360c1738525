"""Random streams and samplers for geometric weight fields.

Every random quantity in the package is drawn from an :class:`RngStream`,
a keyed counter-based generator.  The key is ``(seed, stream_id)`` so a
replicate can be regenerated on its own, on any thread, without touching
the streams of its neighbours.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional, Tuple, Union

import numpy as np

from .errors import ParameterError

_U64 = (1 << 64) - 1

Point = Tuple[int, int]


class RngStream:
    """Single-owner uniform stream keyed by ``(seed, stream_id)``.

    Backed by the Philox-4x64 bijection, so the output is a pure function of
    the key and the starting counter.
    """

    __slots__ = ("seed", "stream_id", "counter", "_gen")

    def __init__(self, seed: int, stream_id: int = 0, counter: int = 0):
        for name, v in (("seed", seed), ("stream_id", stream_id), ("counter", counter)):
            if not 0 <= int(v) <= _U64:
                raise ParameterError(f"{name} must fit in 64 unsigned bits, got {v}")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.counter = int(counter)
        bitgen = np.random.Philox(
            key=np.array([self.seed, self.stream_id], dtype=np.uint64),
            counter=np.array([self.counter, 0, 0, 0], dtype=np.uint64),
        )
        self._gen = np.random.Generator(bitgen)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, counter={self.counter})"

    def uniform_open(self, size=None):
        """Uniforms on (0, 1]; never zero, so ``log`` is always finite."""
        return 1.0 - self._gen.random(size)

    def geometric(self, rho: float, size=None):
        return sample_geometric(self, rho, size)


@dataclass(frozen=True)
class GeomParam:
    """Parameter of the law P(X = n) = rho^n (1 - rho) on {0, 1, ...}."""

    rho: float

    def __post_init__(self):
        _check_rho(self.rho)

    @property
    def mean(self) -> float:
        return self.rho / (1.0 - self.rho)

    @property
    def variance(self) -> float:
        return self.rho / (1.0 - self.rho) ** 2

    def pmf(self, n):
        n = np.asarray(n)
        return np.where(n >= 0, (1.0 - self.rho) * self.rho ** np.maximum(n, 0), 0.0)

    def sf(self, n):
        """P(X >= n)."""
        n = np.asarray(n)
        return np.where(n <= 0, 1.0, self.rho ** np.maximum(n, 0))


def _check_rho(rho) -> float:
    try:
        rho = float(rho)
    except (TypeError, ValueError):
        raise ParameterError(f"geometric parameter must be a number, got {rho!r}")
    if not (0.0 <= rho < 1.0) or not np.isfinite(rho):
        raise ParameterError(f"geometric parameter must lie in [0, 1), got {rho}")
    return rho


def sample_geometric(stream: RngStream, rho: Union[float, GeomParam], size=None):
    """Geometric draws by inversion: floor(log U / log rho).

    Returns a python int when ``size`` is None, else an int32 array.
    """
    if isinstance(rho, GeomParam):
        rho = rho.rho
    rho = _check_rho(rho)
    if rho == 0.0:
        # consume nothing: a degenerate law needs no randomness
        return 0 if size is None else np.zeros(size, dtype=np.int32)
    u = stream.uniform_open(size)
    x = np.floor(np.log(u) / np.log(rho))
    if size is None:
        return int(x)
    return x.astype(np.int32)


@dataclass(frozen=True, eq=False)
class WeightField:
    """Immutable vertex weights on the rectangle [origin, origin + (width-1, height-1)].

    ``weights`` is stored row-major with one row per second coordinate:
    ``weights[j, i]`` is the weight of site ``origin + (i, j)``.
    """

    origin: Point
    width: int
    height: int
    weights: np.ndarray = dc_field(repr=False)
    r: Optional[float] = None

    def __post_init__(self):
        w = np.asarray(self.weights)
        if w.shape != (self.height, self.width):
            raise ParameterError(
                f"weights shape {w.shape} does not match (height, width)=({self.height}, {self.width})"
            )
        if self.width < 1 or self.height < 1:
            raise ParameterError("field dimensions must be positive")
        if w.size and w.min() < 0:
            raise ParameterError("weights must be nonnegative")
        if w.dtype != np.int32:
            w = w.astype(np.int32)
        else:
            w = w.view()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "origin", (int(self.origin[0]), int(self.origin[1])))

    @classmethod
    def from_array(cls, weights, origin: Point = (0, 0), r: Optional[float] = None) -> "WeightField":
        w = np.array(weights, dtype=np.int32)
        if w.ndim != 2:
            raise ParameterError("weights must be two-dimensional")
        return cls(origin=origin, width=w.shape[1], height=w.shape[0], weights=w, r=r)

    @property
    def corner(self) -> Point:
        """North-east corner of the rectangle."""
        return (self.origin[0] + self.width - 1, self.origin[1] + self.height - 1)

    def contains(self, x: Point) -> bool:
        return (self.origin[0] <= x[0] <= self.corner[0]) and (self.origin[1] <= x[1] <= self.corner[1])

    def index(self, x: Point) -> Tuple[int, int]:
        """Array index ``(row, col)`` of site ``x``."""
        if not self.contains(x):
            raise ParameterError(f"site {tuple(x)} outside field {self.origin}..{self.corner}")
        return (x[1] - self.origin[1], x[0] - self.origin[0])

    def at(self, x: Point) -> int:
        return int(self.weights[self.index(x)])

    __getitem__ = at

    def window(self, lo: Point, hi: Point) -> "WeightField":
        """Sub-rectangle [lo, hi] as a new field sharing memory."""
        a = self.index(lo)
        b = self.index(hi)
        if b[0] < a[0] or b[1] < a[1]:
            raise ParameterError(f"empty window {lo}..{hi}")
        return WeightField(origin=lo, width=b[1] - a[1] + 1, height=b[0] - a[0] + 1,
                           weights=self.weights[a[0]:b[0] + 1, a[1]:b[1] + 1], r=self.r)

    def contiguous(self) -> np.ndarray:
        return np.ascontiguousarray(self.weights)


def sample_weight_field(stream: RngStream, origin: Point, width: int, height: int, r: float) -> WeightField:
    """I.i.d. Geom(r) weights, drawn row by row starting at ``origin``."""
    if int(width) < 1 or int(height) < 1:
        raise ParameterError(f"field dimensions must be positive, got {width}x{height}")
    r = _check_rho(r)
    if r == 0.0:
        raise ParameterError("weight parameter must lie in (0, 1)")
    w = sample_geometric(stream, r, int(width) * int(height)).reshape(int(height), int(width))
    return WeightField(origin=origin, width=int(width), height=int(height), weights=w, r=r)


def reflect_field(field: WeightField) -> WeightField:
    """View with weight at x equal to the base weight at -x.  No copy is made."""
    o = field.corner
    return WeightField(origin=(-o[0], -o[1]), width=field.width, height=field.height,
                       weights=field.weights[::-1, ::-1], r=field.r)
