"""Exact last-passage values, boundary models, exits, increments and geodesics.

Grids store 64-bit values indexed ``[row, col]`` relative to ``grid.origin``,
matching :class:`~lpp_lab.sampling.WeightField`.  Forward grids hold
passage values *from* the anchor, reverse grids values *to* the anchor.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence, Tuple

import numpy as np

from . import _kernels as K
from .errors import DegenerateTargetError, ParameterError
from .sampling import Point, RngStream, WeightField, reflect_field, sample_geometric

E1 = (1, 0)
E2 = (0, 1)

# tie rule -> prefer an e1 step when both continuations are optimal
TIE_RULES = {"rightmost": True, "upmost": False}


def _pt(x) -> Point:
    return (int(x[0]), int(x[1]))


def _leq(x: Point, y: Point) -> bool:
    return x[0] <= y[0] and x[1] <= y[1]


@dataclass(frozen=True, eq=False)
class StationaryBoundary:
    """Boundary weights on the two axes leaving ``corner``.

    ``I_row[k-1]`` sits at corner + k e1 and ``J_col[k-1]`` at corner + k e2.
    ``p`` is the horizontal parameter; ``q`` (defaults to ``p``) fixes the
    vertical law Geom(r/q).
    """

    corner: Point
    I_row: np.ndarray = dc_field(repr=False)
    J_col: np.ndarray = dc_field(repr=False)
    r: Optional[float] = None
    p: Optional[float] = None
    q: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "corner", _pt(self.corner))
        for name in ("I_row", "J_col"):
            a = np.array(getattr(self, name), dtype=np.int64).ravel()
            if a.size and a.min() < 0:
                raise ParameterError(f"{name} entries must be nonnegative")
            a.flags.writeable = False
            object.__setattr__(self, name, a)
        if self.q is None and self.p is not None:
            object.__setattr__(self, "q", self.p)


def sample_stationary_boundary(stream: RngStream, corner: Point, n_row: int, n_col: int,
                               r: float, p: float, q: Optional[float] = None) -> StationaryBoundary:
    """I ~ Geom(p) along the row, then J ~ Geom(r/q) up the column."""
    q = p if q is None else q
    if not (0 < r < p < 1 and r < q < 1):
        raise ParameterError(f"need 0 < r < p, q < 1; got r={r}, p={p}, q={q}")
    I = sample_geometric(stream, p, int(n_row))
    J = sample_geometric(stream, r / q, int(n_col))
    return StationaryBoundary(corner=corner, I_row=I, J_col=J, r=r, p=p, q=q)


@dataclass(frozen=True, eq=False)
class PassageGrid:
    anchor: Point
    direction: str  # "forward" | "reverse"
    kind: str  # "bulk" | "sw-boundary" | "ne-boundary"
    origin: Point
    values: np.ndarray = dc_field(repr=False)
    field: Optional[WeightField] = dc_field(default=None, repr=False)
    boundary: Optional[StationaryBoundary] = dc_field(default=None, repr=False)

    @property
    def corner(self) -> Point:
        h, w = self.values.shape
        return (self.origin[0] + w - 1, self.origin[1] + h - 1)

    def contains(self, x: Point) -> bool:
        return _leq(self.origin, x) and _leq(x, self.corner)

    def at(self, x: Point) -> int:
        if not self.contains(x):
            raise ParameterError(f"site {tuple(x)} outside grid {self.origin}..{self.corner}")
        return int(self.values[x[1] - self.origin[1], x[0] - self.origin[0]])

    __getitem__ = at


@dataclass(frozen=True)
class ExitRecord:
    exit_set: Tuple[int, ...]
    z_e1: int
    z_e2: int
    value: int


@dataclass(frozen=True, eq=False)
class IncrementTable:
    """``values[j, i]`` is the increment at ``origin + (i, j)`` along ``axis``."""

    axis: str
    origin: Point
    values: np.ndarray = dc_field(repr=False)

    def at(self, x: Point) -> int:
        j, i = x[1] - self.origin[1], x[0] - self.origin[0]
        if not (0 <= j < self.values.shape[0] and 0 <= i < self.values.shape[1]):
            raise ParameterError(f"site {tuple(x)} outside increment table")
        return int(self.values[j, i])

    __getitem__ = at


@dataclass(frozen=True, eq=False)
class Geodesic:
    vertices: np.ndarray = dc_field(repr=False)  # shape (L, 2)
    tie_rule: str = "rightmost"

    @property
    def start(self) -> Point:
        return _pt(self.vertices[0])

    @property
    def end(self) -> Point:
        return _pt(self.vertices[-1])

    def points(self):
        return [_pt(v) for v in self.vertices]

    def __len__(self):
        return len(self.vertices)


# ---------------------------------------------------------------- bulk

def bulk_passage_forward(field: WeightField, anchor: Point) -> PassageGrid:
    anchor = _pt(anchor)
    if not field.contains(anchor):
        raise ParameterError(f"anchor {anchor} outside field {field.origin}..{field.corner}")
    j, i = field.index(anchor)
    g = K.forward_bulk(field.contiguous(), j, i)
    return PassageGrid(anchor, "forward", "bulk", anchor, g, field)


def bulk_passage_reverse(field: WeightField, anchor: Point) -> PassageGrid:
    anchor = _pt(anchor)
    if not field.contains(anchor):
        raise ParameterError(f"anchor {anchor} outside field {field.origin}..{field.corner}")
    j, i = field.index(anchor)
    g = K.reverse_bulk(field.contiguous(), j, i)
    return PassageGrid(anchor, "reverse", "bulk", field.origin, g, field)


def passage(field: WeightField, x: Point, y: Point) -> int:
    """G_{x,y} for x <= y inside the field."""
    x, y = _pt(x), _pt(y)
    if not _leq(x, y):
        raise ParameterError(f"{x} is not below-left of {y}")
    sub = field.window(x, y)
    return int(K.forward_bulk(sub.contiguous(), 0, 0)[-1, -1])


# ---------------------------------------------------------------- boundary models

def _check_boundary_fit(field: WeightField, boundary: StationaryBoundary):
    if boundary.corner != field.origin:
        raise ParameterError(f"boundary corner {boundary.corner} is not the field origin {field.origin}")
    if len(boundary.I_row) != field.width - 1 or len(boundary.J_col) != field.height - 1:
        raise ParameterError(
            f"boundary lengths ({len(boundary.I_row)}, {len(boundary.J_col)}) do not span "
            f"a {field.width}x{field.height} field"
        )


def sw_boundary_passage(field: WeightField, boundary: StationaryBoundary) -> PassageGrid:
    _check_boundary_fit(field, boundary)
    g = K.sw_grid(field.contiguous(), boundary.I_row, boundary.J_col)
    return PassageGrid(boundary.corner, "forward", "sw-boundary", field.origin, g, field, boundary)


def ne_boundary_passage(field: WeightField, Ihat_row, Jhat_col, corner: Point) -> PassageGrid:
    """Reverse boundary model with ``Ihat_row[i-1]`` at corner - i e1 and
    ``Jhat_col[j-1]`` at corner - j e2."""
    corner = _pt(corner)
    if corner != field.corner:
        raise ParameterError(f"corner {corner} is not the field's north-east corner {field.corner}")
    Ih = np.asarray(Ihat_row, dtype=np.int64).ravel()
    Jh = np.asarray(Jhat_col, dtype=np.int64).ravel()
    if len(Ih) != field.width - 1 or len(Jh) != field.height - 1:
        raise ParameterError("boundary lengths do not span the field")
    if (Ih.size and Ih.min() < 0) or (Jh.size and Jh.min() < 0):
        raise ParameterError("boundary entries must be nonnegative")
    g = K.ne_grid(field.contiguous(), Ih, Jh)
    bd = StationaryBoundary(corner=corner, I_row=Ih, J_col=Jh)
    return PassageGrid(corner, "reverse", "ne-boundary", field.origin, g, field, bd)


def _exit_arrays(field: WeightField, boundary: StationaryBoundary, target: Point):
    target = _pt(target)
    c = boundary.corner
    if not field.contains(target) or not _leq(c, target):
        raise ParameterError(f"target {target} outside the model rectangle")
    tx, ty = target[0] - c[0], target[1] - c[1]
    if tx == 0 or ty == 0:
        raise DegenerateTargetError(f"target {target} lies on a boundary axis of corner {c}")
    w = np.ascontiguousarray(field.weights[: ty + 1, : tx + 1])
    return w, tx, ty


def exit_record(field: WeightField, boundary: StationaryBoundary, target: Point) -> ExitRecord:
    _check_boundary_fit(field, boundary)
    w, tx, ty = _exit_arrays(field, boundary, target)
    best, hh, vh = K.sw_exit(w, boundary.I_row, boundary.J_col, ty, tx)
    ks = [-(l + 1) for l in np.nonzero(vh)[0][::-1]] + [k + 1 for k in np.nonzero(hh)[0]]
    return ExitRecord(tuple(int(k) for k in ks), int(max(ks)), int(min(ks)), int(best))


def exit_extremes(grid: PassageGrid, target: Point) -> ExitRecord:
    if grid.kind != "sw-boundary" or grid.field is None or grid.boundary is None:
        raise ParameterError("exit_extremes needs a southwest boundary grid")
    return exit_record(grid.field, grid.boundary, target)


def exit_extremes_fast(w: np.ndarray, I: np.ndarray, J: np.ndarray, tx: int, ty: int):
    """(value, z_e1, z_e2) on raw arrays; corner at index (0, 0)."""
    return K.sw_exit_extremes(w, I, J, ty, tx)


# ---------------------------------------------------------------- increments

def increment_fields(grid: PassageGrid, axis: str) -> IncrementTable:
    if grid.direction != "forward":
        raise ParameterError("increments are defined for forward grids")
    g = grid.values
    if axis == "e1":
        return IncrementTable("e1", (grid.origin[0] + 1, grid.origin[1]), g[:, 1:] - g[:, :-1])
    if axis == "e2":
        return IncrementTable("e2", (grid.origin[0], grid.origin[1] + 1), g[1:, :] - g[:-1, :])
    raise ParameterError(f"axis must be 'e1' or 'e2', got {axis!r}")


def boundary_from_increments(grid: PassageGrid, y: Point, hi: Point) -> StationaryBoundary:
    """Boundary at ``y`` read off the increments of a forward grid, covering [y, hi]."""
    y, hi = _pt(y), _pt(hi)
    I = increment_fields(grid, "e1")
    J = increment_fields(grid, "e2")
    row = [I.at((y[0] + k, y[1])) for k in range(1, hi[0] - y[0] + 1)]
    col = [J.at((y[0], y[1] + k)) for k in range(1, hi[1] - y[1] + 1)]
    return StationaryBoundary(corner=y, I_row=row, J_col=col)


# ---------------------------------------------------------------- geodesics

def trace_geodesic(reverse_grid: PassageGrid, from_: Point, to: Point, tie_rule: str = "rightmost") -> Geodesic:
    from_, to = _pt(from_), _pt(to)
    if reverse_grid.direction != "reverse" or reverse_grid.anchor != to:
        raise ParameterError("trace_geodesic needs a reverse grid anchored at the endpoint")
    if not _leq(from_, to):
        raise ParameterError(f"{from_} is not below-left of {to}")
    if not reverse_grid.contains(from_):
        raise ParameterError(f"start {from_} outside the grid")
    if tie_rule not in TIE_RULES:
        raise ParameterError(f"unknown tie rule {tie_rule!r}")
    o = reverse_grid.origin
    xs, ys = K.trace(reverse_grid.values, from_[1] - o[1], from_[0] - o[0],
                     to[1] - o[1], to[0] - o[0], TIE_RULES[tie_rule])
    return Geodesic(np.stack([xs + o[0], ys + o[1]], axis=1), tie_rule)


def geodesic_weight(field: WeightField, g: Geodesic) -> int:
    o = field.origin
    if not (field.contains(g.start) and field.contains(g.end)):
        raise ParameterError("geodesic leaves the field")
    return int(K.path_weight(field.contiguous(), g.vertices[:, 0] - o[0], g.vertices[:, 1] - o[1]))


def crosses_segment(g: Geodesic, center: Point, half_length: float) -> bool:
    v = g.vertices
    on_col = v[:, 0] == int(center[0])
    return bool(np.any(np.abs(v[on_col, 1] - int(center[1])) <= half_length))


def line_deviation(g: Geodesic, u: Point, v: Point, column: int) -> float:
    """Smallest distance, on the vertical line through ``column``, between the
    path and the straight segment from u to v.  ``inf`` if the path misses it."""
    ys = g.vertices[g.vertices[:, 0] == column, 1]
    if ys.size == 0:
        return float("inf")
    line = u[1] + (v[1] - u[1]) / (v[0] - u[0]) * (column - u[0])
    return float(np.min(np.abs(line - ys)))


# ---------------------------------------------------------------- edge usage

def _check_edge_geometry(field: WeightField, u: Point, v: Point):
    if not (u[0] <= 0 and u[1] <= 0 and v[0] >= 1 and v[1] >= 0):
        raise ParameterError(f"need u <= 0 and e1 <= v, got u={u}, v={v}")
    if not (field.contains(u) and field.contains(v)):
        raise ParameterError("u and v must lie in the field")


def edge_usage_event(field: WeightField, u: Point, v: Point) -> bool:
    """Whether some geodesic from u to v takes the edge from 0 to e1."""
    u, v = _pt(u), _pt(v)
    _check_edge_geometry(field, u, v)
    return edge_usage_any(field, [u], [v])


def edge_usage_any(field: WeightField, us: Sequence[Point], vs: Sequence[Point]) -> bool:
    """Union of the edge-usage events over all pairs (u, v)."""
    us = [_pt(p) for p in us]
    vs = [_pt(p) for p in vs]
    for p in us:
        _check_edge_geometry(field, p, (1, 0))
    for p in vs:
        _check_edge_geometry(field, (0, 0), p)
    o = field.origin
    ua = np.array([(p[0] - o[0], p[1] - o[1]) for p in us], dtype=np.int64).reshape(-1, 2)
    va = np.array([(p[0] - o[0], p[1] - o[1]) for p in vs], dtype=np.int64).reshape(-1, 2)
    c0, r0 = -o[0], -o[1]
    return bool(K.edge_usage_any(field.contiguous(), ua, va, c0, r0))


__all__ = [
    "E1", "E2", "TIE_RULES", "StationaryBoundary", "PassageGrid", "ExitRecord", "IncrementTable",
    "Geodesic", "bulk_passage_forward", "bulk_passage_reverse", "passage", "sw_boundary_passage",
    "ne_boundary_passage", "exit_record", "exit_extremes", "exit_extremes_fast", "increment_fields",
    "boundary_from_increments", "trace_geodesic", "geodesic_weight", "crosses_segment",
    "line_deviation", "edge_usage_event", "edge_usage_any", "sample_stationary_boundary",
    "reflect_field",
]
