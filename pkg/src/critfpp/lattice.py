"""Triangular-lattice geometry: adjacency, regions, boundaries, indexing.

Vertices are integer pairs (x, y).  Two vertices are adjacent when they
differ by a unit axis step or by one of the two diagonal steps (1,-1) and
(-1,1); every vertex then has exactly six neighbors.  Embedded in the plane
via (x + y/2, y*sqrt(3)/2) this is the standard triangular lattice and all
axis-aligned integer rectangles become parallelograms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

Vertex = Tuple[int, int]

# Deterministic neighbor order: E, W, N, S, SE-diagonal, NW-diagonal.
# Geodesic tie-breaking and boundary walks rely on this exact order.
NEIGHBOR_STEPS: tuple[Vertex, ...] = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))

# Same steps as a 3x3 stencil over (row=y, col=x) grids; used by the
# cluster labelers in percolation.py.
ADJACENCY_STRUCTURE = np.array([[0, 1, 1], [1, 1, 1], [1, 1, 0]], dtype=bool)


def neighbors(v: Vertex) -> list[Vertex]:
    """The six lattice neighbors of v, in the fixed deterministic order."""
    x, y = v
    return [(x + dx, y + dy) for dx, dy in NEIGHBOR_STEPS]


def adjacent(u: Vertex, v: Vertex) -> bool:
    dx, dy = v[0] - u[0], v[1] - u[1]
    return (dx, dy) in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))


def linf(v: Vertex) -> int:
    return max(abs(v[0]), abs(v[1]))


class RegionError(ValueError):
    """Raised for unsupported or unbounded region operations."""


@dataclass(frozen=True)
class Region:
    """Base class; all regions are immutable and support exact membership."""

    def contains(self, v: Vertex) -> bool:
        raise NotImplementedError

    def bounds(self) -> tuple[int, int, int, int]:
        """Bounding (x0, x1, y0, y1), inclusive.  Raises if unbounded."""
        raise NotImplementedError

    def __contains__(self, v: Vertex) -> bool:
        return self.contains(v)

    def vertices(self) -> Iterator[Vertex]:
        """Row-major iteration (y outer, x inner) over member vertices."""
        x0, x1, y0, y1 = self.bounds()
        for y in range(y0, y1 + 1):
            for x in range(x0, x1 + 1):
                if self.contains((x, y)):
                    yield (x, y)

    def mask(self) -> tuple[np.ndarray, int, int]:
        """Boolean membership grid over the bounding box.

        Returns (mask, x0, y0) with mask[y - y0, x - x0] == membership.
        """
        x0, x1, y0, y1 = self.bounds()
        xs = np.arange(x0, x1 + 1)
        ys = np.arange(y0, y1 + 1)
        gx, gy = np.meshgrid(xs, ys)
        return self.mask_of(gx, gy), x0, y0

    def mask_of(self, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
        """Vectorized membership over coordinate arrays."""
        raise NotImplementedError


@dataclass(frozen=True)
class Box(Region):
    """B(n) = all v with linf-norm at most n."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise RegionError("Box radius must be >= 0")

    def contains(self, v: Vertex) -> bool:
        return linf(v) <= self.n

    def bounds(self):
        return (-self.n, self.n, -self.n, self.n)

    def mask(self):
        size = 2 * self.n + 1
        return np.ones((size, size), dtype=bool), -self.n, -self.n

    def mask_of(self, gx, gy):
        return np.maximum(np.abs(gx), np.abs(gy)) <= self.n


@dataclass(frozen=True)
class Annulus(Region):
    """Ann(m, n) = B(n) minus B(m): vertices with m < linf-norm <= n.

    Note: circuit searches around the origin conventionally admit the inner
    ring as well; see fpp.min_circuit_time / percolation.innermost_open_circuit.
    """

    m: int
    n: int

    def __post_init__(self):
        if not (self.n > self.m >= 0):
            raise RegionError("Annulus requires n > m >= 0")

    def contains(self, v: Vertex) -> bool:
        return self.m < linf(v) <= self.n

    def bounds(self):
        return (-self.n, self.n, -self.n, self.n)

    def mask_of(self, gx, gy):
        r = np.maximum(np.abs(gx), np.abs(gy))
        return (r > self.m) & (r <= self.n)


@dataclass(frozen=True)
class Rect(Region):
    """All v with x0 <= x <= x1 and y0 <= y <= y1 (a lattice parallelogram)."""

    x0: int
    x1: int
    y0: int
    y1: int

    def __post_init__(self):
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise RegionError("Rect requires x1 >= x0 and y1 >= y0")

    def contains(self, v: Vertex) -> bool:
        return self.x0 <= v[0] <= self.x1 and self.y0 <= v[1] <= self.y1

    def bounds(self):
        return (self.x0, self.x1, self.y0, self.y1)

    def mask_of(self, gx, gy):
        return (gx >= self.x0) & (gx <= self.x1) & (gy >= self.y0) & (gy <= self.y1)

    @property
    def left(self) -> frozenset:
        return frozenset((self.x0, y) for y in range(self.y0, self.y1 + 1))

    @property
    def right(self) -> frozenset:
        return frozenset((self.x1, y) for y in range(self.y0, self.y1 + 1))

    @property
    def top(self) -> frozenset:
        return frozenset((x, self.y1) for x in range(self.x0, self.x1 + 1))

    @property
    def bottom(self) -> frozenset:
        return frozenset((x, self.y0) for x in range(self.x0, self.x1 + 1))


@dataclass(frozen=True)
class HalfPlaneRestriction(Region):
    """Base region intersected with the upper half-plane y >= 0."""

    base: Region

    def contains(self, v: Vertex) -> bool:
        return v[1] >= 0 and self.base.contains(v)

    def bounds(self):
        x0, x1, y0, y1 = self.base.bounds()
        if y1 < 0:
            raise RegionError("half-plane restriction is empty")
        return (x0, x1, max(y0, 0), y1)

    def mask_of(self, gx, gy):
        return (gy >= 0) & self.base.mask_of(gx, gy)


@dataclass(frozen=True)
class Translate(Region):
    """Base region shifted by an integer offset."""

    base: Region
    offset: Vertex

    def contains(self, v: Vertex) -> bool:
        return self.base.contains((v[0] - self.offset[0], v[1] - self.offset[1]))

    def bounds(self):
        x0, x1, y0, y1 = self.base.bounds()
        ox, oy = self.offset
        return (x0 + ox, x1 + ox, y0 + oy, y1 + oy)

    def mask_of(self, gx, gy):
        return self.base.mask_of(gx - self.offset[0], gy - self.offset[1])


def boundary(region: Region) -> frozenset:
    """Exact vertex boundary: the linf-sphere of a Box, the frame of a Rect.

    Rect sides are also available individually as .left/.right/.top/.bottom.
    """
    if isinstance(region, Box):
        n = region.n
        if n == 0:
            return frozenset({(0, 0)})
        ring = set()
        for t in range(-n, n + 1):
            ring.update({(n, t), (-n, t), (t, n), (t, -n)})
        return frozenset(ring)
    if isinstance(region, Rect):
        return region.left | region.right | region.top | region.bottom
    raise RegionError(f"boundary unsupported for region kind {type(region).__name__}")


def box_ring(n: int) -> frozenset:
    """Vertices with linf-norm exactly n."""
    return boundary(Box(n))


class VertexIndex:
    """Dense 0-based bijection between a bounded region's vertices and
    0..count-1, in row-major order."""

    def __init__(self, region: Region):
        try:
            x0, x1, y0, y1 = region.bounds()
        except NotImplementedError as exc:
            raise RegionError("region must be bounded to index") from exc
        self.region = region
        self._x0, self._y0 = x0, y0
        mask, _, _ = region.mask()
        self._mask = mask
        flat = mask.ravel()
        self._idx_of_cell = np.full(flat.shape, -1, dtype=np.int64)
        self._idx_of_cell[flat] = np.arange(int(flat.sum()))
        self._cells = np.flatnonzero(flat)
        self._w = mask.shape[1]

    def __len__(self) -> int:
        return len(self._cells)

    def index(self, v: Vertex) -> int:
        x, y = v
        r, c = y - self._y0, x - self._x0
        if not (0 <= r < self._mask.shape[0] and 0 <= c < self._w):
            raise KeyError(v)
        i = self._idx_of_cell[r * self._w + c]
        if i < 0:
            raise KeyError(v)
        return int(i)

    def vertex(self, i: int) -> Vertex:
        cell = self._cells[i]
        r, c = divmod(int(cell), self._w)
        return (c + self._x0, r + self._y0)


def index(region: Region) -> VertexIndex:
    return VertexIndex(region)
