"""Passage times: point-to-set and set-to-set first-passage values, minimal
circuits around the origin, the dyadic annulus decomposition, rectangle
crossing times, and the contributing-vertex count.

Passage time of a path excludes the first vertex's weight: T(gamma) is the
sum of weights of the second through last vertices.  All searches are
Dijkstra with nonnegative reals; zero weights are handled natively (no
epsilon perturbation), since criticality is exactly about massive
zero-weight clusters.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import _kernels
from .distributions import Cdf
from .fields import LabelField, uniform_labels
from .lattice import Annulus, Box, Rect, Region, Vertex, box_ring, linf
from .percolation import Circuit, _simplify_to_circuit

INF = math.inf


class FppError(ValueError):
    pass


@dataclass
class WeightField:
    """Region-indexed weights tau_v = F^{-1}(omega_v) over uniform labels."""

    labels: LabelField
    F: Cdf
    tau: np.ndarray = None  # (H, W) float64; +inf outside the region

    def __post_init__(self):
        if self.tau is None:
            t = np.asarray(self.F.quantile(self.labels.labels.ravel())).reshape(self.labels.shape)
            t = t.astype(np.float64, copy=True)
            if not self.labels.mask.all():
                t[~self.labels.mask] = INF
            self.tau = t

    @property
    def region(self) -> Region:
        return self.labels.region

    @property
    def x0(self):
        return self.labels.x0

    @property
    def y0(self):
        return self.labels.y0

    @property
    def shape(self):
        return self.tau.shape

    def weight(self, v: Vertex) -> float:
        r, c = self.labels.cell(v)
        return float(self.tau[r, c])

    def cell(self, v: Vertex):
        return self.labels.cell(v)

    def with_weight(self, v: Vertex, value: float) -> None:
        """In-place single-vertex update (dynamics support)."""
        r, c = self.labels.cell(v)
        self.tau[r, c] = value


def make_field(region: Region, F: Cdf, seed: int) -> WeightField:
    return WeightField(uniform_labels(region, seed), F)


@dataclass
class PathResult:
    value: float
    witness: Optional[list] = None

    @property
    def reachable(self) -> bool:
        return self.value != INF


def _flat_cells(field: WeightField, vs: Iterable[Vertex], window) -> np.ndarray:
    x0, y0, h, w = window
    out = []
    for v in vs:
        r, c = v[1] - y0, v[0] - x0
        if 0 <= r < h and 0 <= c < w:
            out.append(r * w + c)
    return np.asarray(sorted(set(out)), dtype=np.int64)


def _window_tau(field: WeightField, x0: int, x1: int, y0: int, y1: int, allowed: Optional[Region]) -> tuple[np.ndarray, tuple]:
    """Weights over an inclusive window, +inf outside the allowed region."""
    fr0, fc0 = y0 - field.y0, x0 - field.x0
    fr1, fc1 = y1 - field.y0, x1 - field.x0
    if fr0 < 0 or fc0 < 0 or fr1 >= field.shape[0] or fc1 >= field.shape[1]:
        raise FppError("window exceeds field region")
    tau = field.tau[fr0 : fr1 + 1, fc0 : fc1 + 1]
    if allowed is not None:
        gx, gy = np.meshgrid(np.arange(x0, x1 + 1), np.arange(y0, y1 + 1))
        keep = allowed.mask_of(gx, gy)
        if not keep.all():
            tau = tau.copy()
            tau[~keep] = INF
            return tau, (x0, y0, tau.shape[0], tau.shape[1])
    return np.ascontiguousarray(tau), (x0, y0, tau.shape[0], tau.shape[1])


def passage_time(
    field: WeightField,
    A: Iterable[Vertex],
    B: Iterable[Vertex],
    allowed: Optional[Region] = None,
    witness: bool = False,
) -> PathResult:
    """T(A, B): infimum over paths from A to B inside `allowed` of the sum
    of weights of the path's vertices after the first.

    Unreachable pairs give PathResult(inf).  The witness (on request)
    realizes the value under the same first-vertex-excluded sum.
    """
    A = list(A)
    B = list(B)
    if not A or not B:
        raise FppError("A and B must be nonempty")
    region = allowed if allowed is not None else field.region
    x0, x1, y0, y1 = region.bounds()
    tau, window = _window_tau(field, x0, x1, y0, y1, region)
    h, w = tau.shape
    src = _flat_cells(field, A, (x0, y0, h, w))
    dstc = _flat_cells(field, B, (x0, y0, h, w))
    if len(src) == 0 or len(dstc) == 0:
        raise FppError("A and B must intersect the allowed region")
    dst = np.zeros(h * w, np.uint8)
    dst[dstc] = 1
    val, tgt, pred = _kernels.sssp(tau.ravel(), h, w, src, dst, witness, False)
    if not witness or tgt < 0:
        return PathResult(float(val))
    path = []
    cur = int(tgt)
    while cur >= 0:
        r, c = divmod(cur, w)
        path.append((c + x0, r + y0))
        cur = int(pred[cur])
        if cur == -2:
            break
        if pred[cur] == -1 and cur not in src:
            break
    # walk ended at a source cell
    path.reverse()
    return PathResult(float(val), path)


def point_to_box(field: WeightField, n: int) -> float:
    """T(0, boundary of B(n)); nondecreasing in n on a fixed field."""
    return float(point_to_box_profile(field, [n])[0])


def point_to_box_profile(field: WeightField, radii: Iterable[int]) -> np.ndarray:
    """T(0, boundary of B(r)) for every r in radii, in one outward sweep."""
    radii = sorted(set(int(r) for r in radii))
    if not radii or radii[0] < 1:
        raise FppError("radii must be >= 1")
    n = radii[-1]
    x0 = y0 = -n
    tau, _ = _window_tau(field, -n, n, -n, n, None)
    h, w = tau.shape
    return _kernels.sssp_rings(tau.ravel(), h, w, n, n, np.asarray(radii, dtype=np.int64))


# -- circuits ----------------------------------------------------------------


def _cut_edge(u: Vertex, v: Vertex, m: int) -> bool:
    # cut curve runs between rows 0 and 1 at x >= m (inner disk to outside)
    if u[1] == 0 and v[1] == 1:
        return u[0] >= m
    if v[1] == 0 and u[1] == 1:
        return v[0] >= m
    return False


def min_circuit_time(field: WeightField, ann: Annulus, witness: bool = False) -> PathResult:
    """Minimum circuit passage time among circuits around 0 in the annulus.

    Circuit vertices lie in the closed annulus {max(m,1) <= |v| <= n}; each
    distinct vertex's weight counts once.  Implemented by cutting the
    annulus along the positive x-axis and searching the two-sheet double
    cover from each cut vertex's first sheet to its second; a circuit exists
    iff some such path does.
    """
    m, n = max(ann.m, 1), ann.n
    steps = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))

    def inside(v: Vertex) -> bool:
        return m <= linf(v) <= n

    def wt(v: Vertex) -> float:
        return field.weight(v)

    best = INF
    best_path = None
    cut_vertices = [(x, 0) for x in range(m, n + 1)]
    for c in cut_vertices:
        if wt(c) == INF:
            continue
        # dijkstra on (vertex, sheet) from (c, 0) to (c, 1)
        start = (c, 0)
        goal = (c, 1)
        dist = {start: 0.0}
        prev = {}
        pq = [(0.0, start)]
        found = None
        while pq:
            d, node = heapq.heappop(pq)
            if d > dist.get(node, INF):
                continue
            if node == goal:
                found = d
                break
            if d >= best:
                break
            u, sheet = node
            for dx, dy in steps:
                v = (u[0] + dx, u[1] + dy)
                if not inside(v):
                    continue
                tv = wt(v)
                if tv == INF:
                    continue
                ns = sheet ^ 1 if _cut_edge(u, v, m) else sheet
                nxt = (v, ns)
                nd = d + tv
                if nd < dist.get(nxt, INF):
                    dist[nxt] = nd
                    prev[nxt] = node
                    heapq.heappush(pq, (nd, nxt))
        if found is not None and found < best:
            best = found
            if witness:
                path = [goal]
                while path[-1] != start:
                    path.append(prev[path[-1]])
                best_path = [p[0] for p in reversed(path)]
    if best == INF:
        return PathResult(INF)
    if not witness:
        return PathResult(best)
    # project the double-cover walk to a simple circuit around 0
    verts = best_path[:-1]  # drop the duplicated cut vertex
    circ = _simplify_to_circuit(verts, (0, 0))
    return PathResult(best, circ)


def circuit_value(field: WeightField, circuit) -> float:
    """Sum of the circuit's distinct vertex weights."""
    vs = circuit.vertices if isinstance(circuit, Circuit) else tuple(circuit)
    return float(sum(field.weight(v) for v in set(vs)))


# -- dyadic decomposition and rectangle crossings ----------------------------


def rn_rect(n: int) -> Rect:
    """R(n) = [-2^(n+1), 2^(n+1)] x [-2^n, 2^n]."""
    return Rect(-(2 ** (n + 1)), 2 ** (n + 1), -(2**n), 2**n)


def sn_rect(n: int) -> Rect:
    """S(n) = [-2^(n+2), 2^(n+2)] x [-2^n, 2^n]."""
    return Rect(-(2 ** (n + 2)), 2 ** (n + 2), -(2**n), 2**n)


def rect_crossing_time(field: WeightField, rect_or_n, witness: bool = False) -> PathResult:
    """Minimal passage time among left-right crossings confined to the rect."""
    rect = rn_rect(rect_or_n) if isinstance(rect_or_n, int) else rect_or_n
    if not isinstance(rect, Rect):
        raise FppError("rect_crossing_time requires a Rect or a dyadic index")
    return passage_time(field, rect.left, rect.right, allowed=rect, witness=witness)


def annulus_crossing_time(field: WeightField, m: int, n: int, witness: bool = False) -> PathResult:
    """Minimal passage time from the ring |v| = m to the ring |v| = n inside
    the closed annulus; the first vertex (on the inner ring) is excluded."""
    if not (0 <= m < n):
        raise FppError("need m < n")
    region = Annulus(max(m - 1, 0), n) if m >= 1 else Box(n)
    return passage_time(field, box_ring(m), box_ring(n), allowed=region, witness=witness)


def tn(field: WeightField, n: int) -> float:
    """Dyadic decomposition term: minimal circuit around 0 in the annulus
    between radii 2^n and 2^(n+1), plus the crossing time from B(2^n) to the
    ring at 2^(n+2) within the surrounding annulus."""
    t1 = min_circuit_time(field, Annulus(2**n, 2 ** (n + 1)))
    t2 = annulus_crossing_time(field, 2**n, 2 ** (n + 2))
    return t1.value + t2.value


# -- contributing vertices ----------------------------------------------------


def count_contributing_vertices(labels: LabelField, n: int, p: float, Lhat: int) -> int:
    """Number of vertices in R(n) that can contribute weight to the minimal
    p-open crossing of S(n): label in (1/2, p], two disjoint p-open arms to
    the boundary of the local box of radius Lhat inside S(n), and two
    disjoint 1/2-closed arms to the top and bottom sides of S(n)."""
    if Lhat > 2**n:
        raise FppError("Lhat must be at most 2^n")
    if not (0.5 <= p <= 1.0):
        raise FppError("p must be in [1/2, 1]")
    from .percolation import _maxflow_two_sided, _maxflow_point_to_ring  # local import

    sn = sn_rect(n)
    rn = rn_rect(n)
    x0, x1, y0, y1 = sn.bounds()
    try:
        grid = labels.subgrid(x0, x1, y0, y1)
    except ValueError as exc:
        raise FppError("field does not cover S(n)") from exc
    open_p = grid <= p
    closed_half = grid > 0.5
    count = 0
    ys, xs = np.nonzero((grid > 0.5) & (grid <= p))
    for r, c in zip(ys, xs):
        vx, vy = x0 + c, y0 + r
        if not rn.contains((vx, vy)):
            continue
        if not _maxflow_point_to_ring(open_p, (r, c), Lhat):
            continue
        if not _maxflow_two_sided(closed_half, (r, c)):
            continue
        count += 1
    return int(count)
