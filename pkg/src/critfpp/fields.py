"""Uniform label fields over lattice regions.

A LabelField assigns each vertex of a bounded region a uniform(0,1) label,
derived from a counter-based generator keyed by (seed, vertex), so the same
vertex gets the same label in any region and any enumeration order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .lattice import Region, Vertex


@dataclass
class LabelField:
    region: Region
    labels: np.ndarray  # (H, W) float64 over the region's bounding box
    x0: int
    y0: int
    mask: np.ndarray  # (H, W) bool membership grid

    @property
    def shape(self):
        return self.labels.shape

    def label(self, v: Vertex) -> float:
        r, c = v[1] - self.y0, v[0] - self.x0
        if not (0 <= r < self.labels.shape[0] and 0 <= c < self.labels.shape[1] and self.mask[r, c]):
            raise KeyError(v)
        return float(self.labels[r, c])

    def cell(self, v: Vertex) -> tuple[int, int]:
        return (v[1] - self.y0, v[0] - self.x0)

    def subgrid(self, x0: int, x1: int, y0: int, y1: int) -> np.ndarray:
        """Label view over an inclusive coordinate window (must fit)."""
        r0, r1 = y0 - self.y0, y1 - self.y0
        c0, c1 = x0 - self.x0, x1 - self.x0
        if r0 < 0 or c0 < 0 or r1 >= self.labels.shape[0] or c1 >= self.labels.shape[1]:
            raise ValueError("window not contained in field region")
        return self.labels[r0 : r1 + 1, c0 : c1 + 1]


def uniform_labels(region: Region, seed: int, ordinal: int = 0) -> LabelField:
    """i.i.d. uniform labels on the region (ordinal 0 is the static field)."""
    from . import _kernels

    mask, x0, y0 = region.mask()
    h, w = mask.shape
    labels = _kernels.label_grid(
        np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF), rng.STREAM_LABELS, x0, y0, h, w, ordinal
    ).reshape(h, w)
    return LabelField(region, labels, x0, y0, mask)
