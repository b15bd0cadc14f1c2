import numpy as np
import pytest

from critfpp.distributions import bernoulli
from critfpp.fields import LabelField
from critfpp.fpp import WeightField
from critfpp.lattice import Box


def field_from_tau(tau_grid: np.ndarray, x0: int, y0: int) -> WeightField:
    """WeightField with explicitly prescribed weights (tests only)."""
    h, w = tau_grid.shape
    n = (h - 1) // 2
    region = Box(n) if (x0, y0) == (-n, -n) and h == w else None
    if region is None:
        from critfpp.lattice import Rect

        region = Rect(x0, x0 + w - 1, y0, y0 + h - 1)
    labels = np.full((h, w), 0.5)
    mask = np.ones((h, w), dtype=bool)
    lf = LabelField(region, labels, x0, y0, mask)
    return WeightField(lf, bernoulli(0.5), tau=np.asarray(tau_grid, dtype=float))


def tau_dict(field: WeightField) -> dict:
    """Vertex -> weight mapping for the oracles."""
    h, w = field.shape
    out = {}
    for r in range(h):
        for c in range(w):
            v = (c + field.x0, r + field.y0)
            t = field.tau[r, c]
            if np.isfinite(t):
                out[v] = float(t)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240813)
