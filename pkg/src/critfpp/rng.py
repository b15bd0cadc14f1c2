"""Counter-based uniform labels keyed by (seed, vertex, ordinal).

Every random quantity in the package is a pure function of a 64-bit root
seed, a vertex coordinate, an event ordinal, and a small stream tag.  This
makes fields over any sub-region independent of enumeration order, lets
replicas run in parallel with bitwise-reproducible results, and lets a
dynamical field reproduce the static field at time zero exactly.
"""

from __future__ import annotations

import numpy as np

# splitmix64 finalizer constants
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)

# stream tags keep label draws and event-time draws on disjoint counters
STREAM_LABELS = 0x1
STREAM_EVENTS = 0x2


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z + _GOLDEN).astype(np.uint64)
    z ^= z >> np.uint64(30)
    z *= _M1
    z ^= z >> np.uint64(27)
    z *= _M2
    z ^= z >> np.uint64(31)
    return z


def counter_uniform(seed: int, x, y, ordinal, stream: int) -> np.ndarray:
    """Uniform(0,1) labels keyed by (seed, vertex, ordinal, stream).

    `x`, `y`, `ordinal` broadcast against each other; the output never
    contains exactly 0.0 or 1.0.
    """
    with np.errstate(over="ignore"):
        ux = np.asarray(x, dtype=np.int64).astype(np.uint64)
        uy = np.asarray(y, dtype=np.int64).astype(np.uint64)
        uo = np.asarray(ordinal, dtype=np.int64).astype(np.uint64)
        h = _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ np.uint64(stream))
        h = _mix(h ^ ux)
        h = _mix(h ^ (uy * np.uint64(0x9E3779B97F4A7C15)))
        h = _mix(h ^ (uo * np.uint64(0xD1B54A32D192ED03)))
    # 53-bit mantissa, shifted to the open interval (0,1)
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * (2.0**-53)


def derive_seed(seed: int, *tags: int) -> int:
    """Derive a child seed (for replicas, subcommands, ...) deterministically."""
    with np.errstate(over="ignore"):
        h = _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
        for t in tags:
            h = _mix(h ^ np.uint64(t & 0xFFFFFFFFFFFFFFFF))
    return int(h)
