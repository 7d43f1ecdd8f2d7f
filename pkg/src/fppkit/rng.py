"""Counter-based random streams keyed by (seed, lattice edge).

Every edge weight is a pure function of the 64-bit session seed and the
edge's canonical coordinates, so a sampled environment does not depend on
iteration order and any single edge can be re-derived in isolation.  The
generator chains the splitmix64 finalizer (Steele et al., "Fast splittable
pseudorandom number generators") over the packed edge key, which is the
standard recipe for counter-based streams.

All functions accept numpy arrays and are vectorized; scalars work too.
"""

from __future__ import annotations

import numpy as np

# Coordinates are packed injectively into two 64-bit words, so the working
# region must keep coordinates inside (-COORD_BOUND, COORD_BOUND).
COORD_BITS = 21
COORD_BOUND = 1 << (COORD_BITS - 1)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _mix64(x: np.ndarray | np.uint64) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64).copy()
    x ^= x >> np.uint64(30)
    x *= _MIX1
    x ^= x >> np.uint64(27)
    x *= _MIX2
    x ^= x >> np.uint64(31)
    return x


def pack_edge_keys(coords: np.ndarray, axes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Injectively pack canonical edge identifiers into two uint64 words.

    ``coords`` has shape (n, d) and holds the lexicographically smaller
    endpoint of each edge; ``axes`` holds the edge direction index.
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=np.int64))
    axes = np.asarray(axes, dtype=np.int64).reshape(-1)
    if np.any(np.abs(coords) >= COORD_BOUND):
        raise OverflowError("edge coordinate outside the supported working extent")
    shifted = (coords + COORD_BOUND).astype(np.uint64)
    lo = np.zeros(len(coords), dtype=np.uint64)
    hi = axes.astype(np.uint64)
    for i in range(coords.shape[1]):
        if i < 3:
            lo = (lo << np.uint64(COORD_BITS)) | shifted[:, i]
        else:
            hi = (hi << np.uint64(COORD_BITS)) | shifted[:, i]
    return lo, hi


def edge_uniforms(seed: int, key_lo: np.ndarray, key_hi: np.ndarray, draw: int = 0) -> np.ndarray:
    """Uniform(0,1) variate for each edge stream, draw index ``draw``."""
    key_lo = np.asarray(key_lo, dtype=np.uint64)
    key_hi = np.asarray(key_hi, dtype=np.uint64)
    seed_word = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ _GOLDEN
    h = _mix64(seed_word ^ key_lo)
    h = _mix64(h ^ key_hi ^ (_GOLDEN * np.uint64(draw + 1)))
    h = _mix64(h)
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * (2.0**-53)


def derive_seed(master: int, *parts: int | str) -> int:
    """Stable child seed from a master seed and a tag path (experiment, n, trial)."""
    h = np.uint64(master & 0xFFFFFFFFFFFFFFFF)
    for part in parts:
        if isinstance(part, str):
            word = np.uint64(len(part))
            for b in part.encode():
                word = _mix64(word ^ np.uint64(b))[()]
        else:
            word = np.uint64(part & 0xFFFFFFFFFFFFFFFF)
        h = _mix64(h ^ word)[()]
    return int(h)
