"""Counter-based random streams.

Every random quantity in the measurement pipeline (graph edges, the
per-edge phases of the fifth row family, per-trial seeds) is a pure
function of a 64-bit key plus integer counters.  Nothing is stored:
any value can be recomputed on demand, and encoder and decoder agree
bit-exactly on the phases without ever materializing them densely.

The mixer is the SplitMix64 finalizer, applied twice after the last
counter is absorbed.  The scalar and numpy paths run the identical
integer operations, so they produce identical streams.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLD = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB

# domain tags so that edge sampling, phase values and seed derivation
# never share a stream even for equal (seed, phase) pairs
TAG_EDGE = 0x45D6E301
TAG_PHI = 0x9B11AD02
TAG_TRIAL = 0x7A1A1703
TAG_SIGNAL = 0x51C9A104
TAG_ENSEMBLE = 0x3E6B1905

_U53_SCALE = 2.0**-53
_PHI_SCALE = (2.0**-53) * (np.pi / 2.0)


def mix64(z: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit unsigned ints."""
    z = (z + _GOLD) & _MASK
    z = ((z ^ (z >> 30)) * _MUL1) & _MASK
    z = ((z ^ (z >> 27)) * _MUL2) & _MASK
    return z ^ (z >> 31)


def stream_key(seed: int, *words: int) -> int:
    """Derive an independent stream key from a seed and context words."""
    h = seed & _MASK
    for w in words:
        h = mix64(h ^ (w & _MASK))
    return h


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(_GOLD)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
    return z ^ (z >> np.uint64(31))


def counter_u64(key: int, counters) -> np.ndarray:
    """Vector of 64-bit hashes for (key, t) with t from `counters`."""
    z = np.uint64(key) ^ np.asarray(counters, dtype=np.uint64)
    return _mix64_vec(_mix64_vec(z))


def counter_unit_open(key: int, counters) -> np.ndarray:
    """Uniform floats in (0, 1], one per counter."""
    h = counter_u64(key, counters)
    return ((h >> np.uint64(11)) + np.uint64(1)) * _U53_SCALE


def phi_scalar(phase_key: int, i: int, j: int) -> float:
    """Phase value in [0, pi/2) for right node i, left node j."""
    return phi_scalar_from_row(mix64((phase_key ^ i) & _MASK), j)


def phi_scalar_from_row(row_key: int, j: int) -> float:
    h = mix64(mix64((row_key ^ j) & _MASK))
    return (h >> 11) * _PHI_SCALE


def phi_row_key(phase_key: int, i: int) -> int:
    return mix64((phase_key ^ i) & _MASK)


def phi_from_row_key(row_key: int, cols) -> np.ndarray:
    """Vector of phases for one right node and many left indices."""
    h = counter_u64(row_key, cols)
    return (h >> np.uint64(11)) * _PHI_SCALE


def phi_edges(phase_key: int, rows, cols) -> np.ndarray:
    """Vector of phases for parallel arrays of right/left indices."""
    rk = _mix64_vec(np.uint64(phase_key) ^ np.asarray(rows, dtype=np.uint64))
    h = _mix64_vec(_mix64_vec(rk ^ np.asarray(cols, dtype=np.uint64)))
    return (h >> np.uint64(11)) * _PHI_SCALE
