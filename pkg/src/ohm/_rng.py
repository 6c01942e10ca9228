"""Counter-based uniform variates.

A draw is a pure function of ``(seed, replication, round, index)`` so that
token moves do not depend on iteration order.  The generator is SplitMix64:
a stream key is derived by chaining the finalizer over the three labels, then
draw ``i`` is ``mix(key + (i + 1) * GOLDEN)``.
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def _mix(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_keys(seed: int, replications, rnd: int) -> np.ndarray:
    """One 64-bit key per replication for round ``rnd``."""
    reps = np.asarray(replications, dtype=np.uint64)
    with np.errstate(over="ignore"):
        k = _mix(np.uint64(int(seed) & _MASK) + _GOLDEN)
        k = _mix(k ^ (reps * _M1 + _GOLDEN))
        k = _mix(k ^ (np.uint64(int(rnd) & _MASK) * _M2 + _GOLDEN))
    return k


def uniforms(keys: np.ndarray, index: np.ndarray) -> np.ndarray:
    """``U[0, 1)`` doubles for draw ``index`` of the stream ``keys``."""
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _mix(keys + (idx + np.uint64(1)) * _GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
