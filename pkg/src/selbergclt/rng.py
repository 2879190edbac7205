"""Counter-based random numbers for reproducible, stateless Monte Carlo.

Every variate is a pure function of a key ``(seed, sample_index, stream)``
run through a splitmix64-style finalizer, so parallel workers never share
state and a batch is bit-identical for a fixed seed regardless of how the
sample loop is scheduled.

Unit-circle draws avoid trigonometry: a point is drawn uniformly in the
unit disk by rejection (the attempt counter is folded into the key, so the
draw is still a pure function of the key) and the direction angle is
doubled by squaring, which keeps the law exactly uniform on the circle.

The numba and numpy implementations are required to agree bitwise; the
test suite enforces it.
"""

import numpy as np
from numba import njit

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

U64 = np.uint64


def mix64(x: int) -> int:
    """splitmix64 finalizer on a 64-bit integer (python-int reference)."""
    x = (x + _GAMMA) & _MASK
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK
    return x ^ (x >> 31)


def derive_seed(*parts: int) -> int:
    """Fold integer parts into one 64-bit seed (order-sensitive)."""
    h = 0
    for p in parts:
        h = mix64(h ^ (int(p) & _MASK))
    return h


@njit(inline="always", cache=True)
def _mix64_nb(x):
    x = (x + U64(_GAMMA)) & U64(_MASK)
    x = ((x ^ (x >> U64(30))) * U64(_MIX1)) & U64(_MASK)
    x = ((x ^ (x >> U64(27))) * U64(_MIX2)) & U64(_MASK)
    return x ^ (x >> U64(31))


@njit(inline="always", cache=True)
def key_uniform(seed, i, stream):
    """Uniform in [0, 1) with 53-bit resolution from key (seed, i, stream)."""
    h = _mix64_nb(U64(seed) ^ _mix64_nb(U64(i) ^ _mix64_nb(U64(stream))))
    return np.float64(h >> U64(11)) * (1.0 / 9007199254740992.0)


@njit(inline="always", cache=True)
def unit_circle(seed, i, stream):
    """One point (re, im) uniform on the unit circle for the given key."""
    base = _mix64_nb(U64(seed) ^ _mix64_nb(U64(i) ^ _mix64_nb(U64(stream))))
    attempt = U64(0)
    while True:
        h = _mix64_nb(base ^ (attempt * U64(_GAMMA)))
        a = np.float64(h >> U64(32)) * (2.0 / 4294967296.0) - 1.0
        b = np.float64(h & U64(0xFFFFFFFF)) * (2.0 / 4294967296.0) - 1.0
        r2 = a * a + b * b
        if 1e-12 < r2 <= 1.0:
            inv = 1.0 / r2
            return (a * a - b * b) * inv, 2.0 * a * b * inv
        attempt += U64(1)


def _mix64_np(x: np.ndarray) -> np.ndarray:
    x = (x + U64(_GAMMA)) & U64(_MASK)
    x = ((x ^ (x >> U64(30))) * U64(_MIX1)) & U64(_MASK)
    x = ((x ^ (x >> U64(27))) * U64(_MIX2)) & U64(_MASK)
    return x ^ (x >> U64(31))


def key_uniform_array(seed: int, idx: np.ndarray, stream: int) -> np.ndarray:
    """Vectorized twin of ``key_uniform`` (bitwise identical values)."""
    idx = np.asarray(idx, dtype=np.uint64)
    h = _mix64_np(U64(seed) ^ _mix64_np(idx ^ _mix64_np(np.full_like(idx, U64(stream)))))
    return (h >> U64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def unit_circle_array(seed: int, idx: np.ndarray, stream: int):
    """Vectorized twin of ``unit_circle`` (bitwise identical values)."""
    idx = np.asarray(idx, dtype=np.uint64)
    base = _mix64_np(U64(seed) ^ _mix64_np(idx ^ _mix64_np(np.full_like(idx, U64(stream)))))
    re = np.empty(idx.shape, dtype=np.float64)
    im = np.empty(idx.shape, dtype=np.float64)
    pending = np.ones(idx.shape, dtype=bool)
    attempt = 0
    while pending.any():
        # scalar uint64 products can overflow-warn in numpy; mask in python ints
        h = _mix64_np(base[pending] ^ U64((attempt * _GAMMA) & _MASK))
        a = (h >> U64(32)).astype(np.float64) * (2.0 / 4294967296.0) - 1.0
        b = (h & U64(0xFFFFFFFF)).astype(np.float64) * (2.0 / 4294967296.0) - 1.0
        r2 = a * a + b * b
        ok = (r2 > 1e-12) & (r2 <= 1.0)
        inv = np.zeros_like(r2)
        inv[ok] = 1.0 / r2[ok]
        sub = np.nonzero(pending)[0][ok]
        re[sub] = (a[ok] * a[ok] - b[ok] * b[ok]) * inv[ok]
        im[sub] = 2.0 * a[ok] * b[ok] * inv[ok]
        pending[sub] = False
        attempt += 1
    return re, im


def uniform_block(seed: int, n: int, stream: int = 0) -> np.ndarray:
    """n uniforms keyed by consecutive sample indices under one stream."""
    return key_uniform_array(seed, np.arange(n, dtype=np.uint64), stream)
