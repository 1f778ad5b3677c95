"""Counter-based pseudorandom numbers for reproducible sampling.

The generator is a SplitMix64 counter stream: for a 64-bit key ``k`` the
``i``-th raw output is ``mix64(k + i * GAMMA) mod 2**64`` where ``mix64`` is
the SplitMix64 finalizer (Steele, Lea & Flood 2014) and GAMMA is the odd
golden-ratio constant. Every output is a pure function of ``(key, i)``, so

* two consumers with the same key draw identical streams regardless of how
  the draws are batched, and
* independent substreams are derived by re-keying, never by splitting a
  shared sequence.

Shot ``s`` of a run seeded with ``seed`` uses the substream
``CounterRng(seed).substream(s)``; statistical debugger queries derive their
own keys via :func:`derive_key` so they cannot collide with shot streams.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_STREAM_SALT = 0xB5297A4D3C2E8F01
_QUERY_SALT = 0x6A09E667F3BCC909


def mix64(z: int) -> int:
    """SplitMix64 finalizer: bijective 64-bit avalanche mix."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(0xBF58476D1CE4E5B9)
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return z


def derive_key(seed: int, index: int, salt: int = _QUERY_SALT) -> int:
    """Derive an independent substream key from (seed, index)."""
    return mix64((mix64(seed ^ salt) + (index + 1) * GAMMA) & MASK64)


class CounterRng:
    """Deterministic counter-based generator over a 64-bit key."""

    __slots__ = ("key", "counter")

    def __init__(self, key: int, counter: int = 0):
        self.key = key & MASK64
        self.counter = counter

    def next_u64(self) -> int:
        self.counter += 1
        return mix64((self.key + self.counter * GAMMA) & MASK64)

    def next_double(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def doubles(self, count: int) -> np.ndarray:
        """Batch of uniform doubles; identical to `count` next_double calls."""
        counters = np.arange(self.counter + 1, self.counter + count + 1, dtype=np.uint64)
        raw = _mix64_vec(np.uint64(self.key) + counters * np.uint64(GAMMA))
        self.counter += count
        return (raw >> np.uint64(11)).astype(np.float64) * 2.0 ** -53

    def substream(self, index: int) -> "CounterRng":
        """Independent generator for substream `index` (e.g. one shot)."""
        return CounterRng(derive_key(self.key, index, _STREAM_SALT))

    def __repr__(self) -> str:  # pragma: no cover
        return f"CounterRng(key={self.key:#018x}, counter={self.counter})"
