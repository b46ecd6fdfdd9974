"""Counter-based PRNG whose entire state fits in one short string.

World states must carry their generator state through JSON round trips with
byte-stable serialization, so the stdlib Mersenne Twister state (a ~2.5 kB
tuple) is a poor fit.  splitmix64 indexed by (seed, counter) gives a compact
opaque token, O(1) serialization, and trivially reproducible streams.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


@dataclass
class StateRng:
    """Immutable-by-convention generator: every draw returns a new counter."""

    seed: int
    counter: int = 0

    def serialize(self) -> str:
        return f"splitmix64:{self.seed}:{self.counter}"

    @staticmethod
    def deserialize(token: str) -> "StateRng":
        scheme, seed, counter = token.split(":")
        if scheme != "splitmix64":
            raise ValueError(f"unknown rng scheme {scheme!r}")
        return StateRng(int(seed), int(counter))

    def _draw(self) -> tuple[int, "StateRng"]:
        value = _mix((self.seed + (self.counter + 1) * _GOLDEN) & _MASK)
        return value, StateRng(self.seed, self.counter + 1)

    def next_int(self, n: int) -> tuple[int, "StateRng"]:
        """Uniform integer in [0, n).  Modulo bias is negligible for the tiny
        ranges used by the engine and irrelevant to determinism."""
        if n <= 0:
            raise ValueError("n must be positive")
        value, nxt = self._draw()
        return value % n, nxt

    def next_float(self) -> tuple[float, "StateRng"]:
        value, nxt = self._draw()
        return (value >> 11) / float(1 << 53), nxt


def stable_stream_seed(*parts: object) -> int:
    """Deterministic 63-bit seed derived from a tuple of labels.

    Used wherever a named sub-stream is needed (per-scenario streams, mutator
    streams, CLI sub-streams); stable across processes, unlike ``hash``.
    """
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


__all__ = ["StateRng", "stable_stream_seed"]
