"""Counter-based random streams.

Every stochastic component draws from an RngStream keyed by (seed, stream_id).
Philox is counter-based, so streams with equal keys produce equal sequences
regardless of creation order, which keeps parallel episodes reproducible.
"""

from __future__ import annotations

import numpy as np

_U64 = 2**64


class RngStream:
    """Reproducible random stream: (seed, stream_id) fully determines draws."""

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._gen = np.random.Generator(
            np.random.Philox(key=[self.seed % _U64, self.stream_id % _U64])
        )

    def spawn(self, stream_id: int) -> "RngStream":
        """Independent stream under the same seed."""
        return RngStream(self.seed, stream_id)

    def uniform(self, lo: float, hi: float) -> float:
        return float(self._gen.uniform(lo, hi))

    def uniforms(self, lo, hi, n: int) -> np.ndarray:
        return self._gen.uniform(lo, hi, size=n)

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi]."""
        return int(self._gen.integers(lo, hi + 1))

    def box(self, lo, hi) -> tuple:
        """Uniform point in an axis-aligned box given per-axis bounds."""
        return tuple(float(self._gen.uniform(a, b)) for a, b in zip(lo, hi))

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"
