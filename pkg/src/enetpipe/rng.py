"""Seeded pseudo-random generation for synthetic fixtures and shuffling.

All randomness in the package flows through :class:`PortableRng`, a small
xoshiro256** generator seeded through splitmix64.  Using one explicit,
fully specified generator (rather than whatever numpy's default bit
generator happens to be) keeps every seeded fixture reproducible across
library versions and across reimplementations of the same byte-level
recurrence.
"""

import math

import numpy as np

_MASK64 = (1 << 64) - 1


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK64


class PortableRng:
    """xoshiro256** pseudo-random generator with splitmix64 seeding.

    The integer stream is exactly the reference recurrence; floating point
    values are derived only through exactly-rounded operations plus log/sqrt,
    so seeded sequences are stable in practice across platforms.
    """

    def __init__(self, seed: int):
        s = int(seed) & _MASK64
        state = []
        for _ in range(4):
            s = (s + 0x9E3779B97F4A7C15) & _MASK64
            z = s
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
            state.append(z ^ (z >> 31))
        self._state = state
        self._spare_normal = None

    def next_uint64(self) -> int:
        s0, s1, s2, s3 = self._state
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._state = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 bits of precision."""
        return (self.next_uint64() >> 11) * 2.0 ** -53

    def uniforms(self, n: int) -> np.ndarray:
        return np.array([self.random() for _ in range(n)], dtype=np.float64)

    def integer_below(self, n: int) -> int:
        """Unbiased integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        bound = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_uint64()
            if u < bound:
                return u % n

    def normal(self) -> float:
        """Standard normal draw (Marsaglia polar method, spare cached)."""
        if self._spare_normal is not None:
            value = self._spare_normal
            self._spare_normal = None
            return value
        while True:
            u = 2.0 * self.random() - 1.0
            v = 2.0 * self.random() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        factor = math.sqrt(-2.0 * math.log(s) / s)
        self._spare_normal = v * factor
        return u * factor

    def normals(self, n: int) -> np.ndarray:
        return np.array([self.normal() for _ in range(n)], dtype=np.float64)

    def normal_matrix(self, rows: int, cols: int) -> np.ndarray:
        return self.normals(rows * cols).reshape(rows, cols)

    def shuffle(self, values: np.ndarray) -> None:
        """In-place Fisher-Yates shuffle along the first axis."""
        for i in range(len(values) - 1, 0, -1):
            j = self.integer_below(i + 1)
            values[[i, j]] = values[[j, i]]

    def permutation(self, n: int) -> np.ndarray:
        idx = np.arange(n)
        self.shuffle(idx)
        return idx

    def spawn(self) -> "PortableRng":
        """Derive an independent child generator from this stream."""
        return PortableRng(self.next_uint64())
