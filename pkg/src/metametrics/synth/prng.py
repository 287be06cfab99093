"""SplitMix64 pseudo-random generator.

Fixed algorithm so every implementation produces the same synthetic corpus:

    state <- (state + 0x9E3779B97F4A7C15) mod 2**64
    z <- state
    z <- ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z <- ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    output z ^ (z >> 31)

Uniform floats take the top 53 bits: ``(z >> 11) * 2**-53`` in [0, 1).
Normal deviates are Irwin-Hall approximations (sum of 12 uniforms minus 6),
which only need additions and therefore round identically everywhere.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Output number ``index + 1`` of the stream seeded with ``seed``, computed directly."""
    return mix64(seed + (index + 1) * GAMMA)


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return mix64(self.state)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def normal(self) -> float:
        """Approximately standard normal (Irwin-Hall, n = 12)."""
        total = 0.0
        for _ in range(12):
            total += self.uniform()
        return total - 6.0
