"""xoshiro256** generator seeded through splitmix64.

Stream ``k`` of a master seed takes splitmix64 outputs ``4k .. 4k+3`` (the
splitmix64 sequence started at the master seed) as its 256-bit state. This is
the splitting rule used for every Monte-Carlo batch; the compiled kernels
implement the same arithmetic.
"""

from __future__ import annotations

NAME = "xoshiro256** (splitmix64 seeding, stream k = splitmix64 outputs 4k..4k+3)"

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> tuple[int, int]:
    """Advance a splitmix64 state; returns ``(new_state, output)``."""
    x = (x + GOLDEN_GAMMA) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return x, z ^ (z >> 31)


def stream_state(seed: int, stream: int = 0) -> list[int]:
    x = (seed + 4 * stream * GOLDEN_GAMMA) & MASK64
    out = []
    for _ in range(4):
        x, z = splitmix64(x)
        out.append(z)
    return out


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256StarStar:
    def __init__(self, state):
        s = [int(v) & MASK64 for v in state]
        if len(s) != 4 or not any(s):
            raise ValueError("state must be four 64-bit words, not all zero")
        self.s = s

    @classmethod
    def from_seed(cls, seed: int, stream: int = 0) -> "Xoshiro256StarStar":
        return cls(stream_state(seed, stream))

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def next_double(self) -> float:
        # 53 high bits -> [0, 1)
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)
