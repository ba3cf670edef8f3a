"""Deterministic splittable randomness.

Every consumer draws from its own stream, keyed by (master_seed, role,
stream_index). A stream is a splitmix64 counter: draw i of the stream is
finalize(state0 + (i+1)*GAMMA), so streams can be split and replayed
independently of scheduling. The numba kernels implement the identical
update (see _kernels.py); test_rng checks the two byte-for-byte.
"""

from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF
GAMMA = 0x9E3779B97F4A7C15

# stream roles
ROLE_SAMPLE = 0      # one stream per sample index
ROLE_MAINTAIN = 1    # SampleStore selection / link-cut choices
ROLE_TAU0 = 2        # wilson-sampled reference tree
ROLE_GEN = 3         # update-stream generation
ROLE_REBUILD = 4     # per-update reseeding in rebuild replay mode


def mix64(z: int) -> int:
    """splitmix64 finalizer: invertible 64-bit hash."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def stream_state(master_seed: int, role: int, index: int) -> int:
    """Initial counter for stream (master_seed, role, index)."""
    s = mix64((master_seed & MASK64) ^ mix64(role + 1))
    return mix64(s ^ ((index * GAMMA) & MASK64))


class SplitMix64:
    """Stateful view of one stream; mirrors the kernel-side generator."""

    __slots__ = ("state",)

    def __init__(self, state: int):
        self.state = state & MASK64

    @classmethod
    def for_stream(cls, master_seed: int, role: int, index: int) -> "SplitMix64":
        return cls(stream_state(master_seed, role, index))

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return mix64(self.state)

    def randint(self, n: int) -> int:
        """Uniform int in [0, n) via 32-bit multiply-shift (n < 2**32)."""
        if n <= 0:
            raise ValueError("randint needs n >= 1")
        r = self.next_u64() >> 32
        return (r * n) >> 32

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def sample_without_replacement(self, population: int, k: int) -> list[int]:
        """k distinct indices from range(population), partial Fisher-Yates."""
        if not 0 <= k <= population:
            raise ValueError("sample size out of range")
        idx = list(range(population))
        for i in range(k):
            j = i + self.randint(population - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:k]

    def weighted_choice(self, weights) -> int:
        """Index drawn proportionally to non-negative weights."""
        total = float(sum(weights))
        if total <= 0.0:
            raise ValueError("weights must have positive sum")
        x = self.random() * total
        acc = 0.0
        for i, w in enumerate(weights):
            acc += float(w)
            if x < acc:
                return i
        return len(weights) - 1
