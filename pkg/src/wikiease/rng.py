"""Portable seeded PRNG for reproducible splits.

xoshiro256** (Blackman & Vigna) with its state expanded from a 64-bit seed
by SplitMix64.  Pure integer arithmetic, so a split computed here can be
reproduced bit-for-bit by any other implementation of the same two
generators:

    SplitMix64:   s += 0x9E3779B97F4A7C15
                  z = (s ^ (s >> 30)) * 0xBF58476D1CE4E5B9
                  z = (z ^ (z >> 27)) * 0x94D049BB133111EB
                  return z ^ (z >> 31)

    xoshiro256**: result = rotl(s1 * 5, 7) * 9
                  t = s1 << 17
                  s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3
                  s2 ^= t;  s3 = rotl(s3, 45)

Bounded draws use rejection sampling (reject ``x < 2**64 mod n``, return
``x mod n``); shuffles are Fisher-Yates from the last position down.
"""

from __future__ import annotations

from typing import MutableSequence

_MASK = (1 << 64) - 1


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


def splitmix64(state: int) -> tuple[int, int]:
    """Return ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


class Xoshiro256:
    def __init__(self, seed: int):
        if not 0 <= seed <= _MASK:
            raise ValueError("seed must be an unsigned 64-bit integer")
        st = seed
        s = []
        for _ in range(4):
            st, out = splitmix64(st)
            s.append(out)
        self._s = s

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError("n must be positive")
        reject = (1 << 64) % n
        while True:
            x = self.next_u64()
            if x >= reject:
                return x % n

    def shuffle(self, seq: MutableSequence) -> None:
        for i in range(len(seq) - 1, 0, -1):
            j = self.below(i + 1)
            seq[i], seq[j] = seq[j], seq[i]
