"""Portable deterministic 64-bit PRNG for drip simulation.

The generator is xorshift64* (shifts 12, 25, 27; multiplier
0x2545F4914F6CDD1D) with its state initialized by one step of splitmix64
applied to the user seed, so any seed, including 0, yields a well-mixed
nonzero state. Floats are drawn as ``(next_u64() >> 11) * 2**-53``, uniform
in [0, 1). All arithmetic is modulo 2**64.

The recipe is fixed: any implementation in any language that follows it
produces the same u64 sequence for the same seed, which is what makes drip
output reproducible across the engine, its tests, and remote clients.
"""

_MASK = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_STAR_MULT = 0x2545F4914F6CDD1D


def splitmix64(x: int) -> int:
    """One splitmix64 step: returns the mixed output for state ``x``."""
    x = (x + _SPLITMIX_GAMMA) & _MASK
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK
    x ^= x >> 31
    return x


class Xorshift64Star:
    """Seedable xorshift64* stream."""

    def __init__(self, seed: int):
        state = splitmix64(seed & _MASK)
        if state == 0:
            state = _SPLITMIX_GAMMA
        self._state = state

    def next_u64(self) -> int:
        s = self._state
        s ^= s >> 12
        s = (s ^ (s << 25)) & _MASK
        s ^= s >> 27
        self._state = s
        return (s * _STAR_MULT) & _MASK

    def next_float(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.next_float()
