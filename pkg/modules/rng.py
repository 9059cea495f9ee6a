"""
Seed derivation for order-independent Monte Carlo.

Every trial (or scheduling instance) i owns the stream seeded with
splitmix64(seed ^ i), so the outcome of trial i never depends on how
trials are spread over threads.
"""

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One SplitMix64 output for state x"""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """64-bit seed for trial `index` under base `seed`"""
    return splitmix64((seed ^ index) & MASK64)


class SeedStream:
    """Sequential SplitMix64 generator"""

    __slots__ = ('_state',)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    @classmethod
    def for_trial(cls, seed: int, index: int) -> 'SeedStream':
        return cls(derive_seed(seed, index))

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN_GAMMA) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform draw from range(n) (multiply-high reduction)"""
        if n <= 0:
            raise ValueError(f"cannot draw from an empty range (n={n})")
        return (self.next_u64() * n) >> 64
