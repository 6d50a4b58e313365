"""Seeded random streams with replayable draw counters.

Every source of randomness in a session is a named SplitMix64 stream derived
from one master seed. SplitMix64 is used instead of `random.Random` so the
compiled kernels can reproduce the exact same draws (the algorithm is a few
64-bit integer ops, trivially portable to C), and so sequences are stable
across Python versions. Draw counters are recorded in the event log, which
lets a restarted service fast-forward a stream to where it left off.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer: avalanche a 64-bit value."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def fnv1a64(text: str) -> int:
    """FNV-1a hash of a stream label, used for seed derivation."""
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK
    return h


def derive_seed(master_seed: int, label: str) -> int:
    """Deterministically derive an independent stream seed from the master."""
    return mix64((master_seed & _MASK) ^ fnv1a64(label))


class Stream:
    """One SplitMix64 sequence with a draw counter.

    `count` is the number of draws consumed so far; `skip_to(n)` replays a
    stream to a logged position.
    """

    __slots__ = ("state", "count")

    def __init__(self, seed: int, count: int = 0):
        self.state = seed & _MASK
        self.count = 0
        if count:
            self.skip_to(count)

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        self.count += 1
        return mix64(self.state)

    def uniform(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 1.1102230246251565e-16  # 2**-53

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], inclusive."""
        return lo + int(self.uniform() * (hi - lo + 1))

    def skip_to(self, count: int) -> None:
        if count < self.count:
            raise ValueError("cannot rewind a stream")
        while self.count < count:
            self.next_u64()


class StreamSet:
    """The named streams owned by one session."""

    LABELS = ("motion", "user", "fact", "projection", "persona", "latency")

    def __init__(self, master_seed: int):
        self.master_seed = master_seed
        self.streams = {label: Stream(derive_seed(master_seed, label)) for label in self.LABELS}

    def __getitem__(self, label: str) -> Stream:
        return self.streams[label]

    def counters(self) -> dict[str, int]:
        return {label: s.count for label, s in self.streams.items()}

    def skip_to(self, counters: dict[str, int]) -> None:
        for label, count in counters.items():
            self.streams[label].skip_to(count)
