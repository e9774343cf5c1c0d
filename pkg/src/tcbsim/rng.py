"""Deterministic random byte source.

All randomness in the simulator flows through injected DeterministicRng
instances so that a scenario seed fully determines every trace byte. The
generator is a SHA-256 counter construction: platform-independent, cheap,
and trivially cloneable (needed by the kernel model checker).

Not a secure entropy source; real entropy is out of scope by design.
"""

from __future__ import annotations

import hashlib

_DOMAIN = b"tcbsim.rng.v1"


def _seed_bytes(seed) -> bytes:
    if isinstance(seed, bytes):
        return seed
    if isinstance(seed, int):
        return seed.to_bytes(16, "big", signed=False)
    if isinstance(seed, str):
        return seed.encode("utf-8")
    raise TypeError(f"unsupported seed type: {type(seed)!r}")


class DeterministicRng:
    """SHA-256 counter DRBG keyed by (seed, label)."""

    __slots__ = ("_key", "_counter", "_buf")

    def __init__(self, seed, label: str = ""):
        self._key = hashlib.sha256(
            _DOMAIN + _seed_bytes(seed) + b"/" + label.encode("utf-8")
        ).digest()
        self._counter = 0
        self._buf = b""

    def bytes(self, n: int) -> bytes:
        if n < 0:
            raise ValueError("n must be non-negative")
        while len(self._buf) < n:
            block = hashlib.sha256(
                self._key + self._counter.to_bytes(8, "big")
            ).digest()
            self._counter += 1
            self._buf += block
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def u64(self) -> int:
        return int.from_bytes(self.bytes(8), "big")

    def random(self) -> float:
        # 53-bit mantissa, uniform in [0, 1)
        return (self.u64() >> 11) / (1 << 53)

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        # rejection sampling to avoid modulo bias
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.u64()
            if v < limit:
                return v % n

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def stream(self, label: str) -> "DeterministicRng":
        """Derive an independent child generator."""
        return DeterministicRng(self._key, label)

    def clone(self) -> "DeterministicRng":
        c = DeterministicRng.__new__(DeterministicRng)
        c._key = self._key
        c._counter = self._counter
        c._buf = self._buf
        return c
