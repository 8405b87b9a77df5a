"""Injectable clock and randomness.

Everything that needs the current time or random bytes takes a Runtime so
that demo scenarios can run fully deterministically (fixed clock, seeded
byte stream) and tests can pin golden values.
"""

from __future__ import annotations

import hashlib
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Callable


@dataclass
class Runtime:
    """Clock plus randomness source.

    ``clock`` returns epoch seconds. ``rand`` returns n random bytes.
    """

    clock: Callable[[], int]
    rand: Callable[[int], bytes]

    def now(self) -> int:
        return int(self.clock())

    @classmethod
    def system(cls) -> "Runtime":
        return cls(clock=lambda: int(time.time()), rand=os.urandom)

    @classmethod
    def seeded(
        cls, seed: int | str | bytes, fixed_clock: int | None = None
    ) -> "Runtime":
        """Deterministic runtime: SHA-256 counter stream, optionally frozen clock."""
        if isinstance(seed, int):
            seed = str(seed).encode("utf-8")
        elif isinstance(seed, str):
            seed = seed.encode("utf-8")
        stream = _HashStream(seed)
        if fixed_clock is None:
            clock = lambda: int(time.time())  # noqa: E731
        else:
            clock = lambda: int(fixed_clock)  # noqa: E731
        return cls(clock=clock, rand=stream.take)


@dataclass
class _HashStream:
    """Deterministic byte stream: SHA-256(seed || counter) blocks."""

    seed: bytes
    _counter: int = 0
    _buffer: bytes = b""
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def take(self, n: int) -> bytes:
        with self._lock:
            while len(self._buffer) < n:
                block = hashlib.sha256(
                    self.seed + self._counter.to_bytes(8, "big")
                ).digest()
                self._counter += 1
                self._buffer += block
            out, self._buffer = self._buffer[:n], self._buffer[n:]
            return out


SYSTEM = Runtime.system()
