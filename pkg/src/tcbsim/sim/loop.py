"""Deterministic discrete-event loop with a virtual clock.

Events are totally ordered by (time, insertion sequence); processing
never consults the wall clock. External drivers (the UI bridge) inject
events through a thread-safe queue drained at the head of each step.
"""

from __future__ import annotations

import heapq
import threading


class EventLoop:
    def __init__(self):
        self.now = 0
        self._heap: list = []
        self._seq = 0
        self._injected: list = []
        self._inject_lock = threading.Lock()

    def schedule(self, at: int, fn, *args) -> None:
        if at < self.now:
            raise ValueError(f"cannot schedule into the past ({at} < {self.now})")
        heapq.heappush(self._heap, (at, self._seq, fn, args))
        self._seq += 1

    def post(self, fn, *args) -> None:
        self.schedule(self.now, fn, *args)

    def inject(self, fn, *args) -> None:
        """Thread-safe external injection; runs at the current virtual
        time, in arrival order, before the next scheduled event."""
        with self._inject_lock:
            self._injected.append((fn, args))

    def _drain_injected(self) -> bool:
        with self._inject_lock:
            batch, self._injected = self._injected, []
        for fn, args in batch:
            fn(self.now)
        return bool(batch)

    def step(self) -> bool:
        """Process injected events, then one scheduled event."""
        ran = self._drain_injected()
        if not self._heap:
            return ran
        at, _, fn, args = heapq.heappop(self._heap)
        self.now = at
        fn(*args)
        return True

    def run(self, max_events: int = 1_000_000) -> None:
        """Drain the queue completely."""
        for _ in range(max_events):
            if not self.step():
                return
        raise RuntimeError("event budget exhausted; runaway scenario?")

    def advance_to(self, t: int) -> None:
        """Run everything scheduled up to and including time t, then move
        the clock there (used by the real-time bridge)."""
        while self._heap and self._heap[0][0] <= t:
            self.step()
        self._drain_injected()
        if t > self.now:
            self.now = t

    @property
    def pending_count(self) -> int:
        return len(self._heap)
