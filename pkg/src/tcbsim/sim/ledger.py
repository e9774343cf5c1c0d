"""Exact integer accounting of modeled processor-cycle overheads.

Costs are charged per event kind; totals are always count * cost, so the
ledger is linear in event counts by construction. The modeled core runs
at 600 MHz, making one world switch (3000 cycles) exactly 5 microseconds.
"""

from __future__ import annotations

CYCLES_PER_SECOND = 600_000_000
CYCLES_PER_US = CYCLES_PER_SECOND // 1_000_000  # 600

DEFAULT_COSTS = {
    "boot_init": 1600,       # secure-world init before the OS boots
    "world_switch": 3000,    # each normal<->secure crossing
    "sak_handling": 950_000, # screen takeover + menu, under the 1e6 budget
}


class CycleLedger:
    def __init__(self, costs: dict | None = None):
        self.costs = dict(DEFAULT_COSTS)
        if costs:
            self.costs.update(costs)
        self.counts = {k: 0 for k in self.costs}

    def charge(self, kind: str, times: int = 1) -> None:
        if kind not in self.costs:
            raise KeyError(f"unknown cost kind {kind!r}")
        self.counts[kind] += times

    def count(self, kind: str) -> int:
        return self.counts[kind]

    def cycles(self, kind: str) -> int:
        return self.counts[kind] * self.costs[kind]

    @property
    def total_cycles(self) -> int:
        return sum(self.cycles(k) for k in self.costs)

    def time_us(self, cycles: int) -> float:
        return cycles / CYCLES_PER_US

    def summary(self, label: str = "") -> str:
        lines = []
        if label:
            lines.append(f"[{label}]")
        for kind in sorted(self.costs):
            lines.append(
                f"{kind}: count={self.counts[kind]} cost={self.costs[kind]}"
                f" cycles={self.cycles(kind)}")
        total = self.total_cycles
        lines.append(f"total_cycles={total}")
        lines.append(f"total_time_us={total / CYCLES_PER_US:.3f}")
        return "\n".join(lines)

    def as_dict(self) -> dict:
        return {
            "counts": dict(self.counts),
            "costs": dict(self.costs),
            "total_cycles": self.total_cycles,
        }
