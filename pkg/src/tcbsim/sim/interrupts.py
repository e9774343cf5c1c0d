"""Interrupt routing between the two worlds.

The routing table says which world handles each peripheral source. The
attention key and the LED are pinned to the secure world at the type
level: there is no call that can remap them, mirroring hardware that the
OS simply cannot address. Entering secure-mode atomically claims the
touch screen and remembers the previous target so exit can restore it.
"""

from __future__ import annotations

from tcbsim.errors import UnroutablePeripheral

SWORLD = "sworld"
NWORLD = "nworld"
MASKED = "masked"

PINNED_SOURCES = frozenset({"sak", "led"})


class InterruptRouter:
    def __init__(self, sensors=("mic", "camera", "gps")):
        # boot default: everything to the OS except the pinned sources
        self._routes = {"touch": NWORLD}
        for s in sensors:
            self._routes[s] = NWORLD
        self._saved_touch = None

    def target(self, source: str) -> str:
        if source in PINNED_SOURCES:
            return SWORLD
        return self._routes.get(source, NWORLD)

    def set_route(self, source: str, target: str) -> None:
        if source in PINNED_SOURCES:
            raise UnroutablePeripheral(source)
        if target not in (SWORLD, NWORLD, MASKED):
            raise ValueError(f"unknown target {target!r}")
        self._routes[source] = target

    def claim_touch(self) -> None:
        """Secure-mode entry: route touch to the secure world, keeping
        the previous peripheral state for restoration."""
        self._saved_touch = self._routes["touch"]
        self._routes["touch"] = SWORLD

    def release_touch(self) -> None:
        self._routes["touch"] = (
            self._saved_touch if self._saved_touch is not None else NWORLD)
        self._saved_touch = None

    def snapshot(self) -> dict:
        return dict(self._routes)
