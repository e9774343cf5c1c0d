"""Simulated network between devices.

Messages are opaque byte payloads under a JSON header; delivery is a
timed event with configurable delay and drop rules. The wire log feeds
the confidentiality audit: nothing secret-labeled may ever appear here.
"""

from __future__ import annotations

import json

from tcbsim import taint


class SimNetwork:
    def __init__(self, loop, trace_log, delay_us: int = 50_000):
        self.loop = loop
        self.trace_log = trace_log
        self.delay_us = delay_us
        self.devices: dict[str, object] = {}
        self.log: list[dict] = []
        self.drop_links: set[tuple] = set()

    def register(self, device) -> None:
        self.devices[device.device_id] = device
        device.network = self

    def send(self, src_device, dst_device_id: str, dst_app: str,
             kind: str, payload: bytes = b"", meta: dict | None = None) -> None:
        now = self.loop.now
        self.log.append({"t": now, "src": src_device.device_id,
                         "dst": dst_device_id, "app": dst_app, "kind": kind,
                         "payload": payload,
                         "meta_blob": json.dumps(meta or {}, sort_keys=True)})
        self.trace_log.emit(now, src_device.device_id, "network", "net_send",
                            {"dst": dst_device_id, "app": dst_app,
                             "kind": kind, "size": len(taint.data_of(payload))})
        if (src_device.device_id, dst_device_id) in self.drop_links:
            self.trace_log.emit(now, src_device.device_id, "network",
                                "net_drop", {"dst": dst_device_id,
                                             "kind": kind})
            return
        self.loop.schedule(now + self.delay_us, self._deliver,
                           src_device.device_id, dst_device_id, dst_app,
                           kind, payload, meta or {})

    def _deliver(self, src_id, dst_id, dst_app, kind, payload, meta) -> None:
        device = self.devices.get(dst_id)
        if device is None:
            return
        self.trace_log.emit(self.loop.now, dst_id, "network", "net_recv",
                            {"src": src_id, "app": dst_app, "kind": kind})
        app = device.apps.get(dst_app)
        if app is not None:
            app.on_network(src_id, kind, payload, meta)
