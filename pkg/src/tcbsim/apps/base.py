"""Normal-world application harness.

Apps run over the (possibly compromised) OS: everything they get to see
is recorded through device.observe and later examined by the taint
audit. Service peers (a broker backend, say) reuse the harness but are
the legitimate remote endpoints of sealed traffic, so they are outside
the normal-world audit scope.
"""

from __future__ import annotations


class AppHarness:
    kind = "nworld"

    def __init__(self, device, app_id: str):
        self.device = device
        self.app_id = app_id
        device.add_app(self)

    # -- hooks --

    def on_boot(self) -> None:
        pass

    def on_network(self, src_device_id: str, kind: str, payload, meta) -> None:
        pass

    def on_api_result(self, result) -> None:
        pass

    # -- conveniences --

    @property
    def gateway(self):
        return self.device.gateway

    @property
    def now(self) -> int:
        return self.device.now

    def observe(self, kind: str, data) -> None:
        self.device.observe(self.app_id, kind, data)

    def send(self, dst_device_id: str, dst_app: str, kind: str,
             payload: bytes = b"", meta: dict | None = None) -> None:
        self.device.network.send(self.device, dst_device_id, dst_app, kind,
                                 payload, meta)

    def trace(self, event: str, fields: dict | None = None) -> None:
        self.device.trace(f"app:{self.app_id}", event, fields)

    # -- generic API exercises (scenario building blocks) --

    def enable_sensor(self, sensor: str) -> None:
        r = self.gateway.enable_sensor(self.app_id, sensor)
        if not isinstance(r, int):
            self.observe("enable_sensor_reply", r.status.value)

    def probe_data(self, recipient: str, count: int = 1) -> None:
        for _ in range(int(count)):
            r = self.gateway.request_data(self.app_id, recipient)
            if not isinstance(r, int):
                self.observe("probe_reply", r.reason or r.status.value)

    def listen_sensor(self, sensor: str) -> None:
        self.device.register_sensor_listener(self.app_id, sensor)

    def listen_touch(self) -> None:
        self.device.register_touch_listener(self.app_id)
