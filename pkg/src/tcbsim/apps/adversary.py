"""Adversarial applications with full normal-world privileges.

Models an attacker who owns the OS: it can register for every
normal-world input event, draw anything on the screen, and call the
application API at will. Every observation lands in the app log the
taint audit inspects; a strategy "failing" is itself a data point.
"""

from __future__ import annotations

from tcbsim.gateway import ApiResult
from tcbsim.apps.base import AppHarness

STRATEGIES = ("keystroke_sniff", "screen_spoof", "repo_read",
              "sensor_poll", "api_probe")


class AdversaryApp(AppHarness):
    def __init__(self, device, app_id: str = "adversary"):
        super().__init__(device, app_id)
        self.strategies_run: list[str] = []

    def run(self, strategy: str) -> None:
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown adversary strategy {strategy!r}")
        self.strategies_run.append(strategy)
        self.trace("adversary_strategy", {"strategy": strategy})
        getattr(self, f"_{strategy}")()

    def _keystroke_sniff(self) -> None:
        # a privileged keylogger: sees every touch event the OS sees
        self.device.register_touch_listener(self.app_id)
        self.observe("sniffer_armed", "touch")

    def _screen_spoof(self) -> None:
        # pixel-perfect fake of the secure screen; it cannot light the
        # hardware LED, and a trained user re-presses the key first
        self.device.register_touch_listener(self.app_id)
        self.trace("spoof_screen_shown", {})
        self.observe("spoof_screen_shown", "fake_secure_prompt")

    def _repo_read(self) -> None:
        # the private repository has no application endpoint at all
        table = self.device.gateway.dispatch_table()
        for probe in ("repo_read", "read_file", "list_files",
                      "unlock_private_key", "admin_authorize"):
            self.observe("repo_probe",
                         f"{probe}:{'present' if probe in table else 'absent'}")

    def _sensor_poll(self) -> None:
        for sensor in self.device.kernel.policies:
            self.device.register_sensor_listener(self.app_id, sensor)
        self.observe("sensor_poll_armed", "all")

    def _api_probe(self) -> None:
        for name in ("BankOfAmerlca", "bank ", "Bank0fA", "root ca",
                     "aliceа"):  # look-alikes and padding
            r = self.device.gateway.request_data(self.app_id, name)
            status = r.status.value if isinstance(r, ApiResult) else "queued"
            self.observe("api_probe", f"{name!r}:{status}")
