"""The scripted human operating the phone.

The agent models what a (trained or untrained) user physically does:
press the attention key, check the indicator LED, pick menu entries,
type on the trusted path, enter the credential. A compliant agent
follows the training rule: before acting it looks at the LED and
re-presses the key if the light is off; a non-compliant agent acts
regardless, which is exactly what the training ceremony punishes.
"""

from __future__ import annotations

from tcbsim import taint
from tcbsim.errors import CredentialFailure, TcbError
from tcbsim.kernel import (
    CAUSE_EXIT_BUTTON,
    LED_ON,
    MODE_SECURE,
    SENSOR_BLOCKED,
    SENSOR_DISCARDING,
    SENSOR_OPEN,
    SENSOR_TEMP_ENABLED,
)

_POLICY_NAMES = {"open": SENSOR_OPEN, "blocked": SENSOR_BLOCKED,
                 "temp_enabled": SENSOR_TEMP_ENABLED,
                 "discarding": SENSOR_DISCARDING}


class UserAgent:
    def __init__(self, device, credential: str = "", compliant: bool = True):
        self.device = device
        self.credential = credential
        self.compliant = compliant

    # ---- physical actions ----

    def press_sak(self) -> None:
        self.device.press_sak()

    def exit_secure(self) -> None:
        # the Exit entry is the escape hatch; it is never ceremony-gated
        self.device.kernel.exit_secure(self.device.now, CAUSE_EXIT_BUTTON)

    def check_indicator(self) -> bool:
        return self.device.kernel.led == LED_ON

    # ---- ceremony-gated action helper ----

    def _act(self, action: str) -> bool:
        """Apply the training rule, then ask the kernel's ceremony gate.
        Returns False when the action was withheld (negative feedback)."""
        if self.compliant and not self.check_indicator():
            self.press_sak()
        return self.device.kernel.user_action(self.device.now, action)

    # ---- pending-request handling ----

    def _find_request(self, kind: str | None = None, app: str | None = None,
                      peer: str | None = None):
        menu = self.device.kernel.menu()
        for request_id, rkind, rpeer, _groups in menu.requests:
            req = self.device.kernel.peek_request(request_id)
            if kind is not None and rkind != kind:
                continue
            if app is not None and req.origin_app_id != app:
                continue
            if peer is not None and rpeer != peer:
                continue
            return request_id
        raise TcbError(f"no pending request matches kind={kind} app={app} "
                       f"peer={peer}")

    def approve_data(self, source_kind: str, value: str = "",
                     kind: str | None = "request_data",
                     app: str | None = None, peer: str | None = None) -> bool:
        if not self._act("approve_data"):
            return False
        rid = self._find_request(kind, app, peer)
        self.device.gateway.complete_request_data(rid, (source_kind, value))
        return True

    def view_message(self, app: str | None = None,
                     peer: str | None = None) -> bool:
        if not self._act("view_message"):
            return False
        rid = self._find_request("display_message", app, peer)
        self.device.gateway.view_message(rid)
        return True

    def approve_signature(self, fields: dict, credential: str | None = None,
                          app: str | None = None,
                          peer: str | None = None) -> bool:
        if not self._act("approve_signature"):
            return False
        rid = self._find_request("request_signature", app, peer)
        cred = credential if credential is not None else self.credential
        try:
            self.device.gateway.complete_request_signature(rid, fields, cred)
        except CredentialFailure:
            return False
        return True

    def view_signed_doc(self, app: str | None = None,
                        peer: str | None = None) -> bool:
        if not self._act("view_signed_doc"):
            return False
        rid = self._find_request("display_signed_doc", app, peer)
        self.device.gateway.view_signed_doc(rid)
        return True

    def sensor_decision(self, decision: tuple,
                        app: str | None = None) -> bool:
        if not self._act("sensor_decision"):
            return False
        rid = self._find_request("enable_sensor", app)
        self.device.gateway.complete_enable_sensor(rid, decision)
        return True

    def decline(self, kind: str | None = None, app: str | None = None,
                peer: str | None = None) -> bool:
        if not self._act("decline"):
            return False
        rid = self._find_request(kind, app, peer)
        self.device.gateway.decline(rid)
        return True

    # ---- built-in services ----

    def set_sensor(self, sensor: str, policy: str,
                   duration_us: int = 0) -> bool:
        if not self._act("sensor_set"):
            return False
        kind = _POLICY_NAMES[policy]
        until = (self.device.now + duration_us) if duration_us else 0
        self.device.kernel.sensor_set(self.device.now, sensor, kind, until)
        self.device.sync_sensor_routes()
        if until:
            self.device.schedule_sensor_expiry(sensor, until)
        return True

    def repo_write(self, path: str, text: str, acl=()) -> bool:
        if not self._act("repo_write"):
            return False
        content = self.device.secure_text_input(text)
        self.device.repository.write(path, content, acl)
        return True

    def repo_read(self, path: str):
        if not self._act("repo_read"):
            return None
        return self.device.repository.read(path)

    def repo_delete(self, path: str) -> bool:
        if not self._act("repo_delete"):
            return False
        self.device.repository.delete(path)
        return True

    def list_archive(self):
        if not self._act("list_archive"):
            return None
        return self.device.repository.list_signed()

    def admin_install(self, password: str, cert_bytes: bytes) -> bool:
        if not self._act("admin_install"):
            return False
        from tcbsim.peers import PeerCertificate
        cert = PeerCertificate.decode(cert_bytes)
        self.device.registry.admin_authorize(password, cert)
        self.device.trace("kernel", "admin_install", {"peer": cert.name})
        return True

    # ---- free-typing (spoof-resistance modeling) ----

    def type_sensitive(self, text: str):
        """Type something the user believes is on a trusted prompt.

        A trained user first checks the LED (re-pressing the key if
        dark), which lands the keystrokes on the trusted path. An
        untrained user types straight into whatever screen is showing:
        in normal mode that means normal-world touch events a sniffer
        can observe."""
        if self.compliant and not self.check_indicator():
            self.press_sak()
        if self.device.kernel.mode == MODE_SECURE:
            if not self.device.kernel.user_action(self.device.now, "type"):
                return None
            return self.device.secure_text_input(text)
        for ch in text:
            self.device.emit_interrupt("touch", {"char": ch})
        return None
