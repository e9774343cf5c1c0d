"""Secure messaging over the trusted-core API.

The app never sees message plaintext on the secure path: it requests a
sealed message from the trusted core (the user types it on the trusted
path), relays the ciphertext, and on the receiving side hands the
envelope back for verified display. Certificates travel in-band over the
untrusted network; validation happens inside the trusted core.

Once a secure message has been exchanged with a contact, secure becomes
the default; a plaintext attempt to such a contact raises an alert and
is withheld until explicitly overridden.
"""

from __future__ import annotations

from tcbsim.errors import UnknownContact
from tcbsim.gateway import ApiResult, ApiStatus
from tcbsim.apps.base import AppHarness
from tcbsim.wire import pack_fields, unpack_fields


class MessagingApp(AppHarness):
    def __init__(self, device, app_id: str = "messaging"):
        super().__init__(device, app_id)
        self.contacts: dict[str, str] = {}     # name -> device id
        self.preinstalled: set[str] = set()    # certs already on the device
        self.own_cert_bytes: bytes = b""
        self.secure_default: dict[str, bool] = {}
        self._certs: dict[str, bytes] = {}
        self._awaiting_cert: dict[str, list] = {}
        self._pending: dict[int, tuple] = {}
        self.alerts: list[str] = []

    # ---- sending ----

    def msg_send(self, contact: str, text: str | None = None,
                 secure: bool | None = None, override: bool = False) -> None:
        if contact not in self.contacts:
            raise UnknownContact(contact)
        use_secure = secure if secure is not None else \
            self.secure_default.get(contact, False)
        if not use_secure:
            if self.secure_default.get(contact, False) and not override:
                # the app alerts and withholds: this contact talks secure
                self.alerts.append(contact)
                self.trace("plaintext_alert", {"contact": contact})
                self.observe("alert", f"plaintext_to_secure_contact:{contact}")
                return
            self.send(self.contacts[contact], "messaging", "plain_msg",
                      meta={"sender": self.device.identity.name,
                            "text": text or ""})
            self.observe("sent_plain", contact)
            return
        if contact not in self._certs and contact not in self.preinstalled:
            self._awaiting_cert.setdefault(contact, []).append(("send", None))
            self.send(self.contacts[contact], "messaging", "cert_request",
                      meta={"sender": self.device.identity.name})
            return
        self._do_secure_send(contact)

    def _do_secure_send(self, contact: str) -> None:
        if contact in self._certs:
            self.gateway.submit_certificate(self.app_id, self._certs[contact])
        r = self.gateway.request_data(self.app_id, contact)
        if isinstance(r, ApiResult):
            self.observe("send_rejected", f"{contact}:{r.reason}")
            return
        self._pending[r] = ("send", contact)

    # ---- receiving ----

    def on_network(self, src_device_id, kind, payload, meta) -> None:
        if kind == "cert_request":
            self.send(src_device_id, "messaging", "cert_reply",
                      payload=self.own_cert_bytes,
                      meta={"sender": self.device.identity.name})
        elif kind == "cert_reply":
            sender = meta["sender"]
            self._certs[sender] = payload
            self.observe("cert_received", sender)
            for intent in self._awaiting_cert.pop(sender, []):
                if intent[0] == "send":
                    self._do_secure_send(sender)
                else:
                    self._do_display(sender, intent[1])
        elif kind == "secure_msg":
            sender = meta["sender"]
            self.observe("envelope_received", payload)
            if sender not in self._certs and sender not in self.preinstalled:
                self._awaiting_cert.setdefault(sender, []).append(
                    ("display", payload))
                self.send(src_device_id, "messaging", "cert_request",
                          meta={"sender": self.device.identity.name})
                return
            self._do_display(sender, payload)
        elif kind == "plain_msg":
            # the insecure path: content is right here in the normal world
            self.observe("plain_message",
                         f"{meta['sender']}:{meta.get('text', '')}")

    def _do_display(self, sender: str, envelope_bytes: bytes) -> None:
        if sender in self._certs:
            self.gateway.submit_certificate(self.app_id, self._certs[sender])
        r = self.gateway.display_message(self.app_id, sender, envelope_bytes)
        if isinstance(r, ApiResult):
            self.observe("display_rejected", f"{sender}:{r.reason}")
            return
        self._pending[r] = ("display", sender)

    # ---- results ----

    def on_api_result(self, result: ApiResult) -> None:
        intent = self._pending.pop(result.request_id, None)
        if intent is None:
            return
        what, contact = intent
        if what == "send" and result.status is ApiStatus.COMPLETED:
            self.send(self.contacts[contact], "messaging", "secure_msg",
                      payload=result.sealed_output,
                      meta={"sender": self.device.identity.name})
            if not self.secure_default.get(contact, False):
                self.secure_default[contact] = True
                self.trace("secure_default_set", {"contact": contact})
            self.observe("sent_secure", contact)
        elif what == "display" and result.status is ApiStatus.COMPLETED:
            if not self.secure_default.get(contact, False):
                self.secure_default[contact] = True
                self.trace("secure_default_set", {"contact": contact})
            self.observe("read_secure", contact)
        else:
            self.observe("request_failed",
                         f"{what}:{contact}:{result.status.value}")
