"""Broker payments: offer, payment, confirmation, revocation.

The buying app relays documents and ciphertext but never holds the
user's credentials or completed account details. The broker backend (a
service peer on its own device) signs offers, verifies counter-signed
orders against the user's bank-registered public key, and returns a
signed receipt; a missing receipt revokes the transaction at the
deadline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from tcbsim.crypto.documents import (
    PersonalField,
    SignedDocument,
    make_document,
    verify_countersigned,
)
from tcbsim.crypto.envelope import Envelope, open_envelope
from tcbsim.errors import EnvelopeError, WireError
from tcbsim.gateway import ApiResult, ApiStatus
from tcbsim.apps.base import AppHarness
from tcbsim.peers import PeerCertificate
from tcbsim.wire import pack_fields, unpack_fields

RECEIPT_DEADLINE_US = 10 * 60 * 1_000_000

PHASES = ("offer", "payment", "confirmation", "revoked", "done")
_NEXT = {"offer": {"payment"}, "payment": {"confirmation"},
         "confirmation": {"done", "revoked"}, "done": set(), "revoked": set()}


@dataclass
class PaymentSession:
    broker: str
    symbol: str
    qty: int
    deadline_us: int
    phase: str = "offer"
    receipt_received: bool = False
    order_request_id: int = -1
    history: list = field(default_factory=list)

    def advance(self, phase: str) -> None:
        assert phase in _NEXT[self.phase], \
            f"illegal phase transition {self.phase} -> {phase}"
        self.history.append(phase)
        self.phase = phase


class PaymentApp(AppHarness):
    def __init__(self, device, app_id: str = "payments"):
        super().__init__(device, app_id)
        self.brokers: dict[str, str] = {}   # broker name -> device id
        self.preinstalled: set[str] = set()
        self.own_cert_bytes: bytes = b""
        self.sessions: dict[str, PaymentSession] = {}
        self._pending: dict[int, tuple] = {}

    def pay(self, broker: str, symbol: str, qty: int,
            deadline_us: int = RECEIPT_DEADLINE_US) -> None:
        session = PaymentSession(broker, symbol, qty, deadline_us)
        self.sessions[broker] = session
        self.trace("payment_started", {"broker": broker, "symbol": symbol})
        self.send(self.brokers[broker], "broker", "offer_request",
                  meta={"symbol": symbol, "qty": qty,
                        "buyer": self.device.identity.name})

    def on_network(self, src_device_id, kind, payload, meta) -> None:
        if kind == "offer_reply":
            broker = meta["broker"]
            session = self.sessions.get(broker)
            if session is None:
                return
            cert_bytes, offer_bytes = unpack_fields(payload, count=2)
            self.observe("offer", offer_bytes)
            if broker not in self.preinstalled:
                self.gateway.submit_certificate(self.app_id, cert_bytes)
            r = self.gateway.request_signature(self.app_id, broker,
                                               offer_bytes)
            if isinstance(r, ApiResult):
                self.observe("offer_rejected", f"{broker}:{r.reason}")
                self.trace("offer_rejected", {"broker": broker,
                                              "reason": r.reason})
                return
            session.advance("payment")
            self._pending[r] = ("order", broker)
        elif kind == "receipt":
            broker = meta["broker"]
            session = self.sessions.get(broker)
            if session is None or session.phase != "confirmation":
                return
            session.receipt_received = True
            r = self.gateway.display_signed_doc(self.app_id, broker, payload)
            if isinstance(r, ApiResult):
                self.observe("receipt_rejected", f"{broker}:{r.reason}")
                return
            self._pending[r] = ("receipt", broker)
        elif kind == "order_rejected":
            self.observe("order_rejected", meta.get("broker", ""))

    def on_api_result(self, result: ApiResult) -> None:
        intent = self._pending.pop(result.request_id, None)
        if intent is None:
            return
        what, broker = intent
        session = self.sessions.get(broker)
        if session is None:
            return
        if what == "order":
            if result.status is ApiStatus.COMPLETED:
                session.advance("confirmation")
                session.order_request_id = result.request_id
                self.send(self.brokers[broker], "broker", "order",
                          payload=result.sealed_output,
                          meta={"buyer": self.device.identity.name,
                                "buyer_cert": self.own_cert_bytes.hex()})
                self.device.loop.schedule(self.now + session.deadline_us,
                                          self._receipt_deadline, broker)
            else:
                self.observe("order_failed", f"{broker}:{result.status.value}")
        elif what == "receipt" and result.status is ApiStatus.COMPLETED:
            session.advance("done")
            self.trace("payment_done", {"broker": broker})
            self.observe("payment_done", broker)

    def _receipt_deadline(self, broker: str) -> None:
        session = self.sessions.get(broker)
        if session is None or session.phase != "confirmation":
            return
        if not session.receipt_received:
            session.advance("revoked")
            self.trace("revocation_notice", {"broker": broker})
            self.observe("revoked", broker)
            self.send(self.brokers[broker], "broker", "revoke",
                      meta={"buyer": self.device.identity.name})


class BrokerService(AppHarness):
    """The remote broker backend; the legitimate recipient of sealed
    orders, running as a service peer on its own device."""

    kind = "service"

    def __init__(self, device, app_id: str = "broker"):
        super().__init__(device, app_id)
        self.own_cert_bytes: bytes = b""
        self.registered_user_keys: dict[str, bytes] = {}
        self.offer_doc_type = "commerce"
        self.commission = "0.25%"
        self.withhold_receipt = False
        self.cleared: list[str] = []

    def _offer_body(self, symbol: str, qty: int) -> bytes:
        return json.dumps({"symbol": symbol, "qty": qty,
                           "price": "17.20", "commission": self.commission},
                          sort_keys=True).encode()

    def on_network(self, src_device_id, kind, payload, meta) -> None:
        if kind == "offer_request":
            offer = make_document(
                self.device.suite, self.device.identity.device_keys,
                self.device.identity.name, self.offer_doc_type,
                self._offer_body(meta["symbol"], int(meta["qty"])),
                fields=(PersonalField("name", "string"),
                        PersonalField("account", "digits")))
            self.send(src_device_id, "payments", "offer_reply",
                      payload=pack_fields(self.own_cert_bytes, offer.encode()),
                      meta={"broker": self.device.identity.name})
        elif kind == "order":
            self._handle_order(src_device_id, payload, meta)
        elif kind == "revoke":
            self.trace("revocation_received", {"buyer": meta["buyer"]})
            self.observe("revocation", meta["buyer"])

    def _handle_order(self, src_device_id, payload, meta) -> None:
        buyer = meta["buyer"]
        try:
            buyer_cert = PeerCertificate.decode(bytes.fromhex(
                meta["buyer_cert"]))
            env = Envelope.decode(payload)
            plaintext = open_envelope(self.device.suite,
                                      self.device.identity.device_keys,
                                      buyer_cert, env)
            order = SignedDocument.decode(plaintext)
        except (EnvelopeError, WireError) as e:
            self.trace("order_invalid", {"buyer": buyer,
                                         "error": type(e).__name__})
            self.send(src_device_id, "payments", "order_rejected",
                      meta={"broker": self.device.identity.name})
            return
        registered = self.registered_user_keys.get(buyer)
        if registered is None or not verify_countersigned(
                self.device.suite, registered,
                self.device.identity.device_keys.public, order):
            self.trace("order_countersig_invalid", {"buyer": buyer})
            self.send(src_device_id, "payments", "order_rejected",
                      meta={"broker": self.device.identity.name})
            return
        # the broker, as the sealed recipient, legitimately reads the order
        self.observe("order_plaintext", plaintext)
        self.cleared.append(buyer)
        self.trace("payment_cleared", {"buyer": buyer})
        if self.withhold_receipt:
            self.trace("receipt_withheld", {"buyer": buyer})
            return
        receipt = make_document(
            self.device.suite, self.device.identity.device_keys,
            self.device.identity.name, "receipt",
            json.dumps({"buyer": buyer, "status": "cleared"},
                       sort_keys=True).encode())
        self.send(src_device_id, "payments", "receipt",
                  payload=receipt.encode(),
                  meta={"broker": self.device.identity.name})
