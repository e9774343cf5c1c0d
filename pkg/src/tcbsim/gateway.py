"""The application API: five functions with role-based access control.

Every call is validated first (peer role, document type, signature,
sensor precondition); a failed check returns a rejection immediately and
no user interaction ever happens for that call. Accepted calls park an
entry in the kernel's pending queue until the user approves them in
secure-mode; results come back asynchronously, cryptographically sealed
so the calling app relays but never reads the sensitive payload.

There is deliberately no peer-authorization endpoint here: installing
roots or peers exists only on the secure-mode user path.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from tcbsim import taint
from tcbsim.crypto.documents import (
    SignedDocument,
    countersign,
    verify_originator,
)
from tcbsim.crypto.envelope import Envelope, open_envelope, seal
from tcbsim.errors import (
    CredentialFailure,
    EnvelopeError,
    MacFailure,
    QueueFull,
    SignatureFailure,
    TcbError,
    WireError,
)
from tcbsim.kernel import (
    ApiRequest,
    KIND_DISPLAY_MESSAGE,
    KIND_DISPLAY_SIGNED_DOC,
    KIND_ENABLE_SENSOR,
    KIND_REQUEST_DATA,
    KIND_REQUEST_SIGNATURE,
    MODE_SECURE,
    SENSOR_BLOCKED,
    SENSOR_DISCARDING,
    SENSOR_TEMP_ENABLED,
)
from tcbsim.peers import Role

REQUEST_TTL_US = 24 * 60 * 60 * 1_000_000  # unclaimed requests time out


class ApiStatus(enum.Enum):
    PEER_REJECTED = "peer_rejected"
    USER_DECLINED = "user_declined"
    COMPLETED = "completed"
    TIMED_OUT = "timed_out"
    DISCARD_WINDOW = "discard_window"
    SENSOR_NOT_BLOCKED = "sensor_not_blocked"


@dataclass
class ApiResult:
    request_id: int
    status: ApiStatus
    reason: str = ""
    sealed_output: bytes | None = None
    until: int | None = None     # discard windows
    timeout_us: int | None = None  # granted sensor enablement

    def __post_init__(self):
        # sealed output exists only on completion, and is always public
        assert self.sealed_output is None or (
            self.status is ApiStatus.COMPLETED
            and not taint.is_secret(self.sealed_output))


class ApiGateway:
    """One per device; entered from normal-world app code."""

    def __init__(self, device):
        self.device = device
        self._call_seq = 0
        self._origin: dict[int, tuple] = {}  # request_id -> (app_id, call)

    # -- dispatch table: the complete application-facing surface --

    def dispatch_table(self) -> dict:
        return {
            "request_data": self.request_data,
            "display_message": self.display_message,
            "request_signature": self.request_signature,
            "display_signed_doc": self.display_signed_doc,
            "enable_sensor": self.enable_sensor,
            "submit_certificate": self.submit_certificate,
        }

    # ---- call plumbing ----

    def _begin(self, kind: str, app_id: str, **fields) -> int:
        self._call_seq += 1
        call = self._call_seq
        self.device.charge_world_switch("api_call")
        self.device.trace("gateway", "api_call",
                          {"call": call, "kind": kind, "app": app_id,
                           **fields})
        return call

    def _finish(self, app_id: str, call: int, result: ApiResult) -> ApiResult:
        self.device.charge_world_switch("api_result")
        self.device.trace("gateway", "api_result",
                          {"call": call, "app": app_id,
                           "request_id": result.request_id,
                           "status": result.status.value,
                           "reason": result.reason})
        self.device.deliver_result(app_id, result)
        return result

    def _permission(self, call: int, ok: bool, basis: str) -> bool:
        self.device.trace("gateway", "permission_check",
                          {"call": call, "ok": ok, "basis": basis})
        return ok

    def _queue(self, call: int, app_id: str, request: ApiRequest) -> int | ApiResult:
        try:
            rid = self.device.kernel.enqueue_request(request, self.device.now)
        except QueueFull:
            return self._finish(app_id, call, ApiResult(
                -1, ApiStatus.PEER_REJECTED, reason="queue_full"))
        self._origin[rid] = (app_id, call)
        self.device.trace("gateway", "api_queued",
                          {"call": call, "request_id": rid})
        self.device.loop.schedule(self.device.now + REQUEST_TTL_US,
                                  self._expire, rid)
        return rid

    def _resolve(self, request_id: int, result: ApiResult) -> None:
        app_id, call = self._origin.pop(request_id)
        self._finish(app_id, call, result)

    def _expire(self, request_id: int) -> None:
        req = self.device.kernel.take_request(request_id)
        if req is not None:
            self._resolve(request_id,
                          ApiResult(request_id, ApiStatus.TIMED_OUT))

    def _user_interaction(self, request_id: int, what: str) -> None:
        self.device.trace("gateway", "user_interaction",
                          {"request_id": request_id, "what": what})

    def _lookup_contact(self, call: int, name: str):
        cert = self.device.resolve_peer(name)
        ok = (cert is not None and cert.role is Role.CONTACT
              and self.device.peer_chain_valid(name))
        self._permission(call, ok, "role:contact")
        return cert if ok else None

    def _lookup_signatory(self, call: int, name: str, doc_type: str):
        cert = self.device.resolve_peer(name)
        ok = (cert is not None and cert.role is Role.SIGNATORY
              and doc_type in cert.doc_types
              and self.device.peer_chain_valid(name))
        self._permission(call, ok, "role:signatory")
        return cert if ok else None

    # ---- the five API functions ----

    def request_data(self, app_id: str, recipient: str):
        call = self._begin("request_data", app_id, peer=recipient)
        cert = self._lookup_contact(call, recipient)
        if cert is None:
            return self._finish(app_id, call, ApiResult(
                -1, ApiStatus.PEER_REJECTED, reason="not_a_contact"))
        req = ApiRequest(KIND_REQUEST_DATA, recipient,
                         sorted(cert.groups), {"recipient_cert": cert},
                         app_id)
        return self._queue(call, app_id, req)

    def display_message(self, app_id: str, sender: str, envelope_bytes: bytes):
        call = self._begin("display_message", app_id, peer=sender)
        cert = self._lookup_contact(call, sender)
        if cert is None:
            return self._finish(app_id, call, ApiResult(
                -1, ApiStatus.PEER_REJECTED, reason="not_a_contact"))
        try:
            env = Envelope.decode(taint.data_of(envelope_bytes))
            log: list = []
            plaintext = open_envelope(self.device.suite,
                                      self.device.identity.device_keys,
                                      cert, env, log)
        except MacFailure:
            return self._finish(app_id, call, ApiResult(
                -1, ApiStatus.PEER_REJECTED, reason="mac_failure"))
        except SignatureFailure:
            return self._finish(app_id, call, ApiResult(
                -1, ApiStatus.PEER_REJECTED, reason="signature_failure"))
        except (EnvelopeError, WireError):
            return self._finish(app_id, call, ApiResult(
                -1, ApiStatus.PEER_REJECTED, reason="malformed"))
        secret_text = taint.secret(plaintext, self.device.identity.name)
        self.device.secret_ledger.register(plaintext, self.device.identity.name,
                                           "message_plaintext")
        req = ApiRequest(KIND_DISPLAY_MESSAGE, sender, sorted(cert.groups),
                         {"text": secret_text}, app_id)
        return self._queue(call, app_id, req)

    def request_signature(self, app_id: str, recipient: str, doc_bytes: bytes):
        call = self._begin("request_signature", app_id, peer=recipient)
        try:
            doc = SignedDocument.decode(taint.data_of(doc_bytes))
        except (WireError, TcbError):
            self._permission(call, False, "role:signatory")
            return self._finish(app_id, call, ApiResult(
                -1, ApiStatus.PEER_REJECTED, reason="malformed"))
        cert = self._lookup_signatory(call, recipient, doc.doc_type)
        if cert is None:
            return self._finish(app_id, call, ApiResult(
                -1, ApiStatus.PEER_REJECTED, reason="doc_type_or_role"))
        if doc.originator_name != recipient or not verify_originator(
                self.device.suite, cert.public_key, doc):
            return self._finish(app_id, call, ApiResult(
                -1, ApiStatus.PEER_REJECTED, reason="originator_signature"))
        if doc.counter_signature is not None:
            return self._finish(app_id, call, ApiResult(
                -1, ApiStatus.PEER_REJECTED, reason="already_countersigned"))
        req = ApiRequest(KIND_REQUEST_SIGNATURE, recipient,
                         sorted(cert.groups),
                         {"doc": doc, "recipient_cert": cert}, app_id)
        return self._queue(call, app_id, req)

    def display_signed_doc(self, app_id: str, sender: str, doc_bytes: bytes):
        call = self._begin("display_signed_doc", app_id, peer=sender)
        try:
            doc = SignedDocument.decode(taint.data_of(doc_bytes))
        except (WireError, TcbError):
            self._permission(call, False, "role:signatory")
            return self._finish(app_id, call, ApiResult(
                -1, ApiStatus.PEER_REJECTED, reason="malformed"))
        cert = self._lookup_signatory(call, sender, doc.doc_type)
        if cert is None:
            return self._finish(app_id, call, ApiResult(
                -1, ApiStatus.PEER_REJECTED, reason="doc_type_or_role"))
        if doc.originator_name != sender or not verify_originator(
                self.device.suite, cert.public_key, doc):
            return self._finish(app_id, call, ApiResult(
                -1, ApiStatus.PEER_REJECTED, reason="originator_signature"))
        req = ApiRequest(KIND_DISPLAY_SIGNED_DOC, sender, sorted(cert.groups),
                         {"doc": doc}, app_id)
        return self._queue(call, app_id, req)

    def enable_sensor(self, app_id: str, sensor: str):
        call = self._begin("enable_sensor", app_id, sensor=sensor)
        kernel = self.device.kernel
        if sensor not in kernel.policies:
            self._permission(call, False, "sensor:blocked")
            return self._finish(app_id, call, ApiResult(
                -1, ApiStatus.SENSOR_NOT_BLOCKED, reason="unknown_sensor"))
        kind, until = kernel.sensor_policy(sensor)
        now = self.device.now
        if kind == SENSOR_DISCARDING and now < until:
            # inside a discard window: auto-reply, no user interaction
            self._permission(call, False, "sensor:blocked")
            return self._finish(app_id, call, ApiResult(
                -1, ApiStatus.DISCARD_WINDOW, reason="discard_window",
                until=until))
        blocked_now = kind in (SENSOR_BLOCKED, SENSOR_DISCARDING)
        reblocked_soon = (kind == SENSOR_TEMP_ENABLED
                          and until - now <= kernel.config.reblock_grace_us)
        if not (blocked_now or reblocked_soon):
            self._permission(call, False, "sensor:blocked")
            return self._finish(app_id, call, ApiResult(
                -1, ApiStatus.SENSOR_NOT_BLOCKED, reason="sensor_open"))
        self._permission(call, True, "sensor:blocked")
        req = ApiRequest(KIND_ENABLE_SENSOR, "", (), {"sensor": sensor},
                         app_id, coalesce_key=sensor)
        return self._queue(call, app_id, req)

    # -- certificate transport (validation inside; grants nothing) --

    def submit_certificate(self, app_id: str, cert_bytes: bytes):
        self.device.charge_world_switch("api_call")
        try:
            accepted, name = self.device.accept_presented_cert(
                taint.data_of(cert_bytes))
        except (WireError, TcbError):
            accepted, name = False, ""
        self.device.trace("gateway", "cert_submit",
                          {"app": app_id, "peer": name, "accepted": accepted})
        self.device.charge_world_switch("api_result")
        return accepted

    # ---- secure-mode completions (called from the user path) ----

    def pending_for_user(self):
        return self.device.kernel.menu()

    def picker_for(self, request: ApiRequest) -> list[str]:
        """Repository files the request's recipient is allowed to read;
        anything else is simply not selectable."""
        cert = request.payload["recipient_cert"]
        return self.device.repository.files_readable_by(cert)

    def decline(self, request_id: int) -> None:
        req = self.device.kernel.take_request(request_id)
        if req is None:
            return
        self._user_interaction(request_id, "decline")
        self._resolve(request_id, ApiResult(request_id, ApiStatus.USER_DECLINED))

    def complete_request_data(self, request_id: int, source: tuple) -> None:
        """User approved a data request: source is ("text", value),
        ("file", path) or ("sensor", name)."""
        device = self.device
        req = device.kernel.peek_request(request_id)
        if req is None:
            raise TcbError(f"no pending request {request_id}")
        self._user_interaction(request_id, "approve_data")
        cert = req.payload["recipient_cert"]
        kind, value = source
        if kind == "text":
            plaintext = value if taint.is_secret(value) else \
                device.secure_text_input(str(value))
        elif kind == "file":
            if value not in self.picker_for(req):
                # not selectable; the request stays pending
                raise TcbError(f"file {value!r} is not in the picker")
            plaintext = device.repository.read(value)
        elif kind == "sensor":
            plaintext = device.read_sensor_secure(value)
        else:
            raise ValueError(f"unknown data source {kind!r}")
        device.kernel.take_request(request_id)
        env = seal(device.suite, device.identity.device_keys,
                   device.identity.name, cert.public_key, plaintext,
                   device.crypto_rng)
        device.trace("gateway", "sealed", {"request_id": request_id,
                                           "recipient": cert.name})
        self._resolve(request_id, ApiResult(
            request_id, ApiStatus.COMPLETED, sealed_output=env.encode()))

    def view_message(self, request_id: int) -> None:
        device = self.device
        req = device.kernel.take_request(request_id)
        if req is None:
            raise TcbError(f"no pending request {request_id}")
        self._user_interaction(request_id, "view_message")
        text = req.payload["text"]
        device.trace("kernel", "display_message",
                     {"request_id": request_id, "sender": req.peer_name,
                      "groups": req.peer_groups,
                      "text": taint.data_of(text).decode("utf-8", "replace")})
        self._resolve(request_id, ApiResult(request_id, ApiStatus.COMPLETED))

    def complete_request_signature(self, request_id: int, field_values: dict,
                                   credential) -> None:
        """User approved a signature request: complete the personal
        details, unlock the signing key and counter-sign."""
        device = self.device
        req = device.kernel.peek_request(request_id)
        if req is None:
            raise TcbError(f"no pending request {request_id}")
        self._user_interaction(request_id, "approve_signature")
        try:
            handle = device.repository.unlock_private_key(
                credential, device.kernel, device.now)
        except CredentialFailure:
            device.trace("kernel", "credential_failure",
                         {"request_id": request_id})
            if device.kernel.mode != MODE_SECURE:
                # third strike ended the session; the app sees a decline
                device.kernel.take_request(request_id)
                self._resolve(request_id, ApiResult(
                    request_id, ApiStatus.USER_DECLINED,
                    reason="credential_lockout"))
            raise
        device.trace("kernel", "key_unsealed", {"request_id": request_id})
        device.kernel.take_request(request_id)
        doc = req.payload["doc"]
        cert = req.payload["recipient_cert"]
        labeled_fields = {}
        for k, v in field_values.items():
            lv = v if taint.is_secret(v) else taint.secret(
                str(v).encode("utf-8"), device.identity.name)
            device.secret_ledger.register(taint.data_of(lv),
                                          device.identity.name,
                                          f"personal_field:{k}")
            labeled_fields[k] = lv
        signed = countersign(device.suite, handle.keypair, cert.public_key,
                             doc, labeled_fields)
        device.trace("kernel", "countersign",
                     {"request_id": request_id, "doc_type": doc.doc_type,
                      "recipient": cert.name})
        device.repository.archive_signed(signed)
        env = seal(device.suite, device.identity.device_keys,
                   device.identity.name, cert.public_key, signed.encode(),
                   device.crypto_rng)
        self._resolve(request_id, ApiResult(
            request_id, ApiStatus.COMPLETED, sealed_output=env.encode()))

    def view_signed_doc(self, request_id: int) -> None:
        device = self.device
        req = device.kernel.take_request(request_id)
        if req is None:
            raise TcbError(f"no pending request {request_id}")
        self._user_interaction(request_id, "view_signed_doc")
        doc = req.payload["doc"]
        device.trace("kernel", "display_signed_doc",
                     {"request_id": request_id, "sender": req.peer_name,
                      "groups": req.peer_groups, "doc_type": doc.doc_type,
                      "body": doc.body.decode("utf-8", "replace")})
        self._resolve(request_id, ApiResult(request_id, ApiStatus.COMPLETED))

    def complete_enable_sensor(self, request_id: int, decision: tuple) -> None:
        """User decided on a sensor request: ("enable", duration_us),
        ("discard", duration_us) or ("decline",)."""
        device = self.device
        req = device.kernel.take_request(request_id)
        if req is None:
            raise TcbError(f"no pending request {request_id}")
        self._user_interaction(request_id, "sensor_decision")
        sensor = req.payload["sensor"]
        kernel = device.kernel
        now = device.now
        if decision[0] == "enable":
            duration = min(int(decision[1]), kernel.config.temp_enable_max_us)
            kernel.sensor_set(now, sensor, SENSOR_TEMP_ENABLED,
                              until=now + duration)
            device.sync_sensor_routes()
            device.schedule_sensor_expiry(sensor, now + duration)
            self._resolve(request_id, ApiResult(
                request_id, ApiStatus.COMPLETED, timeout_us=duration))
        elif decision[0] == "discard":
            until = now + int(decision[1])
            kernel.sensor_set(now, sensor, SENSOR_DISCARDING, until=until)
            device.sync_sensor_routes()
            device.schedule_sensor_expiry(sensor, until)
            self._resolve(request_id, ApiResult(
                request_id, ApiStatus.DISCARD_WINDOW, until=until))
        else:
            self._resolve(request_id, ApiResult(
                request_id, ApiStatus.USER_DECLINED))
