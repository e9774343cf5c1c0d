"""One simulated handset: two worlds, peripherals, boot, persistence.

The device wires the kernel, registry, repository and gateway onto the
shared event loop, owns the interrupt routing and the cycle ledger, and
records everything normal-world apps ever observe (the raw material for
the confidentiality audit).
"""

from __future__ import annotations

from dataclasses import dataclass

from tcbsim import taint
from tcbsim.crypto.suites import KeyPair
from tcbsim.errors import TcbError
from tcbsim.gateway import ApiGateway
from tcbsim.kernel import (
    DELIVER,
    KernelConfig,
    KernelCore,
    MODE_SECURE,
    SENSOR_BLOCKED,
    SENSOR_DISCARDING,
    SENSOR_OPEN,
)
from tcbsim.peers import PeerCertificate, PeerRegistry, decode_root_fixture
from tcbsim.repository import Repository, SecureModeGate
from tcbsim.rng import DeterministicRng
from tcbsim.sim.interrupts import InterruptRouter, MASKED, NWORLD, SWORLD
from tcbsim.sim.ledger import CycleLedger
from tcbsim.sim.loop import EventLoop
from tcbsim.sim.storage import SecureStorage
from tcbsim.sim.trace import TraceLog


@dataclass
class DeviceIdentity:
    """The adopting user's key material.

    The device keypair is certified and lives inside the trusted core
    (messaging seal/unseal works without a credential); the personal
    signing key exists only inside the credential-sealed key file, and
    its public half is what the user registers with her bank."""

    name: str
    device_keys: KeyPair
    signing_pub: bytes


class DeviceBus:
    """Kernel side-effect sink wired to one device."""

    def __init__(self, device: "Device"):
        self.device = device

    def charge(self, what):
        self.device.ledger.charge(what)

    def led_changed(self, on):
        self.device.trace("device", "led_change", {"on": bool(on)})

    def touch_claimed(self):
        self.device.router.claim_touch()
        self.device.trace("device", "touch_route", {"world": SWORLD})

    def touch_released(self):
        self.device.router.release_touch()
        self.device.trace("device", "touch_route",
                          {"world": self.device.router.target("touch")})

    def trace(self, event, fields):
        self.device.trace("kernel", event, fields)


class Device:
    def __init__(self, device_id: str, loop: EventLoop, trace_log: TraceLog,
                 suite, rng: DeterministicRng, identity: DeviceIdentity,
                 kernel_config: KernelConfig | None = None,
                 costs: dict | None = None):
        self.device_id = device_id
        self.loop = loop
        self.trace_log = trace_log
        self.suite = suite
        self.identity = identity
        self.kernel_config = kernel_config or KernelConfig()
        self.secret_ledger = taint.SecretLedger()
        self.ledger = CycleLedger(costs)
        self.crypto_rng = rng.stream("crypto")
        self._training_rng = rng.stream("training")
        self._sensor_rng = rng.stream("sensors")
        self.storage = SecureStorage(suite, rng.stream("storage"))
        self.router = InterruptRouter(self.kernel_config.sensors)
        self.gate = SecureModeGate()
        self.registry = PeerRegistry(suite)
        self.repository = Repository(suite, self.gate, identity.name,
                                     self.secret_ledger)
        self.kernel: KernelCore | None = None
        self.gateway = ApiGateway(self)
        self.apps: dict = {}
        self.observations: dict[str, list] = {}
        self.touch_listeners: set[str] = set()
        self.sensor_listeners: dict[str, set[str]] = {}
        self.cert_cache: dict[str, PeerCertificate] = {}
        self.network = None
        self.root_fixture: bytes = b""
        self.initial_peers: list[PeerCertificate] = []
        self.initial_sensor_policies: dict[str, str] = {}
        self.booted = False
        self._signal_seq = 0

    # ---- plumbing ----

    @property
    def now(self) -> int:
        return self.loop.now

    def trace(self, comp: str, event: str, fields: dict | None = None) -> None:
        self.trace_log.emit(self.now, self.device_id, comp, event, fields)

    def charge_world_switch(self, reason: str) -> None:
        self.ledger.charge("world_switch")
        self.trace("device", "world_switch", {"reason": reason})

    def observe(self, app_id: str, kind: str, data) -> None:
        """Record something a normal-world app got to see."""
        self.observations.setdefault(app_id, []).append((self.now, kind, data))

    def deliver_result(self, app_id: str, result) -> None:
        self.observe(app_id, "api_result",
                     result.sealed_output if result.sealed_output is not None
                     else result.status.value)
        app = self.apps.get(app_id)
        if app is not None:
            app.on_api_result(result)

    # ---- boot / reboot ----

    def boot(self) -> None:
        """Secure world first (interrupt handlers, fixtures), then the
        normal-world OS and apps."""
        self.trace("device", "boot", {})
        self.ledger.charge("boot_init")
        self.trace("device", "sworld_init", {})
        self.router = InterruptRouter(self.kernel_config.sensors)
        self.registry = PeerRegistry(self.suite)
        if self.root_fixture:
            for cert in decode_root_fixture(self.root_fixture):
                self.registry.provision_root(cert)
        for cert in self.initial_peers:
            self.registry.provision_peer(cert)
        self.kernel = KernelCore(self.kernel_config, self._training_rng,
                                 DeviceBus(self))
        self.gate.attach(lambda: self.kernel.mode == MODE_SECURE)
        blob = self.storage.open_blob()
        if blob is not None:
            self.repository.load_blob(blob)
        self._apply_initial_sensor_policies()
        self.trace("device", "nworld_boot", {})
        self.booted = True
        for app in self.apps.values():
            app.on_boot()

    def reboot(self) -> None:
        # power cycle: repository persists via secure storage; the
        # observation logs are harness-side audit material and survive
        self.trace("device", "reboot", {})
        self.persist()
        self.boot()

    def persist(self) -> None:
        self.storage.seal_blob(self.repository.to_blob())

    def _apply_initial_sensor_policies(self) -> None:
        names = {"open": SENSOR_OPEN, "blocked": SENSOR_BLOCKED}
        for sensor, policy in self.initial_sensor_policies.items():
            self.kernel.policies[sensor] = (names[policy], 0)
        self.sync_sensor_routes()

    # ---- peer resolution (registry + validated presented certs) ----

    def resolve_peer(self, name: str) -> PeerCertificate | None:
        cert = self.registry.get(name)
        if cert is not None:
            return cert
        return self.cert_cache.get(name)

    def peer_chain_valid(self, name: str) -> bool:
        cert = self.resolve_peer(name)
        if cert is None:
            return False
        if self.registry.is_root(name):
            return True
        return self.registry.validate_chain(cert).accepted

    def accept_presented_cert(self, cert_bytes: bytes) -> tuple[bool, str]:
        cert = PeerCertificate.decode(cert_bytes)
        existing = self.resolve_peer(cert.name)
        if existing is not None:
            # names are never shadowed; re-presenting the same cert is fine
            return existing.encode() == cert.encode(), cert.name
        if not self.registry.validate_chain(cert).accepted:
            return False, cert.name
        self.cert_cache[cert.name] = cert
        return True, cert.name

    # ---- trusted-path input ----

    def press_sak(self) -> None:
        self.emit_interrupt("sak")

    def emit_interrupt(self, source: str, payload=None) -> None:
        if not self.booted:
            raise TcbError("device not booted")
        now = self.now
        if source == "sak":
            # unmaskable by construction: straight into the kernel
            self.trace("device", "interrupt", {"source": "sak",
                                               "world": SWORLD})
            self.kernel.sak_press(now)
            self.loop.schedule(self.kernel.idle_deadline, self._idle_check)
            return
        if source == "touch":
            target = self.router.target("touch")
            self.trace("device", "interrupt", {"source": "touch",
                                               "world": target})
            if target == NWORLD:
                for app_id in sorted(self.touch_listeners):
                    self.observe(app_id, "touch", payload)
            # secure-world touches are consumed by the trusted UI
            return
        if source in self.kernel.policies:
            self._signal_seq += 1
            signal_id = self._signal_seq
            if self.router.target(source) == MASKED:
                decision = "drop"
            else:
                gate = self.kernel.sensor_gate(now, source)
                decision = "deliver" if gate == DELIVER else "drop"
                self.sync_sensor_routes()
            self.trace("device", "interrupt",
                       {"source": source, "signal_id": signal_id,
                        "world": MASKED if decision == "drop" else NWORLD,
                        "decision": decision})
            if decision == "deliver":
                reading = {"sensor": source, "signal_id": signal_id,
                           "data": self._sensor_rng.bytes(8).hex()}
                for app_id in sorted(self.sensor_listeners.get(source, ())):
                    self.observe(app_id, "sensor_reading", reading)
            return
        raise TcbError(f"unknown interrupt source {source!r}")

    def _idle_check(self) -> None:
        if self.kernel is not None and self.booted:
            self.kernel.tick(self.now)

    def schedule_sensor_expiry(self, sensor: str, at: int) -> None:
        self.loop.schedule(at, self._sensor_expiry_check)

    def _sensor_expiry_check(self) -> None:
        if self.kernel is not None and self.booted:
            self.kernel.tick(self.now)
            self.sync_sensor_routes()

    def sync_sensor_routes(self) -> None:
        """Mirror kernel sensor policy into the interrupt controller:
        blocked and discarding sensors have their interrupts masked."""
        for sensor, (kind, until) in self.kernel.policies.items():
            if kind in (SENSOR_BLOCKED, SENSOR_DISCARDING):
                self.router.set_route(sensor, MASKED)
            else:
                self.router.set_route(sensor, NWORLD)

    def secure_text_input(self, text: str) -> taint.Labeled:
        """Text typed on the trusted path; secret from the first key."""
        if self.kernel.mode != MODE_SECURE:
            raise TcbError("secure text entry outside secure mode")
        data = text.encode("utf-8")
        self.secret_ledger.register(data, self.identity.name, "secure_text")
        return taint.secret(data, self.identity.name)

    def read_sensor_secure(self, sensor: str) -> taint.Labeled:
        """Sensor reading taken inside the trusted core for sealing."""
        data = self._sensor_rng.bytes(16)
        self.secret_ledger.register(data, self.identity.name,
                                    f"sensor:{sensor}")
        return taint.secret(data, self.identity.name)

    # ---- apps ----

    def add_app(self, app) -> None:
        self.apps[app.app_id] = app
        self.observations.setdefault(app.app_id, [])

    def register_touch_listener(self, app_id: str) -> None:
        self.touch_listeners.add(app_id)

    def register_sensor_listener(self, app_id: str, sensor: str) -> None:
        self.sensor_listeners.setdefault(sensor, set()).add(app_id)
