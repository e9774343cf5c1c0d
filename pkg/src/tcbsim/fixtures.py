"""Deterministic world construction: PKI, devices, apps, user agents.

Everything (keys, certificates, sealed key files, repository blobs) is
derived from one seed, so a scenario is reproducible byte for byte. The
scenario runner and the test suite both build worlds through this
module.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from tcbsim.apps import (
    AdversaryApp,
    BrokerService,
    MessagingApp,
    PaymentApp,
    SimNetwork,
    UserAgent,
)
from tcbsim.crypto import KdfParams, get_suite, seal_keyfile
from tcbsim.crypto.suites import KeyPair
from tcbsim.kernel import KernelConfig
from tcbsim.peers import (
    PeerCertificate,
    Role,
    encode_root_fixture,
    issue_certificate,
    self_signed_root,
)
from tcbsim.repository import Repository, SecureModeGate
from tcbsim.rng import DeterministicRng
from tcbsim.sim import Device, DeviceIdentity, EventLoop, TraceLog
from tcbsim.sim import audit as sim_audit

FIXTURE_KDF = KdfParams(cost=1 << 12)

_ROLES = {"contact": Role.CONTACT, "signatory": Role.SIGNATORY, "ca": Role.CA}


@dataclass
class Principal:
    name: str
    device_keys: KeyPair
    signing_keys: KeyPair
    cert: PeerCertificate
    role: Role


@dataclass
class World:
    seed: int
    suite: object
    loop: EventLoop
    trace: TraceLog
    network: SimNetwork
    roots: dict = field(default_factory=dict)       # name -> cert
    issuer_keys: dict = field(default_factory=dict)  # CA name -> KeyPair
    principals: dict = field(default_factory=dict)
    devices: dict = field(default_factory=dict)
    agents: dict = field(default_factory=dict)
    credentials: dict = field(default_factory=dict)
    leak_demo: bool = False

    def run(self, max_events: int = 1_000_000) -> None:
        self.loop.run(max_events)

    def device_list(self):
        return [self.devices[k] for k in sorted(self.devices)]

    def audit(self, expect_leaks: bool | None = None):
        expect = self.leak_demo if expect_leaks is None else expect_leaks
        return sim_audit.run_all(self.trace, self.device_list(), self.network,
                                 expect_leaks=expect)


class WorldBuilder:
    def __init__(self, seed: int, suite_id: str = "x25519",
                 net_delay_us: int = 50_000):
        loop = EventLoop()
        trace = TraceLog()
        self.world = World(seed=seed, suite=get_suite(suite_id), loop=loop,
                           trace=trace,
                           network=SimNetwork(loop, trace, net_delay_us))
        self.rng = DeterministicRng(seed, "world")

    # ---- PKI ----

    def add_root(self, name: str, authorized_groups) -> PeerCertificate:
        w = self.world
        keys = w.suite.generate_keypair(self.rng.stream(f"rootkey:{name}"))
        cert = self_signed_root(w.suite, keys, name,
                                authorized_groups=frozenset(authorized_groups))
        w.roots[name] = cert
        w.issuer_keys[name] = keys
        return cert

    def add_principal(self, name: str, role, groups=(), doc_types=(),
                      issuer: str | None = None,
                      authorized_groups=()) -> Principal:
        w = self.world
        if isinstance(role, str):
            role = _ROLES[role]
        if issuer is None:
            issuer = next(iter(sorted(w.roots)))
        device_keys = w.suite.generate_keypair(self.rng.stream(f"key:{name}"))
        signing_keys = w.suite.generate_keypair(
            self.rng.stream(f"signkey:{name}"))
        cert = issue_certificate(
            w.suite, w.issuer_keys[issuer], issuer, name, device_keys.public,
            role, groups=frozenset(groups), doc_types=frozenset(doc_types),
            authorized_groups=frozenset(authorized_groups))
        principal = Principal(name, device_keys, signing_keys, cert, role)
        w.principals[name] = principal
        if role is Role.CA:
            w.issuer_keys[name] = device_keys
        return principal

    # ---- devices ----

    def add_device(self, device_id: str, user: str, credential: str = "",
                   install_peers=(), repo_files=(), admin_password: str = "",
                   kernel_config: KernelConfig | None = None,
                   costs: dict | None = None, sensors: dict | None = None,
                   compliant: bool = True) -> Device:
        w = self.world
        principal = w.principals[user]
        identity = DeviceIdentity(user, principal.device_keys,
                                  principal.signing_keys.public)
        rng = DeterministicRng(w.seed, f"device:{device_id}")
        device = Device(device_id, w.loop, w.trace, w.suite, rng, identity,
                        kernel_config=kernel_config, costs=costs)
        device.root_fixture = encode_root_fixture(
            [w.roots[n] for n in sorted(w.roots)])
        device.initial_peers = [w.principals[p].cert for p in install_peers]
        device.initial_sensor_policies = dict(sensors or {})
        self._provision_repository(device, principal, credential, repo_files)
        device._admin_password = admin_password
        w.network.register(device)
        w.devices[device_id] = device
        w.agents[device_id] = UserAgent(device, credential, compliant)
        w.credentials[device_id] = credential
        return device

    def _provision_repository(self, device: Device, principal: Principal,
                              credential: str, repo_files) -> None:
        gate = SecureModeGate()
        gate.attach(lambda: True)
        repo = Repository(device.suite, gate, principal.name,
                          device.secret_ledger)
        for spec in repo_files:
            repo.write(spec["path"], spec["content"].encode("utf-8"),
                       acl=tuple(spec.get("acl", ())))
        if credential:
            rng = DeterministicRng(self.world.seed,
                                   f"keyfile:{device.device_id}")
            repo.install_keyfile(seal_keyfile(
                device.suite, credential, principal.signing_keys.private,
                rng, params=FIXTURE_KDF))
        device.storage.seal_blob(repo.to_blob())

    # ---- apps ----

    def wire_messaging(self, device_id: str, contacts: dict,
                       preinstalled=()) -> MessagingApp:
        w = self.world
        device = w.devices[device_id]
        app = MessagingApp(device)
        app.contacts = dict(contacts)
        app.preinstalled = set(preinstalled)
        app.own_cert_bytes = w.principals[device.identity.name].cert.encode()
        return app

    def wire_payments(self, device_id: str, brokers: dict,
                      preinstalled=()) -> PaymentApp:
        w = self.world
        device = w.devices[device_id]
        app = PaymentApp(device)
        app.brokers = dict(brokers)
        app.preinstalled = set(preinstalled)
        app.own_cert_bytes = w.principals[device.identity.name].cert.encode()
        return app

    def wire_broker(self, device_id: str, registered_users=(),
                    doc_type: str = "commerce",
                    withhold_receipt: bool = False) -> BrokerService:
        w = self.world
        device = w.devices[device_id]
        app = BrokerService(device)
        app.own_cert_bytes = w.principals[device.identity.name].cert.encode()
        app.offer_doc_type = doc_type
        app.withhold_receipt = withhold_receipt
        for user in registered_users:
            app.registered_user_keys[user] = \
                w.principals[user].signing_keys.public
        return app

    def wire_adversary(self, device_id: str) -> AdversaryApp:
        return AdversaryApp(self.world.devices[device_id])

    # ---- finish ----

    def boot_all(self) -> World:
        w = self.world
        for device in w.device_list():
            device.boot()
            password = getattr(device, "_admin_password", "")
            if password:
                device.registry.set_admin_password(
                    password, DeterministicRng(w.seed,
                                               f"admin:{device.device_id}"))
        if w.leak_demo:
            self._arm_leak_demo()
        return w

    def _arm_leak_demo(self) -> None:
        """Negative control: deliberately copy a repository file into a
        normal-world app's observations to prove the auditor catches it."""
        for device in self.world.device_list():
            if not device.repository.files or not device.apps:
                continue
            path = sorted(device.repository.files)[0]
            content = device.repository.files[path].content
            app_id = sorted(device.apps)[0]
            device.observe(app_id, "leak_demo", content)
            device.trace("device", "leak_demo", {"path": path, "app": app_id})
            return


def standard_world(seed: int = 1, suite_id: str = "x25519") -> WorldBuilder:
    """The common two-phone fixture: a root CA, two contacts with phones,
    a broker with a backend, and a bank signatory."""
    b = WorldBuilder(seed, suite_id)
    b.add_root("rootca", authorized_groups={"friends", "brokers", "banking"})
    b.add_principal("alice", "contact", groups={"friends"})
    b.add_principal("bob", "contact", groups={"friends"})
    b.add_principal("acmebroker", "signatory", groups={"brokers"},
                    doc_types={"commerce", "receipt"})
    b.add_principal("globalbank", "signatory", groups={"banking"},
                    doc_types={"banking", "receipt"})
    return b
