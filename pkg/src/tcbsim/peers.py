"""Peers, roles, groups and group-restricted certificate chains.

Every peer is a name bound to a public key, one of exactly three roles
(Contact, Signatory, CA) and a set of groups. CAs may only certify peers
into the groups they are themselves authorized for, and that restriction
is transitive down the chain. Lookups are name-exact everywhere: there is
deliberately no fuzzy matching, so a look-alike name is simply a
different, unknown peer.

Installing roots or peers requires the administrative password and is
reachable only from the secure-mode user interface; the application API
has no such endpoint.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from tcbsim.crypto.suites import KdfParams, KeyPair
from tcbsim.errors import (
    BadAdminPassword,
    CertificateInvalid,
    DuplicatePeerName,
    WireError,
)
from tcbsim.rng import DeterministicRng
from tcbsim.wire import (
    pack_fields,
    pack_str,
    pack_str_set,
    unpack_fields,
    unpack_str,
    unpack_str_set,
)

MAX_CHAIN_DEPTH = 4


class Role(enum.Enum):
    CONTACT = "contact"
    SIGNATORY = "signatory"
    CA = "ca"


class Rejection(enum.Enum):
    UNKNOWN_ISSUER = "UnknownIssuer"
    BAD_SIGNATURE = "BadSignature"
    GROUP_ESCALATION = "GroupEscalation"
    NOT_A_CA = "NotACA"
    CHAIN_TOO_DEEP = "ChainTooDeep"
    MALFORMED = "Malformed"


@dataclass(frozen=True)
class PeerCertificate:
    name: str
    public_key: bytes
    role: Role
    groups: frozenset = frozenset()
    doc_types: frozenset = frozenset()       # Signatory/CA only
    issuer_name: str = ""
    issuer_signature: bytes = b""
    authorized_groups: frozenset = frozenset()  # CA only

    def __post_init__(self):
        if self.role is Role.CA and not self.authorized_groups:
            raise CertificateInvalid(
                f"CA {self.name!r} must carry non-empty authorized_groups")

    def tbs_bytes(self) -> bytes:
        """The to-be-signed encoding (everything but the signature)."""
        return pack_fields(
            pack_str(self.name),
            self.public_key,
            pack_str(self.role.value),
            pack_str_set(self.groups),
            pack_str_set(self.doc_types),
            pack_str(self.issuer_name),
            pack_str_set(self.authorized_groups),
        )

    def encode(self) -> bytes:
        return pack_fields(self.tbs_bytes(), self.issuer_signature)

    @classmethod
    def decode(cls, data: bytes) -> "PeerCertificate":
        tbs, sig = unpack_fields(data, count=2)
        f = unpack_fields(tbs, count=7)
        try:
            role = Role(unpack_str(f[2]))
        except ValueError as e:
            raise WireError(f"unknown role {f[2]!r}") from e
        return cls(name=unpack_str(f[0]), public_key=f[1], role=role,
                   groups=unpack_str_set(f[3]), doc_types=unpack_str_set(f[4]),
                   issuer_name=unpack_str(f[5]), issuer_signature=sig,
                   authorized_groups=unpack_str_set(f[6]))


@dataclass
class ValidationReport:
    accepted: bool
    reasons: list = field(default_factory=list)   # of (Rejection, detail)
    chain: list = field(default_factory=list)     # issuer names, leaf first

    def reason_codes(self):
        return [r for r, _ in self.reasons]


def issue_certificate(suite, issuer_keys: KeyPair, issuer_name: str,
                      name: str, public_key: bytes, role: Role,
                      groups=(), doc_types=(), authorized_groups=()) -> PeerCertificate:
    cert = PeerCertificate(
        name=name, public_key=public_key, role=role,
        groups=frozenset(groups), doc_types=frozenset(doc_types),
        issuer_name=issuer_name, authorized_groups=frozenset(authorized_groups))
    sig = suite.sign(issuer_keys.private, cert.tbs_bytes())
    return replace(cert, issuer_signature=sig)


def self_signed_root(suite, keys: KeyPair, name: str,
                     authorized_groups, doc_types=()) -> PeerCertificate:
    return issue_certificate(suite, keys, name, name, keys.public, Role.CA,
                             groups=(), doc_types=doc_types,
                             authorized_groups=authorized_groups)


class PeerRegistry:
    """Roots and certified peers, owned by the kernel.

    Mutation happens through admin_authorize (password-gated) or factory
    provisioning before adoption; the validation and lookup paths never
    modify the registry.
    """

    def __init__(self, suite):
        self.suite = suite
        self._roots: dict[str, PeerCertificate] = {}
        self._peers: dict[str, PeerCertificate] = {}
        self._admin_salt: bytes = b""
        self._admin_hash: bytes = b""
        self._admin_params = KdfParams(cost=64)

    # -- provisioning (pre-adoption factory path; no password required) --

    def provision_root(self, cert: PeerCertificate) -> None:
        self._check_new_name(cert)
        if cert.role is not Role.CA or not cert.authorized_groups:
            raise CertificateInvalid(
                "root must be a CA with non-empty authorized_groups")
        self._roots[cert.name] = cert

    def provision_peer(self, cert: PeerCertificate) -> None:
        self._check_new_name(cert)
        self._peers[cert.name] = cert

    def set_admin_password(self, password: str, rng: DeterministicRng,
                           params: KdfParams | None = None) -> None:
        self._admin_salt = rng.bytes(16)
        self._admin_params = params or KdfParams(cost=64)
        self._admin_hash = self.suite.derive_key(
            password.encode("utf-8"), self._admin_salt, self._admin_params)

    # -- lookup (name-exact, read-only) --

    def get(self, name: str) -> PeerCertificate | None:
        if name in self._peers:
            return self._peers[name]
        return self._roots.get(name)

    def is_root(self, name: str) -> bool:
        return name in self._roots

    def root_names(self):
        return sorted(self._roots)

    def peer_names(self):
        return sorted(self._peers)

    def snapshot(self) -> tuple:
        """Immutable content fingerprint, used by mutation-freedom tests."""
        return (tuple(sorted((n, c.encode()) for n, c in self._roots.items())),
                tuple(sorted((n, c.encode()) for n, c in self._peers.items())),
                self._admin_salt, self._admin_hash)

    # -- validation --

    def validate_chain(self, cert: PeerCertificate,
                       presented: dict | None = None) -> ValidationReport:
        """Walk issuer links to a root, checking signatures and group
        containment at every step.

        presented optionally maps name -> PeerCertificate for
        intermediate certificates supplied alongside the leaf (the
        registry itself is never consulted for them unless installed).
        """
        report = ValidationReport(accepted=False)
        presented = presented or {}
        current = cert
        seen = set()
        for depth in range(MAX_CHAIN_DEPTH + 1):
            if self.is_root(current.name):
                installed = self._roots[current.name]
                if installed.encode() != current.encode():
                    report.reasons.append(
                        (Rejection.BAD_SIGNATURE,
                         f"{current.name} does not match installed root"))
                    return report
                report.accepted = not report.reasons
                return report
            if current.name in seen:
                report.reasons.append(
                    (Rejection.MALFORMED, f"issuer cycle at {current.name}"))
                return report
            seen.add(current.name)

            issuer = self.get(current.issuer_name) or presented.get(
                current.issuer_name)
            if issuer is None:
                report.reasons.append(
                    (Rejection.UNKNOWN_ISSUER, current.issuer_name))
                return report
            if issuer.role is not Role.CA:
                report.reasons.append((Rejection.NOT_A_CA, issuer.name))
                return report
            if not self.suite.verify(issuer.public_key, current.tbs_bytes(),
                                     current.issuer_signature):
                report.reasons.append((Rejection.BAD_SIGNATURE, current.name))
                return report
            escalated = current.groups - issuer.authorized_groups
            if current.role is Role.CA:
                escalated |= current.authorized_groups - issuer.authorized_groups
            if escalated:
                report.reasons.append(
                    (Rejection.GROUP_ESCALATION,
                     f"{current.name}: {sorted(escalated)}"))
                return report
            report.chain.append(issuer.name)
            current = issuer
        report.reasons.append((Rejection.CHAIN_TOO_DEEP, cert.name))
        return report

    def check_permission(self, peer_name: str, required_role: Role,
                         doc_type: str | None = None,
                         group: str | None = None) -> bool:
        """True iff a validated peer holds the role (and doc type / group
        when given). Unknown names are simply False."""
        cert = self.get(peer_name)
        if cert is None:
            return False
        if not self.is_root(peer_name) and not self.validate_chain(cert).accepted:
            return False
        if cert.role is not required_role:
            return False
        if doc_type is not None and doc_type not in cert.doc_types:
            return False
        if group is not None and group not in cert.groups:
            return False
        return True

    # -- administration (secure-mode UI only; absent from the app API) --

    def admin_authorize(self, admin_password: str,
                        cert: PeerCertificate) -> None:
        if not self._admin_hash:
            raise BadAdminPassword("no administrative password configured")
        digest = self.suite.derive_key(admin_password.encode("utf-8"),
                                       self._admin_salt, self._admin_params)
        if digest != self._admin_hash:
            raise BadAdminPassword("wrong administrative password")
        if cert.role is Role.CA and cert.name == cert.issuer_name:
            self.provision_root(cert)
        else:
            self.provision_peer(cert)

    # -- helpers --

    def _check_new_name(self, cert: PeerCertificate) -> None:
        existing = self.get(cert.name)
        if existing is not None and existing.encode() != cert.encode():
            raise DuplicatePeerName(cert.name)


def encode_root_fixture(certs) -> bytes:
    """Fixture file payload: pre-installed root CAs, loaded at boot."""
    return pack_fields(*(c.encode() for c in certs))


def decode_root_fixture(data: bytes) -> list[PeerCertificate]:
    return [PeerCertificate.decode(b) for b in unpack_fields(data)]
