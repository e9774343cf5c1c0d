"""The private repository: ACL-tagged files, the sealed signing key and
the signed-documents archive.

Everything here is reachable only through the secure-mode user path; the
application gateway never returns repository content unenveloped. File
content is secret-labeled from creation. The signing key is stored only
as a credential-sealed key file; unlocking yields a handle scoped to the
current secure-mode session and zeroized on exit. Three wrong credential
attempts end the session (bounds online guessing by someone who grabbed
an unlocked phone).
"""

from __future__ import annotations

from dataclasses import dataclass

from tcbsim import taint
from tcbsim.crypto.keyfile import SealedKeyFile, open_keyfile
from tcbsim.crypto.suites import KeyPair
from tcbsim.crypto.documents import SignedDocument
from tcbsim.errors import (
    CredentialFailure,
    HandleExpired,
    NotInSecureMode,
    PathMissing,
    WireError,
)
from tcbsim.wire import pack_fields, pack_str, unpack_fields, unpack_str

_BLOB_MAGIC = b"tcbsim.repo.v1"


@dataclass(frozen=True)
class RepoFile:
    path: str
    content: taint.Labeled   # always secret-labeled
    acl: tuple               # peer and group names allowed as recipients


class KeyHandle:
    """Unlocked signing key, valid until the secure-mode session ends."""

    def __init__(self, keypair: KeyPair, owner: str):
        self._keypair = keypair
        self.owner = owner

    @property
    def valid(self) -> bool:
        return self._keypair is not None

    @property
    def keypair(self) -> KeyPair:
        if self._keypair is None:
            raise HandleExpired(self.owner)
        return self._keypair

    def invalidate(self) -> None:
        self._keypair = None


class SecureModeGate:
    """Shared guard: repository operations require the kernel to be in
    secure mode. The kernel wires itself in after construction."""

    def __init__(self):
        self._probe = None

    def attach(self, probe) -> None:
        self._probe = probe

    @property
    def active(self) -> bool:
        return bool(self._probe and self._probe())

    def require(self, op: str) -> None:
        if not self.active:
            raise NotInSecureMode(op)


class Repository:
    def __init__(self, suite, gate: SecureModeGate, owner: str,
                 secret_ledger: taint.SecretLedger | None = None):
        self.suite = suite
        self.gate = gate
        self.owner = owner
        self.secret_ledger = secret_ledger
        self.files: dict[str, RepoFile] = {}
        self.keyfile: SealedKeyFile | None = None
        self.signed_archive: list[SignedDocument] = []

    # ---- general-purpose file system (user path only) ----

    def write(self, path: str, content, acl=()) -> None:
        self.gate.require("repo_write")
        data = taint.data_of(content)
        labeled = taint.secret(data, self.owner)
        if self.secret_ledger is not None:
            self.secret_ledger.register(data, self.owner, f"repo:{path}")
        self.files[path] = RepoFile(path, labeled, tuple(acl))

    def read(self, path: str) -> taint.Labeled:
        self.gate.require("repo_read")
        return self._get(path).content

    def delete(self, path: str) -> None:
        self.gate.require("repo_delete")
        self._get(path)
        del self.files[path]

    def list_paths(self) -> list[str]:
        self.gate.require("repo_list")
        return sorted(self.files)

    def _get(self, path: str) -> RepoFile:
        try:
            return self.files[path]
        except KeyError:
            raise PathMissing(path) from None

    # ---- recipient access lists ----

    def acl_allows(self, path: str, recipient_cert) -> bool:
        """True iff the certificate's name or one of its groups is on the
        file's access list. Chain validity is the caller's concern."""
        f = self.files.get(path)
        if f is None:
            raise PathMissing(path)
        acl = set(f.acl)
        if recipient_cert.name in acl:
            return True
        return bool(acl & set(recipient_cert.groups))

    def files_readable_by(self, recipient_cert) -> list[str]:
        return sorted(p for p in self.files
                      if self.acl_allows(p, recipient_cert))

    # ---- sealed signing key ----

    def install_keyfile(self, sealed: SealedKeyFile) -> None:
        self.keyfile = sealed

    def unlock_private_key(self, credential, kernel, now: int) -> KeyHandle:
        """Unseal the signing key for the current secure-mode session.

        The handle lives on kernel.session and is zeroized when the
        session is destroyed. The third wrong credential this session
        forces the session to end."""
        self.gate.require("unlock_private_key")
        if self.keyfile is None:
            raise CredentialFailure("no key file installed")
        session = kernel.session
        if session.handle is not None and session.handle.valid:
            return session.handle
        try:
            private = open_keyfile(self.suite, credential, self.keyfile)
        except CredentialFailure:
            session.bad_credentials += 1
            if session.bad_credentials >= kernel.config.credential_attempts:
                from tcbsim.kernel import CAUSE_LOCKOUT
                kernel.exit_secure(now, CAUSE_LOCKOUT)
            raise
        keypair = KeyPair(self.suite.suite_id, private,
                          self.suite.public_from_private(private))
        handle = KeyHandle(keypair, self.owner)
        session.handle = handle
        return handle

    # ---- signed-document archive ----

    def archive_signed(self, doc: SignedDocument) -> None:
        self.gate.require("archive_signed")
        self.signed_archive.append(doc)

    def list_signed(self) -> list[SignedDocument]:
        self.gate.require("list_signed")
        return list(self.signed_archive)

    # ---- persistence ----

    def to_blob(self) -> bytes:
        file_records = [pack_fields(pack_str(f.path), f.content.data,
                                    pack_fields(*(pack_str(a) for a in f.acl)))
                        for f in self.files.values()]
        return pack_fields(
            _BLOB_MAGIC,
            pack_fields(*file_records),
            self.keyfile.encode() if self.keyfile else b"",
            pack_fields(*(d.encode() for d in self.signed_archive)),
        )

    def load_blob(self, blob: bytes) -> None:
        magic, files_blob, keyfile_blob, archive_blob = unpack_fields(
            blob, count=4)
        if magic != _BLOB_MAGIC:
            raise WireError("bad repository magic")
        self.files = {}
        for record in unpack_fields(files_blob):
            path_b, content, acl_blob = unpack_fields(record, count=3)
            path = unpack_str(path_b)
            acl = tuple(unpack_str(a) for a in unpack_fields(acl_blob))
            labeled = taint.secret(content, self.owner)
            if self.secret_ledger is not None:
                self.secret_ledger.register(content, self.owner,
                                            f"repo:{path}")
            self.files[path] = RepoFile(path, labeled, acl)
        self.keyfile = (SealedKeyFile.decode(keyfile_blob)
                        if keyfile_blob else None)
        self.signed_archive = [SignedDocument.decode(d)
                               for d in unpack_fields(archive_blob)]
