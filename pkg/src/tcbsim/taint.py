"""Buffer-granularity confidentiality labels.

Secret byte buffers (repository content, user keystrokes in secure mode,
private keys, completed personal fields) travel through the trusted side
as Labeled values. The only sanctioned ways to shed the label are the
envelope seal and the credential key-file seal, which emit fresh public
ciphertext. The audit in tcbsim.sim.audit flags every secret-labeled
buffer that shows up in a normal-world observation log.

A SecretLedger additionally remembers the raw byte values of secrets, so
the audit can catch verbatim copies even if some code path strips the
label object.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Label:
    kind: str   # "public" | "secret"
    owner: str  # principal the secret belongs to ("" for public)

    @property
    def is_secret(self) -> bool:
        return self.kind == "secret"


PUBLIC = Label("public", "")


def secret_label(owner: str) -> Label:
    return Label("secret", owner)


@dataclass(frozen=True)
class Labeled:
    """A byte buffer with a confidentiality label."""

    data: bytes
    label: Label

    def __len__(self) -> int:
        return len(self.data)


def secret(data: bytes, owner: str) -> Labeled:
    return Labeled(bytes(data), secret_label(owner))


def public(data: bytes) -> Labeled:
    return Labeled(bytes(data), PUBLIC)


def data_of(value) -> bytes:
    """Raw bytes of a possibly-labeled value. Trusted-side use only."""
    if isinstance(value, Labeled):
        return value.data
    return bytes(value)


def is_secret(value) -> bool:
    return isinstance(value, Labeled) and value.label.is_secret


class SecretLedger:
    """Registry of secret byte values created during a run."""

    def __init__(self):
        self._values: list[tuple[bytes, str, str]] = []

    def register(self, data: bytes, owner: str, origin: str) -> None:
        if len(data) >= 4:  # ignore tiny values: too many false positives
            self._values.append((bytes(data), owner, origin))

    def scan(self, blob: bytes) -> list[tuple[str, str]]:
        """Return (owner, origin) for every registered secret appearing
        verbatim inside blob."""
        hits = []
        for value, owner, origin in self._values:
            if value in blob:
                hits.append((owner, origin))
        return hits
