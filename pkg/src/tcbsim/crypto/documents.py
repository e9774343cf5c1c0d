"""Typed documents, originator signatures and user counter-signatures.

A document arrives from a signatory peer with its type, body, a set of
typed personal-field placeholders and the originator's signature. The
user completes the fields and counter-signs; the counter-signature covers
the body, the completed fields and the originator's signature bytes, so
mutating any of the three invalidates it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from tcbsim import taint
from tcbsim.crypto.suites import KeyPair
from tcbsim.errors import (
    AlreadyCountersigned,
    FieldValueInvalid,
    OriginatorInvalid,
    WireError,
)
from tcbsim.wire import pack_fields, pack_str, unpack_fields, unpack_str

FIELD_KINDS = ("string", "digits")


@dataclass(frozen=True)
class PersonalField:
    """A typed placeholder the user completes before counter-signing."""

    name: str
    kind: str       # one of FIELD_KINDS
    value: str = ""

    def validate_value(self, value: str) -> None:
        if self.kind == "digits" and not value.isdigit():
            raise FieldValueInvalid(
                f"field {self.name!r} requires digits, got {value!r}")


@dataclass(frozen=True)
class SignedDocument:
    doc_type: str
    body: bytes
    personal_fields: tuple  # of PersonalField
    originator_name: str
    originator_signature: bytes
    counter_signature: bytes | None = None

    def encode(self) -> bytes:
        return pack_fields(
            pack_str(self.doc_type),
            self.body,
            _fields_blob(self.personal_fields),
            pack_str(self.originator_name),
            self.originator_signature,
            self.counter_signature if self.counter_signature is not None else b"",
            b"1" if self.counter_signature is not None else b"0",
        )

    @classmethod
    def decode(cls, data: bytes) -> "SignedDocument":
        f = unpack_fields(data, count=7)
        counter = f[5] if f[6] == b"1" else None
        return cls(unpack_str(f[0]), f[1], _decode_fields(f[2]),
                   unpack_str(f[3]), f[4], counter)


def _fields_blob(fields) -> bytes:
    return pack_fields(*(
        pack_fields(pack_str(p.name), pack_str(p.kind), pack_str(p.value))
        for p in fields))


def _decode_fields(blob: bytes) -> tuple:
    out = []
    for item in unpack_fields(blob):
        name, kind, value = unpack_fields(item, count=3)
        k = unpack_str(kind)
        if k not in FIELD_KINDS:
            raise WireError(f"unknown personal-field kind {k!r}")
        out.append(PersonalField(unpack_str(name), k, unpack_str(value)))
    return tuple(out)


def _originator_message(doc_type: str, body: bytes, fields) -> bytes:
    # the originator signs the document as presented: placeholders with
    # empty values, so field names and kinds cannot be swapped in transit
    blank = tuple(replace(p, value="") for p in fields)
    return pack_fields(pack_str(doc_type), body, _fields_blob(blank))


def _counter_message(doc: SignedDocument) -> bytes:
    return pack_fields(doc.body, _fields_blob(doc.personal_fields),
                       doc.originator_signature)


def make_document(suite, originator_keys: KeyPair, originator_name: str,
                  doc_type: str, body: bytes, fields=()) -> SignedDocument:
    """Create a document signed by its originator, fields left blank."""
    blank = tuple(replace(p, value="") for p in fields)
    sig = suite.sign(originator_keys.private,
                     _originator_message(doc_type, body, blank))
    return SignedDocument(doc_type, body, blank, originator_name, sig)


def verify_originator(suite, originator_pub: bytes, doc: SignedDocument) -> bool:
    return suite.verify(originator_pub,
                        _originator_message(doc.doc_type, doc.body,
                                            doc.personal_fields),
                        doc.originator_signature)


def countersign(suite, user_keys: KeyPair, originator_pub: bytes,
                doc: SignedDocument, completed_fields) -> SignedDocument:
    """Complete the personal fields and counter-sign the document.

    completed_fields maps field name -> value (str or taint.Labeled).
    Raises OriginatorInvalid if the originator signature does not verify
    and AlreadyCountersigned if a counter-signature is already present.
    """
    if doc.counter_signature is not None:
        raise AlreadyCountersigned(doc.doc_type)
    if not verify_originator(suite, originator_pub, doc):
        raise OriginatorInvalid(doc.originator_name)

    completed = dict(completed_fields)
    filled = []
    for p in doc.personal_fields:
        raw = completed.pop(p.name, "")
        value = taint.data_of(raw).decode("utf-8") if isinstance(
            raw, (bytes, taint.Labeled)) else raw
        p.validate_value(value)
        filled.append(replace(p, value=value))
    if completed:
        raise FieldValueInvalid(
            f"values given for unknown fields: {sorted(completed)}")

    signed = replace(doc, personal_fields=tuple(filled))
    counter = suite.sign(user_keys.private, _counter_message(signed))
    return replace(signed, counter_signature=counter)


def verify_countersigned(suite, user_pub: bytes, originator_pub: bytes,
                         doc: SignedDocument) -> bool:
    """Full verification: originator signature and counter-signature."""
    if doc.counter_signature is None:
        return False
    if not verify_originator(suite, originator_pub, doc):
        return False
    return suite.verify(user_pub, _counter_message(doc), doc.counter_signature)
