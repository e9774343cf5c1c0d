"""Cryptographic constructions behind the trusted services."""

from tcbsim.crypto.documents import (
    PersonalField,
    SignedDocument,
    countersign,
    make_document,
    verify_countersigned,
    verify_originator,
)
from tcbsim.crypto.envelope import Envelope, decrypt_calls, open_envelope, seal
from tcbsim.crypto.keyfile import SealedKeyFile, open_keyfile, seal_keyfile
from tcbsim.crypto.suites import (
    KdfParams,
    KeyPair,
    ReferenceSuite,
    SUITES,
    TestSuite,
    get_suite,
)

__all__ = [
    "Envelope", "KdfParams", "KeyPair", "PersonalField", "ReferenceSuite",
    "SUITES", "SealedKeyFile", "SignedDocument", "TestSuite", "countersign",
    "decrypt_calls", "get_suite", "make_document", "open_envelope",
    "open_keyfile", "seal", "seal_keyfile", "verify_countersigned",
    "verify_originator",
]
