"""Sealed envelopes: encrypt-then-MAC with sender-signed wrapped keys.

Sealing draws two fresh symmetric keys (one for confidentiality, one for
authenticity), encrypts the plaintext, MACs the ciphertext together with
the header context, wraps both keys under the recipient's public key and
signs the wrapped keys with the sender's key. Opening verifies the key
signature and the MAC before the symmetric decrypt primitive ever runs;
a spoofed or corrupted envelope is rejected with zero decrypt calls,
which the per-invocation call log makes observable.

Wire format: length-prefixed fields, big-endian u32 prefixes, in the
order suite_id, sender_name, wrapped_enc_key, wrapped_mac_key,
keys_signature, ciphertext, mac_tag.
"""

from __future__ import annotations

from dataclasses import dataclass

from tcbsim import taint
from tcbsim.crypto.suites import KeyPair, SYM_KEY_LEN, check_keypair
from tcbsim.errors import (
    MacFailure,
    MalformedEnvelope,
    SignatureFailure,
    SuiteMismatch,
    WireError,
)
from tcbsim.rng import DeterministicRng
from tcbsim.wire import pack_fields, pack_str, unpack_fields, unpack_str


@dataclass(frozen=True)
class Envelope:
    suite_id: str
    sender_name: str
    wrapped_enc_key: bytes
    wrapped_mac_key: bytes
    keys_signature: bytes
    ciphertext: bytes
    mac_tag: bytes

    def encode(self) -> bytes:
        return pack_fields(
            pack_str(self.suite_id),
            pack_str(self.sender_name),
            self.wrapped_enc_key,
            self.wrapped_mac_key,
            self.keys_signature,
            self.ciphertext,
            self.mac_tag,
        )

    @classmethod
    def decode(cls, data: bytes) -> "Envelope":
        try:
            f = unpack_fields(data, count=7)
            return cls(unpack_str(f[0]), unpack_str(f[1]),
                       f[2], f[3], f[4], f[5], f[6])
        except WireError as e:
            raise MalformedEnvelope(str(e)) from e


def _header_context(suite_id: str, sender_name: str) -> bytes:
    # binds suite and sender identity into both the MAC and the key
    # signature, preventing header-swap confusion
    return pack_fields(pack_str(suite_id), pack_str(sender_name))


def _signed_keys_message(suite_id: str, sender_name: str,
                         wrapped_enc: bytes, wrapped_mac: bytes) -> bytes:
    return _header_context(suite_id, sender_name) + pack_fields(
        wrapped_enc, wrapped_mac)


def seal(suite, sender_keys: KeyPair, sender_name: str, recipient_pub: bytes,
         plaintext, rng: DeterministicRng,
         call_log: list | None = None) -> Envelope:
    """Seal plaintext for the holder of recipient_pub.

    plaintext may be raw bytes or a taint.Labeled buffer; sealing is the
    sanctioned declassification point, so the output envelope is public
    either way. Fresh symmetric keys are drawn from rng on every call.
    """
    check_keypair(suite, sender_keys)
    data = taint.data_of(plaintext)
    if not data:
        raise ValueError("plaintext must be non-empty")

    enc_key = rng.bytes(SYM_KEY_LEN)
    mac_key = rng.bytes(SYM_KEY_LEN)
    # distinct keys for confidentiality and authenticity
    assert enc_key != mac_key

    ciphertext = suite.encrypt(enc_key, data, rng)
    if call_log is not None:
        call_log.append("encrypt")
    header = _header_context(suite.suite_id, sender_name)
    tag = suite.mac(mac_key, header + ciphertext)

    wrapped_enc = suite.wrap_key(recipient_pub, enc_key, rng)
    wrapped_mac = suite.wrap_key(recipient_pub, mac_key, rng)
    sig = suite.sign(sender_keys.private, _signed_keys_message(
        suite.suite_id, sender_name, wrapped_enc, wrapped_mac))
    if call_log is not None:
        call_log.append("sign_keys")

    return Envelope(suite.suite_id, sender_name, wrapped_enc, wrapped_mac,
                    sig, ciphertext, tag)


def open_envelope(suite, recipient_keys: KeyPair, sender_cert,
                  env: Envelope, call_log: list | None = None) -> bytes:
    """Verify and decrypt an envelope.

    Verification order is fixed: key signature, then MAC, then decrypt.
    The symmetric decrypt primitive is invoked only after both checks
    pass; every primitive call is appended to call_log when given.
    """
    log = call_log if call_log is not None else []

    if env.suite_id != suite.suite_id:
        raise SuiteMismatch(
            f"envelope sealed under {env.suite_id!r}, opening with {suite.suite_id!r}")
    check_keypair(suite, recipient_keys)
    if sender_cert.name != env.sender_name:
        raise SignatureFailure(
            f"envelope claims sender {env.sender_name!r}, certificate is for "
            f"{sender_cert.name!r}")

    log.append("verify_keys_signature")
    if not suite.verify(sender_cert.public_key, _signed_keys_message(
            env.suite_id, env.sender_name,
            env.wrapped_enc_key, env.wrapped_mac_key), env.keys_signature):
        raise SignatureFailure("wrapped keys not signed by claimed sender")

    log.append("unwrap_mac_key")
    mac_key = suite.unwrap_key(recipient_keys.private, env.wrapped_mac_key)
    if len(mac_key) != SYM_KEY_LEN:
        raise MacFailure("wrapped MAC key has wrong length")
    header = _header_context(env.suite_id, env.sender_name)
    log.append("mac_verify")
    if not suite.mac_verify(mac_key, header + env.ciphertext, env.mac_tag):
        raise MacFailure("ciphertext authentication failed")

    log.append("unwrap_enc_key")
    enc_key = suite.unwrap_key(recipient_keys.private, env.wrapped_enc_key)
    if len(enc_key) != SYM_KEY_LEN:
        raise MacFailure("wrapped encryption key has wrong length")
    log.append("decrypt")
    return suite.decrypt(enc_key, env.ciphertext)


def decrypt_calls(call_log: list) -> int:
    return sum(1 for c in call_log if c == "decrypt")
