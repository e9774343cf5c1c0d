"""Cipher suites: the pluggable primitive bundles behind every envelope.

A suite binds five primitives under one short id: asymmetric key wrap,
signatures, a symmetric stream cipher, a MAC, and a password KDF.

Two suites ship:

* ``test``: fully deterministic XOR-stream + truncated keyed hash
  construction used for known-answer vectors and bit-flip oracles.
  It provides NO security whatsoever (the "public" signature key equals
  the signing seed); its sole purpose is reproducible bytes.
* ``x25519``: the reference suite of X25519 ephemeral-static key wrap,
  Ed25519 signatures, ChaCha20, HMAC-SHA256 and scrypt. All randomness
  comes from the injected generator, so runs remain seed-deterministic.

Key blobs are 64 bytes: the key-wrap half followed by the signature half.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers import Cipher
from cryptography.hazmat.primitives.ciphers.algorithms import ChaCha20
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from cryptography.hazmat.primitives.kdf.scrypt import Scrypt

from tcbsim.errors import SuiteMismatch
from tcbsim.rng import DeterministicRng

SYM_KEY_LEN = 32
KEY_HALF = 32
KEY_BLOB_LEN = 2 * KEY_HALF


@dataclass(frozen=True)
class KeyPair:
    """Combined key-wrap + signing key material for one suite."""

    suite_id: str
    private: bytes  # wrap half || signing half
    public: bytes   # wrap half || signing half


@dataclass(frozen=True)
class KdfParams:
    cost: int        # iteration count (test suite) / scrypt N (reference)
    block_size: int = 8
    parallelism: int = 1

    def encode(self) -> bytes:
        return b"%d,%d,%d" % (self.cost, self.block_size, self.parallelism)

    @classmethod
    def decode(cls, raw: bytes) -> "KdfParams":
        cost, block_size, parallelism = (int(x) for x in raw.split(b","))
        return cls(cost, block_size, parallelism)


def _xor(data: bytes, stream: bytes) -> bytes:
    return bytes(a ^ b for a, b in zip(data, stream))


def _check_key(suite_id: str, keys: KeyPair) -> None:
    if keys.suite_id != suite_id:
        raise SuiteMismatch(
            f"keys were generated under suite {keys.suite_id!r}, not {suite_id!r}"
        )


def _check_pub(pub: bytes) -> None:
    if len(pub) != KEY_BLOB_LEN:
        raise SuiteMismatch(f"public key blob must be {KEY_BLOB_LEN} bytes")


class TestSuite:
    """Deterministic suite for known-answer tests. Not secure."""

    suite_id = "test"
    DEFAULT_KDF = KdfParams(cost=64)

    _D_STREAM = b"tcbsim.test.stream|"
    _D_PUB = b"tcbsim.test.pub|"
    _D_WRAP = b"tcbsim.test.wrap|"
    _D_SIG = b"tcbsim.test.sig|"
    _D_MAC = b"tcbsim.test.mac|"
    _D_KDF = b"tcbsim.test.kdf|"

    # -- helpers --

    def _keystream(self, key: bytes, n: int) -> bytes:
        out = b""
        counter = 0
        while len(out) < n:
            out += hashlib.sha256(
                self._D_STREAM + key + counter.to_bytes(8, "big")
            ).digest()
            counter += 1
        return out[:n]

    # -- key management --

    def generate_keypair(self, rng: DeterministicRng) -> KeyPair:
        wrap_seed = rng.bytes(KEY_HALF)
        sig_seed = rng.bytes(KEY_HALF)
        return KeyPair(self.suite_id, wrap_seed + sig_seed,
                       self._public_blob(wrap_seed, sig_seed))

    def _public_blob(self, wrap_seed: bytes, sig_seed: bytes) -> bytes:
        wrap_pub = hashlib.sha256(self._D_PUB + wrap_seed).digest()
        # toy construction: the "public" signing key is the seed itself
        return wrap_pub + sig_seed

    def public_from_private(self, private: bytes) -> bytes:
        return self._public_blob(private[:KEY_HALF], private[KEY_HALF:])

    # -- key wrap --

    def wrap_key(self, recipient_pub: bytes, key: bytes,
                 rng: DeterministicRng) -> bytes:
        _check_pub(recipient_pub)
        eph = rng.bytes(16)
        shared = hashlib.sha256(
            self._D_WRAP + recipient_pub[:KEY_HALF] + eph
        ).digest()
        return eph + _xor(key, self._keystream(shared, len(key)))

    def unwrap_key(self, recipient_priv: bytes, wrapped: bytes) -> bytes:
        pub = self.public_from_private(recipient_priv)
        eph, body = wrapped[:16], wrapped[16:]
        shared = hashlib.sha256(self._D_WRAP + pub[:KEY_HALF] + eph).digest()
        return _xor(body, self._keystream(shared, len(body)))

    # -- signatures (keyed hash; verification key == signing seed) --

    def sign(self, private: bytes, message: bytes) -> bytes:
        return hashlib.sha256(
            self._D_SIG + private[KEY_HALF:] + message
        ).digest()

    def verify(self, public: bytes, message: bytes, sig: bytes) -> bool:
        expect = hashlib.sha256(
            self._D_SIG + public[KEY_HALF:] + message
        ).digest()
        return hmac.compare_digest(expect, sig)

    # -- symmetric cipher (XOR stream, nonce prefixed) --

    def encrypt(self, key: bytes, plaintext: bytes,
                rng: DeterministicRng) -> bytes:
        nonce = rng.bytes(16)
        return nonce + _xor(plaintext, self._keystream(key + nonce, len(plaintext)))

    def decrypt(self, key: bytes, ciphertext: bytes) -> bytes:
        nonce, body = ciphertext[:16], ciphertext[16:]
        return _xor(body, self._keystream(key + nonce, len(body)))

    # -- MAC (truncated keyed hash) --

    def mac(self, key: bytes, message: bytes) -> bytes:
        return hashlib.sha256(self._D_MAC + key + message).digest()[:16]

    def mac_verify(self, key: bytes, message: bytes, tag: bytes) -> bool:
        return hmac.compare_digest(self.mac(key, message), tag)

    # -- password KDF --

    def derive_key(self, credential: bytes, salt: bytes,
                   params: KdfParams) -> bytes:
        x = hashlib.sha256(self._D_KDF + salt + credential).digest()
        for _ in range(params.cost):
            x = hashlib.sha256(self._D_KDF + x).digest()
        return x + hashlib.sha256(self._D_KDF + x + b"\x01").digest()


class ReferenceSuite:
    """X25519 / Ed25519 / ChaCha20 / HMAC-SHA256 / scrypt."""

    suite_id = "x25519"
    DEFAULT_KDF = KdfParams(cost=1 << 14)

    _HKDF_INFO = b"tcbsim.x25519.wrap"
    _ZERO_NONCE = b"\x00" * 16

    # -- key management --

    def generate_keypair(self, rng: DeterministicRng) -> KeyPair:
        wrap_seed = rng.bytes(KEY_HALF)
        sig_seed = rng.bytes(KEY_HALF)
        return KeyPair(self.suite_id, wrap_seed + sig_seed,
                       self._public_blob(wrap_seed, sig_seed))

    def _public_blob(self, wrap_seed: bytes, sig_seed: bytes) -> bytes:
        wrap_pub = X25519PrivateKey.from_private_bytes(wrap_seed).public_key()
        sig_pub = Ed25519PrivateKey.from_private_bytes(sig_seed).public_key()
        return (wrap_pub.public_bytes_raw() + sig_pub.public_bytes_raw())

    def public_from_private(self, private: bytes) -> bytes:
        return self._public_blob(private[:KEY_HALF], private[KEY_HALF:])

    # -- key wrap (ephemeral-static ECDH, HKDF, ChaCha20) --

    def _wrap_stream_key(self, shared: bytes, eph_pub: bytes) -> bytes:
        return HKDF(algorithm=hashes.SHA256(), length=SYM_KEY_LEN,
                    salt=eph_pub, info=self._HKDF_INFO).derive(shared)

    def wrap_key(self, recipient_pub: bytes, key: bytes,
                 rng: DeterministicRng) -> bytes:
        _check_pub(recipient_pub)
        eph_priv = X25519PrivateKey.from_private_bytes(rng.bytes(32))
        eph_pub = eph_priv.public_key().public_bytes_raw()
        shared = eph_priv.exchange(
            X25519PublicKey.from_public_bytes(recipient_pub[:KEY_HALF]))
        wk = self._wrap_stream_key(shared, eph_pub)
        enc = Cipher(ChaCha20(wk, self._ZERO_NONCE), mode=None).encryptor()
        return eph_pub + enc.update(key)

    def unwrap_key(self, recipient_priv: bytes, wrapped: bytes) -> bytes:
        eph_pub, body = wrapped[:32], wrapped[32:]
        sk = X25519PrivateKey.from_private_bytes(recipient_priv[:KEY_HALF])
        shared = sk.exchange(X25519PublicKey.from_public_bytes(eph_pub))
        wk = self._wrap_stream_key(shared, eph_pub)
        dec = Cipher(ChaCha20(wk, self._ZERO_NONCE), mode=None).decryptor()
        return dec.update(body)

    # -- signatures --

    def sign(self, private: bytes, message: bytes) -> bytes:
        return Ed25519PrivateKey.from_private_bytes(
            private[KEY_HALF:]).sign(message)

    def verify(self, public: bytes, message: bytes, sig: bytes) -> bool:
        try:
            Ed25519PublicKey.from_public_bytes(
                public[KEY_HALF:]).verify(sig, message)
            return True
        except (InvalidSignature, ValueError):
            return False

    # -- symmetric cipher --

    def encrypt(self, key: bytes, plaintext: bytes,
                rng: DeterministicRng) -> bytes:
        nonce = rng.bytes(16)
        enc = Cipher(ChaCha20(key, nonce), mode=None).encryptor()
        return nonce + enc.update(plaintext)

    def decrypt(self, key: bytes, ciphertext: bytes) -> bytes:
        nonce, body = ciphertext[:16], ciphertext[16:]
        dec = Cipher(ChaCha20(key, nonce), mode=None).decryptor()
        return dec.update(body)

    # -- MAC --

    def mac(self, key: bytes, message: bytes) -> bytes:
        return hmac.new(key, message, hashlib.sha256).digest()

    def mac_verify(self, key: bytes, message: bytes, tag: bytes) -> bool:
        return hmac.compare_digest(self.mac(key, message), tag)

    # -- password KDF --

    def derive_key(self, credential: bytes, salt: bytes,
                   params: KdfParams) -> bytes:
        return Scrypt(salt=salt, length=64, n=params.cost,
                      r=params.block_size, p=params.parallelism).derive(credential)


SUITES = {s.suite_id: s for s in (TestSuite(), ReferenceSuite())}


def get_suite(suite_id: str):
    try:
        return SUITES[suite_id]
    except KeyError:
        raise SuiteMismatch(f"unknown cipher suite {suite_id!r}") from None


def check_keypair(suite, keys: KeyPair) -> None:
    _check_key(suite.suite_id, keys)
