"""Credential-sealed key files.

The user's signing key is persisted only under a key derived from a
credential she types on the trusted path. The credential itself is never
stored; a wrong credential fails the integrity check before any plaintext
is produced.
"""

from __future__ import annotations

from dataclasses import dataclass

from tcbsim import taint
from tcbsim.crypto.suites import KdfParams
from tcbsim.errors import CredentialFailure, WireError
from tcbsim.rng import DeterministicRng
from tcbsim.wire import pack_fields, unpack_fields

_SALT_LEN = 16


@dataclass(frozen=True)
class SealedKeyFile:
    kdf_salt: bytes
    kdf_params: KdfParams
    ciphertext: bytes
    integrity_tag: bytes

    def encode(self) -> bytes:
        return pack_fields(self.kdf_salt, self.kdf_params.encode(),
                           self.ciphertext, self.integrity_tag)

    @classmethod
    def decode(cls, data: bytes) -> "SealedKeyFile":
        f = unpack_fields(data, count=4)
        try:
            params = KdfParams.decode(f[1])
        except ValueError as e:
            raise WireError("bad KDF parameter encoding") from e
        return cls(f[0], params, f[2], f[3])


def _split_keys(suite, credential: bytes, salt: bytes, params: KdfParams):
    material = suite.derive_key(credential, salt, params)
    return material[:32], material[32:64]


def seal_keyfile(suite, credential, private_key, rng: DeterministicRng,
                 params: KdfParams | None = None) -> SealedKeyFile:
    cred = taint.data_of(credential if not isinstance(credential, str)
                         else credential.encode("utf-8"))
    if not cred:
        raise ValueError("credential must be non-empty")
    key = taint.data_of(private_key)
    params = params or suite.DEFAULT_KDF
    salt = rng.bytes(_SALT_LEN)
    enc_key, mac_key = _split_keys(suite, cred, salt, params)
    ciphertext = suite.encrypt(enc_key, key, rng)
    tag = suite.mac(mac_key, salt + ciphertext)
    return SealedKeyFile(salt, params, ciphertext, tag)


def open_keyfile(suite, credential, sealed: SealedKeyFile) -> bytes:
    """Recover the private key. Integrity is checked before decryption;
    a wrong credential raises CredentialFailure with no partial output."""
    cred = taint.data_of(credential if not isinstance(credential, str)
                         else credential.encode("utf-8"))
    enc_key, mac_key = _split_keys(suite, cred, sealed.kdf_salt,
                                   sealed.kdf_params)
    if not suite.mac_verify(mac_key, sealed.kdf_salt + sealed.ciphertext,
                            sealed.integrity_tag):
        raise CredentialFailure("credential does not open this key file")
    return suite.decrypt(enc_key, sealed.ciphertext)
