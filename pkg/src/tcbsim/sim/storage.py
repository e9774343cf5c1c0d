"""Simulated secure storage: a flash region the OS cannot address.

Holds the device storage keys (modeling fused key material) and the
encrypted repository blob. The blob survives simulated reboots and can be
dumped to / loaded from the host disk by the scenario runner.
"""

from __future__ import annotations

from tcbsim.errors import CorruptRepositoryBlob, WireError
from tcbsim.rng import DeterministicRng
from tcbsim.wire import pack_fields, unpack_fields


class SecureStorage:
    def __init__(self, suite, rng: DeterministicRng):
        self.suite = suite
        self._rng = rng
        self._enc_key = rng.bytes(32)
        self._mac_key = rng.bytes(32)
        self.blob: bytes | None = None

    def seal_blob(self, plain: bytes) -> None:
        ct = self.suite.encrypt(self._enc_key, plain, self._rng)
        tag = self.suite.mac(self._mac_key, ct)
        self.blob = pack_fields(ct, tag)

    def open_blob(self) -> bytes | None:
        """Decrypt the stored blob; None when empty. A blob that fails
        parsing or authentication raises CorruptRepositoryBlob."""
        if self.blob is None:
            return None
        try:
            ct, tag = unpack_fields(self.blob, count=2)
        except WireError as e:
            raise CorruptRepositoryBlob(str(e)) from e
        if not self.suite.mac_verify(self._mac_key, ct, tag):
            raise CorruptRepositoryBlob("storage authentication failed")
        return self.suite.decrypt(self._enc_key, ct)
