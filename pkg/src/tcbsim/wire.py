"""Length-prefixed binary encoding.

Every persistent or transmitted structure (envelopes, certificates, sealed
key files, repository blobs) uses the same convention: fields in a fixed
order, each prefixed by a big-endian 32-bit length. Parsing is strict:
overruns, truncation and trailing bytes are all rejected.
"""

from __future__ import annotations

import struct

from tcbsim.errors import WireError

_MAX_FIELD = 1 << 28  # sanity bound, far above anything the simulator emits


def pack_fields(*fields: bytes) -> bytes:
    parts = []
    for f in fields:
        if not isinstance(f, (bytes, bytearray, memoryview)):
            raise TypeError(f"field must be bytes, got {type(f)!r}")
        b = bytes(f)
        parts.append(struct.pack(">I", len(b)))
        parts.append(b)
    return b"".join(parts)


def unpack_fields(data: bytes, count: int | None = None) -> list[bytes]:
    """Parse a stream of length-prefixed fields.

    With count given, exactly that many fields must consume the whole
    buffer; without it, fields are read until the buffer ends.
    """
    fields: list[bytes] = []
    off = 0
    n = len(data)
    while off < n:
        if count is not None and len(fields) == count:
            raise WireError("trailing bytes after last field")
        if off + 4 > n:
            raise WireError("truncated length prefix")
        (length,) = struct.unpack_from(">I", data, off)
        if length > _MAX_FIELD:
            raise WireError("field length out of bounds")
        off += 4
        if off + length > n:
            raise WireError("field overruns buffer")
        fields.append(data[off:off + length])
        off += length
    if count is not None and len(fields) != count:
        raise WireError(f"expected {count} fields, found {len(fields)}")
    return fields


def pack_str(s: str) -> bytes:
    return s.encode("utf-8")


def unpack_str(b: bytes) -> str:
    try:
        return b.decode("utf-8")
    except UnicodeDecodeError as e:
        raise WireError("field is not valid UTF-8") from e


def pack_str_set(names) -> bytes:
    """Canonical encoding of a set of names: sorted, length-prefixed."""
    return pack_fields(*(pack_str(x) for x in sorted(names)))


def unpack_str_set(b: bytes) -> frozenset[str]:
    return frozenset(unpack_str(f) for f in unpack_fields(b))
