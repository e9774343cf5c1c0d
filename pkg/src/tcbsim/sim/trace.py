"""Structured trace log: the contract for all trace-level assertions.

One record per event as newline-delimited JSON with sorted keys, so two
runs of the same seeded scenario produce byte-identical logs. Reserved
keys: t (virtual time, microseconds), seq (global order), dev, comp,
event; all other keys are event fields and must be JSON scalars or lists
of scalars.
"""

from __future__ import annotations

import json

_SCALARS = (str, int, bool, type(None))


def _canon(value):
    if isinstance(value, bool) or isinstance(value, _SCALARS):
        return value
    if isinstance(value, float):
        raise TypeError("floats are banned from trace records (determinism)")
    if isinstance(value, (bytes, bytearray)):
        return bytes(value).hex()
    if isinstance(value, (list, tuple, frozenset, set)):
        items = list(value)
        if isinstance(value, (set, frozenset)):
            items = sorted(items)
        return [_canon(v) for v in items]
    raise TypeError(f"untraceable field type {type(value)!r}")


class TraceLog:
    def __init__(self):
        self.records: list[dict] = []
        self._seq = 0

    def emit(self, t: int, dev: str, comp: str, event: str,
             fields: dict | None = None) -> dict:
        record = {"t": t, "seq": self._seq, "dev": dev, "comp": comp,
                  "event": event}
        for k, v in (fields or {}).items():
            if k in record:
                raise ValueError(f"field {k!r} collides with a reserved key")
            record[k] = _canon(v)
        self._seq += 1
        self.records.append(record)
        return record

    # -- queries used by audits and scenario assertions --

    def select(self, event: str | None = None, dev: str | None = None,
               comp: str | None = None, **fields) -> list[dict]:
        out = []
        for r in self.records:
            if event is not None and r["event"] != event:
                continue
            if dev is not None and r["dev"] != dev:
                continue
            if comp is not None and r["comp"] != comp:
                continue
            if any(r.get(k) != v for k, v in fields.items()):
                continue
            out.append(r)
        return out

    def count(self, **kw) -> int:
        return len(self.select(**kw))

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n"
            for r in self.records)
