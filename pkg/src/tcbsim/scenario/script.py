"""Scenario script loading and schema validation.

Scripts are YAML documents validated against the versioned JSON schema
shipped with the package; unknown fields are rejected outright, so a
typo'd script fails loudly instead of silently skipping steps.
"""

from __future__ import annotations

import importlib.resources
import json

import jsonschema
import yaml

from tcbsim.errors import SchemaError


def _schema() -> dict:
    data = importlib.resources.files("tcbsim").joinpath(
        "data/scenario.schema.json").read_text("utf-8")
    return json.loads(data)


def validate_script(doc) -> dict:
    if not isinstance(doc, dict):
        raise SchemaError("scenario must be a mapping")
    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise SchemaError(f"{path}: {e.message}") from e
    _check_references(doc)
    return doc


def load_script(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as e:
        raise SchemaError(f"cannot read scenario: {e}") from e
    except yaml.YAMLError as e:
        raise SchemaError(f"scenario is not valid YAML: {e}") from e
    return validate_script(doc)


def _check_references(doc: dict) -> None:
    """Cross-field checks the schema language can't express."""
    device_ids = {d["id"] for d in doc["devices"]}
    if len(device_ids) != len(doc["devices"]):
        raise SchemaError("duplicate device ids")
    principals = {p["name"] for p in doc.get("pki", {}).get("principals", [])}
    roots = {r["name"] for r in doc.get("pki", {}).get("roots", [])}
    for d in doc["devices"]:
        if d["user"] not in principals:
            raise SchemaError(f"device {d['id']}: unknown user {d['user']!r}")
        for peer in d.get("install_peers", ()):
            if peer not in principals:
                raise SchemaError(
                    f"device {d['id']}: unknown peer {peer!r}")
    for e in doc["events"]:
        if e["device"] not in device_ids:
            raise SchemaError(f"event at {e['at_us']}: unknown device "
                              f"{e['device']!r}")
        kind = e["do"]
        if kind == "user" and "op" not in e:
            raise SchemaError(f"user event at {e['at_us']} needs op")
        if kind == "app" and ("app" not in e or "op" not in e):
            raise SchemaError(f"app event at {e['at_us']} needs app and op")
        if kind == "adversary" and "strategy" not in e:
            raise SchemaError(f"adversary event at {e['at_us']} needs strategy")
        if kind == "interrupt" and "source" not in e:
            raise SchemaError(f"interrupt event at {e['at_us']} needs source")
    for p in doc.get("pki", {}).get("principals", []):
        issuer = p.get("issuer")
        if issuer is not None and issuer not in roots | principals:
            raise SchemaError(f"principal {p['name']}: unknown issuer "
                              f"{issuer!r}")
