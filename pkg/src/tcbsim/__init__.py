"""Deterministic simulator for a minimal phone trusted computing base.

A small trusted core owns a secure attention key, a secure-mode trusted
path with an unspoofable LED, a private repository, role-based crypto
services for normal-world apps, and sensor gating. Everything runs on a
seeded discrete-event simulator so whole-system traces are reproducible
byte for byte.
"""

__version__ = "0.1.0"
