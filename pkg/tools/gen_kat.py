#!/usr/bin/env python3
"""Regenerate the envelope known-answer vectors.

One vector per line, hex fields separated by single spaces:

    rng_seed sender_name sender_private recipient_private plaintext envelope

All vectors use the deterministic test suite; the committed file is the
oracle for wire-format and sealing regressions. Run from the repo root:

    python tools/gen_kat.py > src/tcbsim/data/envelope_kat.txt
"""

from tcbsim.crypto import get_suite, seal
from tcbsim.rng import DeterministicRng


def main() -> None:
    suite = get_suite("test")
    gen = DeterministicRng(b"kat-material")
    for i in range(8):
        seed = gen.bytes(16)
        sender_name = f"sender{i}"
        sender_priv = gen.bytes(64)
        recipient_priv = gen.bytes(64)
        plaintext = gen.bytes(4 + 4 * i)
        from tcbsim.crypto.suites import KeyPair
        sender = KeyPair("test", sender_priv,
                         suite.public_from_private(sender_priv))
        recipient_pub = suite.public_from_private(recipient_priv)
        env = seal(suite, sender, sender_name, recipient_pub, plaintext,
                   DeterministicRng(seed))
        print(" ".join([
            seed.hex(), sender_name.encode().hex(), sender_priv.hex(),
            recipient_priv.hex(), plaintext.hex(), env.encode().hex()]))


if __name__ == "__main__":
    main()
