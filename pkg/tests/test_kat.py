"""Frozen known-answer vectors for envelope sealing under the test suite."""

import importlib.resources

from tcbsim.crypto import Envelope, get_suite, open_envelope, seal
from tcbsim.crypto.suites import KeyPair
from tcbsim.peers import PeerCertificate, Role
from tcbsim.rng import DeterministicRng


def load_vectors():
    text = importlib.resources.files("tcbsim").joinpath(
        "data/envelope_kat.txt").read_text()
    for line in text.splitlines():
        seed, name, sender_priv, recip_priv, plaintext, envelope = \
            (bytes.fromhex(f) for f in line.split(" "))
        yield seed, name.decode(), sender_priv, recip_priv, plaintext, envelope


def test_vectors_present():
    assert len(list(load_vectors())) == 8


def test_seal_reproduces_frozen_bytes():
    suite = get_suite("test")
    for seed, name, sender_priv, recip_priv, plaintext, expected in \
            load_vectors():
        sender = KeyPair("test", sender_priv,
                         suite.public_from_private(sender_priv))
        recipient_pub = suite.public_from_private(recip_priv)
        env = seal(suite, sender, name, recipient_pub, plaintext,
                   DeterministicRng(seed))
        assert env.encode() == expected


def test_frozen_envelopes_open():
    suite = get_suite("test")
    for seed, name, sender_priv, recip_priv, plaintext, expected in \
            load_vectors():
        recipient = KeyPair("test", recip_priv,
                            suite.public_from_private(recip_priv))
        cert = PeerCertificate(
            name=name, public_key=suite.public_from_private(sender_priv),
            role=Role.CONTACT)
        assert open_envelope(suite, recipient, cert,
                             Envelope.decode(expected)) == plaintext
