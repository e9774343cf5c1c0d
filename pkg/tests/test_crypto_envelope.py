"""Envelope seal/open: roundtrips, corruption rejection, verify-before-decrypt."""

import pytest
from hypothesis import given, settings, strategies as st

from tcbsim.crypto import (
    Envelope,
    decrypt_calls,
    get_suite,
    open_envelope,
    seal,
)
from tcbsim.errors import (
    EnvelopeError,
    MacFailure,
    MalformedEnvelope,
    SignatureFailure,
    SuiteMismatch,
)
from tcbsim.peers import PeerCertificate, Role
from tcbsim.rng import DeterministicRng


def make_parties(suite, seed=7):
    rng = DeterministicRng(seed)
    sender = suite.generate_keypair(rng)
    recipient = suite.generate_keypair(rng)
    sender_cert = PeerCertificate(name="alice", public_key=sender.public,
                                  role=Role.CONTACT)
    return rng, sender, recipient, sender_cert


@pytest.fixture(params=["test", "x25519"])
def suite(request):
    return get_suite(request.param)


def test_roundtrip_identity(suite):
    rng, sender, recipient, cert = make_parties(suite)
    env = seal(suite, sender, "alice", recipient.public, b"hi", rng)
    assert open_envelope(suite, recipient, cert, env) == b"hi"


def test_roundtrip_many_random_messages(suite):
    rng, sender, recipient, cert = make_parties(suite)
    msg_rng = DeterministicRng(99)
    for _ in range(200):
        m = msg_rng.bytes(1 + msg_rng.randrange(64))
        env = seal(suite, sender, "alice", recipient.public, m, rng)
        assert open_envelope(suite, recipient, cert, env) == m


def test_fresh_keys_and_ciphertext_per_call(suite):
    rng, sender, recipient, _ = make_parties(suite)
    e1 = seal(suite, sender, "alice", recipient.public, b"same", rng)
    e2 = seal(suite, sender, "alice", recipient.public, b"same", rng)
    assert e1.wrapped_enc_key != e2.wrapped_enc_key
    assert e1.wrapped_mac_key != e2.wrapped_mac_key
    assert e1.ciphertext != e2.ciphertext


def test_two_distinct_symmetric_keys(suite):
    # unwrap both keys and check the confidentiality/authenticity split
    rng, sender, recipient, _ = make_parties(suite)
    env = seal(suite, sender, "alice", recipient.public, b"payload", rng)
    enc_key = suite.unwrap_key(recipient.private, env.wrapped_enc_key)
    mac_key = suite.unwrap_key(recipient.private, env.wrapped_mac_key)
    assert enc_key != mac_key


def test_empty_plaintext_rejected(suite):
    rng, sender, recipient, _ = make_parties(suite)
    with pytest.raises(ValueError):
        seal(suite, sender, "alice", recipient.public, b"", rng)


def test_suite_mismatch_on_foreign_keys():
    t, x = get_suite("test"), get_suite("x25519")
    rng = DeterministicRng(3)
    foreign = x.generate_keypair(rng)
    recipient = t.generate_keypair(rng)
    with pytest.raises(SuiteMismatch):
        seal(t, foreign, "alice", recipient.public, b"m", rng)


def test_suite_mismatch_on_envelope(suite):
    rng, sender, recipient, cert = make_parties(suite)
    other = get_suite("x25519" if suite.suite_id == "test" else "test")
    env = seal(suite, sender, "alice", recipient.public, b"m", rng)
    other_keys = other.generate_keypair(DeterministicRng(5))
    with pytest.raises(SuiteMismatch):
        open_envelope(other, other_keys, cert, env)


def test_wrong_sender_signature_zero_decrypts(suite):
    rng, sender, recipient, _ = make_parties(suite)
    mallory = suite.generate_keypair(DeterministicRng(13))
    env = seal(suite, mallory, "alice", recipient.public, b"spoof", rng)
    cert = PeerCertificate(name="alice", public_key=sender.public,
                           role=Role.CONTACT)
    log = []
    with pytest.raises(SignatureFailure):
        open_envelope(suite, recipient, cert, env, log)
    assert decrypt_calls(log) == 0


def test_truncated_ciphertext_is_mac_failure(suite):
    rng, sender, recipient, cert = make_parties(suite)
    env = seal(suite, sender, "alice", recipient.public, b"0123456789abcdef", rng)
    broken = Envelope(env.suite_id, env.sender_name, env.wrapped_enc_key,
                      env.wrapped_mac_key, env.keys_signature,
                      env.ciphertext[:-1], env.mac_tag)
    log = []
    with pytest.raises(MacFailure):
        open_envelope(suite, recipient, cert, broken, log)
    assert decrypt_calls(log) == 0


def test_exhaustive_single_byte_corruption_rejected():
    """Oracle: every single-byte mutation of a serialized envelope (all 255
    alternative values at every position) must fail to open, with zero
    symmetric-decrypt calls on every rejection."""
    suite = get_suite("test")
    rng, sender, recipient, cert = make_parties(suite)
    env = seal(suite, sender, "alice", recipient.public,
               b"16-byte message!", rng)
    blob = bytearray(env.encode())
    for pos in range(len(blob)):
        orig = blob[pos]
        for delta in range(1, 256):
            blob[pos] = (orig + delta) % 256
            log = []
            with pytest.raises(EnvelopeError):
                mutated = Envelope.decode(bytes(blob))
                open_envelope(suite, recipient, cert, mutated, log)
            assert decrypt_calls(log) == 0, f"decrypt ran at pos {pos}"
        blob[pos] = orig


def test_exhaustive_single_bit_flip_rejected(suite):
    # cheaper per-suite variant: one bit flip at every position
    rng, sender, recipient, cert = make_parties(suite)
    env = seal(suite, sender, "alice", recipient.public,
               b"16-byte message!", rng)
    blob = bytearray(env.encode())
    for pos in range(len(blob)):
        for bit in range(8):
            blob[pos] ^= 1 << bit
            log = []
            with pytest.raises(EnvelopeError):
                open_envelope(suite, recipient, cert,
                              Envelope.decode(bytes(blob)), log)
            assert decrypt_calls(log) == 0
            blob[pos] ^= 1 << bit


def test_verify_before_decrypt_ordering(suite):
    rng, sender, recipient, cert = make_parties(suite)
    env = seal(suite, sender, "alice", recipient.public, b"ordered", rng)
    log = []
    open_envelope(suite, recipient, cert, env, log)
    assert log.index("mac_verify") < log.index("decrypt")
    assert log.index("verify_keys_signature") < log.index("mac_verify")


def test_wire_roundtrip(suite):
    rng, sender, recipient, _ = make_parties(suite)
    env = seal(suite, sender, "alice", recipient.public, b"codec", rng)
    assert Envelope.decode(env.encode()) == env


def test_malformed_envelope_bytes(suite):
    with pytest.raises(MalformedEnvelope):
        Envelope.decode(b"\x00\x00\x00\x10short")


@settings(max_examples=60, deadline=None)
@given(msg=st.binary(min_size=1, max_size=256), seed=st.integers(0, 2**32))
def test_property_roundtrip_test_suite(msg, seed):
    suite = get_suite("test")
    rng, sender, recipient, cert = make_parties(suite, seed)
    env = seal(suite, sender, "alice", recipient.public, msg, rng)
    assert open_envelope(suite, recipient, cert, env) == msg
