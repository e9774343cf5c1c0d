"""Peer registry: chain validation, group restrictions, admin gating."""

import pytest
from hypothesis import given, settings, strategies as st

from tcbsim.crypto import get_suite
from tcbsim.errors import BadAdminPassword, CertificateInvalid, DuplicatePeerName
from tcbsim.peers import (
    PeerCertificate,
    PeerRegistry,
    Rejection,
    Role,
    decode_root_fixture,
    encode_root_fixture,
    issue_certificate,
    self_signed_root,
)
from tcbsim.rng import DeterministicRng

SUITE = get_suite("test")


def build_pki():
    rng = DeterministicRng(17)
    root_keys = SUITE.generate_keypair(rng)
    root = self_signed_root(SUITE, root_keys, "rootca",
                            authorized_groups={"acme-employees", "gov",
                                               "brokers", "friends"})
    reg = PeerRegistry(SUITE)
    reg.provision_root(root)
    return reg, root_keys, rng


def test_valid_chain_accepted():
    reg, root_keys, rng = build_pki()
    keys = SUITE.generate_keypair(rng)
    cert = issue_certificate(SUITE, root_keys, "rootca", "carol", keys.public,
                             Role.CONTACT, groups={"acme-employees"})
    report = reg.validate_chain(cert)
    assert report.accepted and not report.reasons


def test_group_escalation_rejected():
    reg, root_keys, rng = build_pki()
    ca_keys = SUITE.generate_keypair(rng)
    acme_ca = issue_certificate(SUITE, root_keys, "rootca", "acme-ca",
                                ca_keys.public, Role.CA,
                                authorized_groups={"acme-employees"})
    reg.provision_peer(acme_ca)
    keys = SUITE.generate_keypair(rng)
    cert = issue_certificate(SUITE, ca_keys, "acme-ca", "eve", keys.public,
                             Role.CONTACT, groups={"acme-employees", "gov"})
    report = reg.validate_chain(cert)
    assert not report.accepted
    assert Rejection.GROUP_ESCALATION in report.reason_codes()


def test_sub_ca_cannot_widen_authority():
    reg, root_keys, rng = build_pki()
    ca_keys = SUITE.generate_keypair(rng)
    acme_ca = issue_certificate(SUITE, root_keys, "rootca", "acme-ca",
                                ca_keys.public, Role.CA,
                                authorized_groups={"acme-employees"})
    reg.provision_peer(acme_ca)
    sub_keys = SUITE.generate_keypair(rng)
    rogue = issue_certificate(SUITE, ca_keys, "acme-ca", "sub-ca",
                              sub_keys.public, Role.CA,
                              authorized_groups={"gov"})
    report = reg.validate_chain(rogue)
    assert Rejection.GROUP_ESCALATION in report.reason_codes()


def test_non_ca_issuer_rejected():
    reg, root_keys, rng = build_pki()
    contact_keys = SUITE.generate_keypair(rng)
    contact = issue_certificate(SUITE, root_keys, "rootca", "mallory",
                                contact_keys.public, Role.CONTACT,
                                groups={"friends"})
    reg.provision_peer(contact)
    keys = SUITE.generate_keypair(rng)
    cert = issue_certificate(SUITE, contact_keys, "mallory", "sock",
                             keys.public, Role.CONTACT, groups={"friends"})
    report = reg.validate_chain(cert)
    assert Rejection.NOT_A_CA in report.reason_codes()


def test_unknown_issuer_and_bad_signature():
    reg, root_keys, rng = build_pki()
    keys = SUITE.generate_keypair(rng)
    orphan = issue_certificate(SUITE, root_keys, "nobody", "x", keys.public,
                               Role.CONTACT)
    assert Rejection.UNKNOWN_ISSUER in reg.validate_chain(orphan).reason_codes()

    wrong_keys = SUITE.generate_keypair(rng)
    forged = issue_certificate(SUITE, wrong_keys, "rootca", "y", keys.public,
                               Role.CONTACT)
    assert Rejection.BAD_SIGNATURE in reg.validate_chain(forged).reason_codes()


def test_chain_depth_cap():
    reg, root_keys, rng = build_pki()
    issuer_keys, issuer_name = root_keys, "rootca"
    for i in range(5):
        keys = SUITE.generate_keypair(rng)
        cert = issue_certificate(SUITE, issuer_keys, issuer_name, f"ca{i}",
                                 keys.public, Role.CA,
                                 authorized_groups={"acme-employees"})
        reg.provision_peer(cert)
        issuer_keys, issuer_name = keys, f"ca{i}"
    leaf_keys = SUITE.generate_keypair(rng)
    leaf = issue_certificate(SUITE, issuer_keys, issuer_name, "deep",
                             leaf_keys.public, Role.CONTACT,
                             groups={"acme-employees"})
    report = reg.validate_chain(leaf)
    assert Rejection.CHAIN_TOO_DEEP in report.reason_codes()


def test_check_permission_matrix():
    reg, root_keys, rng = build_pki()
    bank_keys = SUITE.generate_keypair(rng)
    bank = issue_certificate(SUITE, root_keys, "rootca", "bank",
                             bank_keys.public, Role.SIGNATORY,
                             groups={"brokers"}, doc_types={"banking"})
    reg.provision_peer(bank)
    assert reg.check_permission("bank", Role.SIGNATORY, doc_type="banking")
    assert not reg.check_permission("bank", Role.SIGNATORY, doc_type="commerce")
    assert not reg.check_permission("bank", Role.CONTACT)
    assert not reg.check_permission("nobody", Role.CONTACT)
    assert reg.check_permission("bank", Role.SIGNATORY, group="brokers")
    assert not reg.check_permission("bank", Role.SIGNATORY, group="gov")


def test_name_exact_lookup_no_fuzzy_matching():
    reg, root_keys, rng = build_pki()
    keys = SUITE.generate_keypair(rng)
    real = issue_certificate(SUITE, root_keys, "rootca", "BankOfA",
                             keys.public, Role.SIGNATORY,
                             groups={"brokers"}, doc_types={"banking"})
    reg.provision_peer(real)
    assert reg.check_permission("BankOfA", Role.SIGNATORY)
    # homoglyph-style look-alike is simply an unknown peer
    assert not reg.check_permission("Bank0fA", Role.SIGNATORY)


def test_duplicate_names_rejected_not_shadowed():
    reg, root_keys, rng = build_pki()
    k1 = SUITE.generate_keypair(rng)
    k2 = SUITE.generate_keypair(rng)
    c1 = issue_certificate(SUITE, root_keys, "rootca", "bob", k1.public,
                           Role.CONTACT, groups={"friends"})
    c2 = issue_certificate(SUITE, root_keys, "rootca", "bob", k2.public,
                           Role.CONTACT, groups={"friends"})
    reg.provision_peer(c1)
    with pytest.raises(DuplicatePeerName):
        reg.provision_peer(c2)
    assert reg.get("bob").public_key == k1.public


def test_admin_password_gate():
    reg, root_keys, rng = build_pki()
    reg.set_admin_password("hunter2", rng)
    ca_keys = SUITE.generate_keypair(rng)
    local_root = self_signed_root(SUITE, ca_keys, "local-ca",
                                  authorized_groups={"home"})
    before = reg.snapshot()
    with pytest.raises(BadAdminPassword):
        reg.admin_authorize("wrong", local_root)
    assert reg.snapshot() == before
    reg.admin_authorize("hunter2", local_root)
    assert reg.is_root("local-ca")


def test_validation_never_mutates_registry():
    reg, root_keys, rng = build_pki()
    keys = SUITE.generate_keypair(rng)
    cert = issue_certificate(SUITE, root_keys, "rootca", "carol", keys.public,
                             Role.CONTACT, groups={"friends"})
    before = reg.snapshot()
    for _ in range(5):
        reg.validate_chain(cert)
        reg.check_permission("carol", Role.CONTACT)
        reg.check_permission("rootca", Role.CA)
    assert reg.snapshot() == before


def test_ca_requires_authorized_groups():
    rng = DeterministicRng(3)
    keys = SUITE.generate_keypair(rng)
    with pytest.raises(CertificateInvalid):
        PeerCertificate(name="bad-ca", public_key=keys.public, role=Role.CA)


def test_root_fixture_codec():
    reg, root_keys, rng = build_pki()
    root = reg.get("rootca")
    blob = encode_root_fixture([root])
    [decoded] = decode_root_fixture(blob)
    assert decoded == root


@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_group_monotonicity_random_registries(data):
    """Property: in every accepted chain, each certificate's groups are
    contained in its issuer's authorized_groups, checked by an independent
    brute-force chain walk."""
    rng = DeterministicRng(data.draw(st.integers(0, 2**31)))
    universe = ["g0", "g1", "g2", "g3"]
    reg = PeerRegistry(SUITE)
    root_keys = SUITE.generate_keypair(rng)
    reg.provision_root(self_signed_root(
        SUITE, root_keys, "root", authorized_groups=set(universe[:3])))
    keys = {"root": root_keys}
    issuers = ["root"]
    certs = []
    n = data.draw(st.integers(1, 20))
    for i in range(n):
        issuer = data.draw(st.sampled_from(issuers))
        role = data.draw(st.sampled_from([Role.CONTACT, Role.SIGNATORY, Role.CA]))
        groups = set(data.draw(st.lists(st.sampled_from(universe), max_size=3)))
        authorized = set(data.draw(st.lists(st.sampled_from(universe),
                                            min_size=1, max_size=3)))
        k = SUITE.generate_keypair(rng)
        cert = issue_certificate(
            SUITE, keys[issuer], issuer, f"p{i}", k.public, role,
            groups=groups,
            authorized_groups=authorized if role is Role.CA else ())
        try:
            reg.provision_peer(cert)
        except DuplicatePeerName:
            continue
        certs.append(cert)
        if role is Role.CA:
            keys[f"p{i}"] = k
            issuers.append(f"p{i}")
    for cert in certs:
        report = reg.validate_chain(cert)
        if not report.accepted:
            continue
        # independent walk, re-deriving containment from raw certificates
        node = cert
        while node.name != "root":
            issuer_cert = reg.get(node.issuer_name)
            assert node.groups <= issuer_cert.authorized_groups
            if node.role is Role.CA:
                assert node.authorized_groups <= issuer_cert.authorized_groups
            node = issuer_cert
