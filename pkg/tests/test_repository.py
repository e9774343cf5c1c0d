"""Private repository: gating, ACLs, key unlock, archive, persistence."""

import pytest

from tcbsim import taint
from tcbsim.crypto import (
    PersonalField,
    get_suite,
    make_document,
    seal_keyfile,
    KdfParams,
)
from tcbsim.errors import (
    CredentialFailure,
    HandleExpired,
    NotInSecureMode,
    PathMissing,
)
from tcbsim.kernel import (
    CAUSE_EXIT_BUTTON,
    CAUSE_LOCKOUT,
    KernelConfig,
    KernelCore,
    MODE_NORMAL,
    MODE_SECURE,
    NullBus,
)
from tcbsim.peers import PeerCertificate, Role
from tcbsim.repository import Repository, SecureModeGate
from tcbsim.rng import DeterministicRng

SUITE = get_suite("test")
LIGHT = KdfParams(cost=256)


def make_env(credential="pw"):
    rng = DeterministicRng(3)
    kernel = KernelCore(KernelConfig(suppression_prob=0.0),
                        rng.stream("training"), NullBus())
    gate = SecureModeGate()
    gate.attach(lambda: kernel.mode == MODE_SECURE)
    repo = Repository(SUITE, gate, "alice")
    signing = SUITE.generate_keypair(rng.stream("sign"))
    repo.install_keyfile(seal_keyfile(SUITE, credential, signing.private,
                                      rng.stream("seal"), params=LIGHT))
    return kernel, repo, signing


def test_file_ops_roundtrip():
    kernel, repo, _ = make_env()
    kernel.sak_press(0)
    repo.write("notes/a", b"alpha", acl=("bob",))
    assert repo.read("notes/a").data == b"alpha"
    assert repo.read("notes/a").label.is_secret
    repo.delete("notes/a")
    with pytest.raises(PathMissing):
        repo.read("notes/a")


def test_ops_require_secure_mode():
    kernel, repo, _ = make_env()
    with pytest.raises(NotInSecureMode):
        repo.write("x", b"y")
    with pytest.raises(NotInSecureMode):
        repo.read("x")
    with pytest.raises(NotInSecureMode):
        repo.list_signed()
    kernel.sak_press(0)
    repo.write("x", b"y")
    kernel.exit_secure(1, CAUSE_EXIT_BUTTON)
    with pytest.raises(NotInSecureMode):
        repo.read("x")


def test_acl_by_name_group_and_empty():
    kernel, repo, _ = make_env()
    kernel.sak_press(0)
    repo.write("f1", b"1", acl=("alice",))
    repo.write("f2", b"2", acl=("acme-employees",))
    repo.write("f3", b"3", acl=())
    keys = SUITE.generate_keypair(DeterministicRng(9))
    alice = PeerCertificate(name="alice", public_key=keys.public,
                            role=Role.CONTACT)
    acme = PeerCertificate(name="worker", public_key=keys.public,
                           role=Role.CONTACT,
                           groups=frozenset({"acme-employees"}))
    assert repo.acl_allows("f1", alice)
    assert not repo.acl_allows("f1", acme)
    assert repo.acl_allows("f2", acme)
    for cert in (alice, acme):
        assert not repo.acl_allows("f3", cert)
    assert repo.files_readable_by(acme) == ["f2"]


def test_unlock_and_handle_lifetime():
    kernel, repo, signing = make_env()
    kernel.sak_press(0)
    handle = repo.unlock_private_key("pw", kernel, 1)
    assert handle.keypair.private == signing.private
    # handle is cached for the session
    assert repo.unlock_private_key("pw", kernel, 2) is handle
    kernel.exit_secure(3, CAUSE_EXIT_BUTTON)
    assert not handle.valid
    with pytest.raises(HandleExpired):
        _ = handle.keypair


def test_wrong_credential_lockout_ends_session():
    kernel, repo, _ = make_env()
    kernel.sak_press(0)
    for i in range(2):
        with pytest.raises(CredentialFailure):
            repo.unlock_private_key("nope", kernel, i)
        assert kernel.mode == MODE_SECURE
    with pytest.raises(CredentialFailure):
        repo.unlock_private_key("nope", kernel, 3)
    assert kernel.mode == MODE_NORMAL
    assert kernel.last_exit_cause == CAUSE_LOCKOUT


def test_archive_append_only_ordering():
    kernel, repo, signing = make_env()
    kernel.sak_press(0)
    docs = [make_document(SUITE, signing, "alice", "commerce",
                          f"doc{i}".encode()) for i in range(2)]
    for d in docs:
        repo.archive_signed(d)
    assert repo.list_signed() == docs


def test_blob_roundtrip_preserves_everything():
    kernel, repo, signing = make_env()
    kernel.sak_press(0)
    repo.write("a/b", b"content", acl=("bob", "friends"))
    doc = make_document(SUITE, signing, "alice", "commerce", b"offer",
                        fields=(PersonalField("account", "digits"),))
    repo.archive_signed(doc)
    blob = repo.to_blob()

    kernel2, repo2, _ = make_env()
    repo2.load_blob(blob)
    assert sorted(repo2.files) == ["a/b"]
    assert repo2.files["a/b"].content.data == b"content"
    assert repo2.files["a/b"].acl == ("bob", "friends")
    assert repo2.signed_archive == [doc]
    kernel2.sak_press(0)
    assert repo2.unlock_private_key("pw", kernel2, 1).keypair.private \
        == signing.private


def test_credential_never_in_blob():
    kernel, repo, _ = make_env(credential="sw0rdf1sh-credential")
    kernel.sak_press(0)
    repo.write("x", b"data")
    assert b"sw0rdf1sh-credential" not in repo.to_blob()
