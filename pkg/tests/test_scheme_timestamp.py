import random
from dataclasses import replace

import pytest

from cardproto.crypto import Digest, HashDomain, hash
from cardproto.enrollment import Reason, Rejected, ServerState, register_user
from cardproto.scheme_timestamp import (LoginRequestT, ServerReplyT, build_login_t, reply_mac,
                                        server_session_key_t, server_verify_login_t,
                                        user_verify_reply_t)

# h1("S", "alice", R_i, T) for master secret 0^32, from an independent SHA-256
C1_AT_100 = "ee88d5945feead600143341300d0f99ccc4ea63613e9d539cd0d91d2516f6361"
C1_AT_101 = "a6a2d7f298e2887db72fd328a0973e673be937895c8800e1b5a182b1c1456b44"


def flip(d: bytes, bit: int) -> Digest:
    raw = bytearray(d)
    raw[bit // 8] ^= 1 << (bit % 8)
    return Digest(bytes(raw))


def honest_run(server, card, pw, t0, delay=0):
    req, session = build_login_t(card, pw, t0)
    reply, srv_session, server = server_verify_login_t(server, req, t0 + delay)
    key = user_verify_reply_t(session, reply, t0 + 2 * delay)
    return key, server_session_key_t(srv_session), server


def test_login_golden_values():
    server, card = register_user(ServerState(bytes(32)), "alice", "pw1")
    assert build_login_t(card, "pw1", 100)[0].c1.hex() == C1_AT_100
    assert build_login_t(card, "pw1", 101)[0].c1.hex() == C1_AT_101


def test_login_request_shape(alice):
    server, card, pw = alice
    req, session = build_login_t(card, pw, 100)
    r_i = server.derive_ri("alice")
    assert req == LoginRequestT("alice", 100, hash(HashDomain.H1, ["S", "alice", r_i, 100]))
    assert session.r_i == r_i and session.t_sent == 100


def test_wrong_password_emits_nothing(alice):
    _, card, _ = alice
    with pytest.raises(Rejected) as exc:
        build_login_t(card, "nope", 100)
    assert exc.value.reason is Reason.PASSWORD


def test_server_reply_shape(alice):
    server, card, pw = alice
    req, _ = build_login_t(card, pw, 100)
    reply, _, _ = server_verify_login_t(server, req, 100)
    assert reply == ServerReplyT(100, hash(HashDomain.H2, ["alice", "S", server.derive_ri("alice"), 100]))


def test_honest_run_keys_agree(alice):
    server, card, pw = alice
    user_key, server_key, _ = honest_run(server, card, pw, 100, delay=3)
    assert user_key.key == server_key.key and user_key.peer_confirmed
    r_i = server.derive_ri("alice")
    assert user_key.key == hash(HashDomain.H3, ["alice", "S", r_i, 100, 103])


def test_replay_rejected(alice):
    server, card, pw = alice
    req, _ = build_login_t(card, pw, 100)
    _, _, server = server_verify_login_t(server, req, 100)
    with pytest.raises(Rejected) as exc:
        server_verify_login_t(server, req, 100)
    assert exc.value.reason is Reason.FRESHNESS


def test_rejections_leave_state_unchanged(alice):
    server, card, pw = alice
    req, _ = build_login_t(card, pw, 100)
    bad = replace(req, c1=flip(req.c1, 5))
    with pytest.raises(Rejected) as exc:
        server_verify_login_t(server, bad, 100)
    assert exc.value.reason is Reason.AUTHENTICITY
    # the honest request still goes through: the forged one did not poison the seen-set
    server_verify_login_t(server, req, 100)


@pytest.mark.parametrize("now, ok", [(100, True), (160, True), (161, False), (99, False)])
def test_request_window(alice, now, ok):
    server, card, pw = alice
    req, _ = build_login_t(card, pw, 100)
    if ok:
        server_verify_login_t(server, req, now)
    else:
        with pytest.raises(Rejected) as exc:
            server_verify_login_t(server, req, now)
        assert exc.value.reason is Reason.FRESHNESS


def test_unknown_identity(alice):
    server, card, pw = alice
    req, _ = build_login_t(card, pw, 100)
    with pytest.raises(Rejected) as exc:
        server_verify_login_t(server, replace(req, user_id="mallory"), 100)
    assert exc.value.reason is Reason.IDENTITY


def test_stale_reply_rejected(alice):
    server, card, pw = alice
    req, session = build_login_t(card, pw, 100)
    reply, _, _ = server_verify_login_t(server, req, 100)
    with pytest.raises(Rejected) as exc:
        user_verify_reply_t(session, reply, 161)
    assert exc.value.reason is Reason.FRESHNESS


def test_reply_from_old_run_outside_window(alice):
    server, card, pw = alice
    req, _ = build_login_t(card, pw, 100)
    old_reply, _, server = server_verify_login_t(server, req, 100)
    _, session = build_login_t(card, pw, 500)
    with pytest.raises(Rejected) as exc:
        user_verify_reply_t(session, old_reply, 500)
    assert exc.value.reason is Reason.FRESHNESS


def test_cross_user_reply_rejected(alice):
    server, card, pw = alice
    server, _ = register_user(server, "bob", "pw2")
    _, session = build_login_t(card, pw, 100)
    forged = ServerReplyT(100, reply_mac("alice", "S", server.derive_ri("bob"), 100))
    with pytest.raises(Rejected) as exc:
        user_verify_reply_t(session, forged, 100)
    assert exc.value.reason is Reason.AUTHENTICITY


def test_keys_differ_across_runs_and_from_macs(alice):
    server, card, pw = alice
    k1, _, server = honest_run(server, card, pw, 100)
    k2, _, _ = honest_run(server, card, pw, 101)
    assert k1.key != k2.key
    req, session = build_login_t(card, pw, 300)
    reply, _, _ = server_verify_login_t(server, req, 300)
    key = user_verify_reply_t(session, reply, 300)
    assert key.key not in (req.c1, reply.c2)


def test_completeness_over_corpus_and_skews():
    rng = random.Random(11)
    server = ServerState.create(rng)
    users = [(f"user{i}", f"pw-{rng.random()}") for i in range(20)]
    cards = {}
    for uid, pw in users:
        server, cards[uid] = register_user(server, uid, pw)
    t = 1000
    for uid, pw in users:
        for delay in (0, 30, 60):
            t += 200
            uk, sk, server = honest_run(server, cards[uid], pw, t, delay)
            assert uk.key == sk.key


def test_integrity_single_bit_flips(alice):
    server, card, pw = alice
    rng = random.Random(3)
    req, session = build_login_t(card, pw, 100)
    reply, _, _ = server_verify_login_t(server, req, 100)
    for _ in range(100):
        bit = rng.randrange(256)
        with pytest.raises(Rejected):
            server_verify_login_t(server, replace(req, c1=flip(req.c1, bit)), 100)
        with pytest.raises(Rejected):
            user_verify_reply_t(session, replace(reply, c2=flip(reply.c2, bit)), 100)
        tbit = rng.randrange(64)
        with pytest.raises(Rejected):
            server_verify_login_t(server, replace(req, t=req.t ^ (1 << tbit)), 100 ^ 0)
        with pytest.raises(Rejected):
            user_verify_reply_t(session, replace(reply, t_prime=reply.t_prime ^ (1 << tbit)), 100)
        uid = bytearray(b"alice")
        uid[rng.randrange(5)] ^= 1 << rng.randrange(7)
        with pytest.raises(Rejected) as exc:
            server_verify_login_t(server, replace(req, user_id=uid.decode("latin-1")), 100)
        assert exc.value.reason is Reason.IDENTITY


def test_session_keys_unique_over_runs(alice):
    server, card, pw = alice
    keys = set()
    for i in range(1000):
        t = 10_000 + 3 * i
        uk, sk, server = honest_run(server, card, pw, t, delay=i % 2)
        assert uk.key == sk.key
        keys.add(uk.key)
    assert len(keys) == 1000
