"""Second scheme: nonce-based challenge-response, no clocks.

Message flow::

    user   -> server : <ID_i, N_i>
    server -> user   : <C_1, N_s>   C_1 = h1(S, ID_i, R_i, N_i, N_s)
    user   -> server : <C_2>        C_2 = h2(ID_i, S, R_i, N_s, N_i)
    both             : key = h3(ID_i, S, R_i, N_i, N_s)

The nonce order differs between C_1 and C_2; the encoding is injective, so
order matters.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Tuple

from .crypto import Digest, HashDomain, hash
from .enrollment import (DEFAULT_SERVER_ID, Reason, Rejected, ServerState,
                         SmartCard, card_local_check)
from .wire import message

NONCE_SIZE = 16


def draw_nonce(rng: random.Random) -> bytes:
    return rng.randbytes(NONCE_SIZE)


@message("login_request_n")
@dataclass(frozen=True)
class LoginRequestN:
    user_id: str
    n_i: bytes


@message("server_challenge_n")
@dataclass(frozen=True)
class ServerChallengeN:
    c1: Digest
    n_s: bytes


@message("user_response_n")
@dataclass(frozen=True)
class UserResponseN:
    c2: Digest


@dataclass(frozen=True)
class SessionKeyN:
    key: Digest
    # The scheme has no key-confirmation message: the user side stays
    # unconfirmed, the server side is confirmed once C_2 verifies.
    confirmed: bool = False


@dataclass(frozen=True)
class UserSessionN:
    user_id: str
    r_i: Digest
    n_i: bytes
    server_identity: str = DEFAULT_SERVER_ID


@dataclass(frozen=True)
class ServerSessionN:
    user_id: str
    r_i: Digest
    n_i: bytes
    n_s: bytes
    server_identity: str


def challenge_mac(S: str, user_id: str, r_i: bytes, n_i: bytes, n_s: bytes) -> Digest:
    return hash(HashDomain.H1, [S, user_id, r_i, n_i, n_s])


def response_mac(user_id: str, S: str, r_i: bytes, n_s: bytes, n_i: bytes) -> Digest:
    return hash(HashDomain.H2, [user_id, S, r_i, n_s, n_i])


def session_key(user_id: str, S: str, r_i: bytes, n_i: bytes, n_s: bytes) -> Digest:
    return hash(HashDomain.H3, [user_id, S, r_i, n_i, n_s])


def login_from_secret(user_id: str, r_i: Digest, rng: random.Random,
                      server_identity: str = DEFAULT_SERVER_ID) -> Tuple[LoginRequestN, UserSessionN]:
    n_i = draw_nonce(rng)
    return LoginRequestN(user_id, n_i), UserSessionN(user_id, r_i, n_i, server_identity)


def build_login_n(card: SmartCard, pw: str, rng: random.Random,
                  server_identity: str = DEFAULT_SERVER_ID) -> Tuple[LoginRequestN, UserSessionN]:
    # the card check gates the nonce draw: a rejected login consumes no randomness
    r_i = card_local_check(card, pw)
    return login_from_secret(card.user_id, r_i, rng, server_identity)


def server_challenge_n(server: ServerState, req: LoginRequestN,
                       rng: random.Random) -> Tuple[ServerChallengeN, ServerSessionN]:
    if req.user_id not in server.registry:
        raise Rejected(Reason.IDENTITY, f"unknown id {req.user_id!r}")
    n_s = draw_nonce(rng)
    S = server.server_identity
    r_i = server.derive_ri(req.user_id)
    ch = ServerChallengeN(challenge_mac(S, req.user_id, r_i, req.n_i, n_s), n_s)
    return ch, ServerSessionN(req.user_id, r_i, req.n_i, n_s, S)


def user_verify_challenge_n(session: UserSessionN,
                            ch: ServerChallengeN) -> Tuple[UserResponseN, SessionKeyN]:
    S = session.server_identity
    if challenge_mac(S, session.user_id, session.r_i, session.n_i, ch.n_s) != ch.c1:
        raise Rejected(Reason.AUTHENTICITY, "C_1 mismatch")
    resp = UserResponseN(response_mac(session.user_id, S, session.r_i, ch.n_s, session.n_i))
    key = SessionKeyN(session_key(session.user_id, S, session.r_i, session.n_i, ch.n_s))
    return resp, key


def server_verify_response_n(session: ServerSessionN, resp: UserResponseN) -> SessionKeyN:
    S = session.server_identity
    if response_mac(session.user_id, S, session.r_i, session.n_s, session.n_i) != resp.c2:
        raise Rejected(Reason.AUTHENTICITY, "C_2 mismatch")
    return SessionKeyN(session_key(session.user_id, S, session.r_i, session.n_i, session.n_s),
                       confirmed=True)
