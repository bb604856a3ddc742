"""First scheme: timestamp-based login and mutual authentication.

Message flow::

    user   -> server : <ID_i, T, C_1>     C_1 = h1(S, ID_i, R_i, T)
    server -> user   : <T', C_2>          C_2 = h2(ID_i, S, R_i, T')
    both             : key = h3(ID_i, S, R_i, T, T')

Freshness: a receiver at time ``now`` accepts a timestamp ``t`` only when
``0 <= now - t <= window``. The server also keeps a seen-set of accepted
``(ID_i, T)`` pairs so an exact replay inside the window is refused.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Tuple

from .crypto import Digest, HashDomain, hash
from .enrollment import (DEFAULT_SERVER_ID, DEFAULT_WINDOW, Reason, Rejected,
                         ServerState, SmartCard, card_local_check)
from .wire import message


@message("login_request_t")
@dataclass(frozen=True)
class LoginRequestT:
    user_id: str
    t: int
    c1: Digest


@message("server_reply_t")
@dataclass(frozen=True)
class ServerReplyT:
    t_prime: int
    c2: Digest


@dataclass(frozen=True)
class SessionKeyT:
    key: Digest
    peer_confirmed: bool = True


@dataclass(frozen=True)
class UserSessionT:
    user_id: str
    r_i: Digest
    t_sent: int
    server_identity: str = DEFAULT_SERVER_ID
    window: int = DEFAULT_WINDOW


@dataclass(frozen=True)
class ServerSessionT:
    user_id: str
    r_i: Digest
    t: int
    t_prime: int
    server_identity: str


def login_mac(server_identity: str, user_id: str, r_i: bytes, t: int) -> Digest:
    return hash(HashDomain.H1, [server_identity, user_id, r_i, t])


def reply_mac(user_id: str, server_identity: str, r_i: bytes, t_prime: int) -> Digest:
    return hash(HashDomain.H2, [user_id, server_identity, r_i, t_prime])


def session_key(user_id: str, server_identity: str, r_i: bytes, t: int, t_prime: int) -> Digest:
    return hash(HashDomain.H3, [user_id, server_identity, r_i, t, t_prime])


def is_fresh(now: int, t: int, window: int) -> bool:
    return 0 <= now - t <= window


def login_from_secret(user_id: str, r_i: Digest, now: int,
                      server_identity: str = DEFAULT_SERVER_ID,
                      window: int = DEFAULT_WINDOW) -> Tuple[LoginRequestT, UserSessionT]:
    """Build the login request from R_i alone. Honest users reach this only
    through :func:`build_login_t`; a clone calls it directly."""
    req = LoginRequestT(user_id, now, login_mac(server_identity, user_id, r_i, now))
    return req, UserSessionT(user_id, r_i, now, server_identity, window)


def build_login_t(card: SmartCard, pw: str, now: int,
                  server_identity: str = DEFAULT_SERVER_ID,
                  window: int = DEFAULT_WINDOW) -> Tuple[LoginRequestT, UserSessionT]:
    r_i = card_local_check(card, pw)
    return login_from_secret(card.user_id, r_i, now, server_identity, window)


def server_verify_login_t(server: ServerState, req: LoginRequestT,
                          now: int) -> Tuple[ServerReplyT, ServerSessionT, ServerState]:
    """Check a login request and answer it.

    Returns the reply, the server-side session, and the server state with the
    request recorded in its seen-set. Rejections leave the state untouched.
    """
    if req.user_id not in server.registry:
        raise Rejected(Reason.IDENTITY, f"unknown id {req.user_id!r}")
    if not is_fresh(now, req.t, server.freshness_window):
        raise Rejected(Reason.FRESHNESS, f"T={req.t} outside window at now={now}")
    if (req.user_id, req.t) in server.seen_requests:
        raise Rejected(Reason.FRESHNESS, f"replayed request ({req.user_id!r}, {req.t})")
    S = server.server_identity
    r_i = server.derive_ri(req.user_id)
    if login_mac(S, req.user_id, r_i, req.t) != req.c1:
        raise Rejected(Reason.AUTHENTICITY, "C_1 mismatch")
    reply = ServerReplyT(now, reply_mac(req.user_id, S, r_i, now))
    session = ServerSessionT(req.user_id, r_i, req.t, now, S)
    server = replace(server, seen_requests=server.seen_requests | {(req.user_id, req.t)})
    return reply, session, server


def user_verify_reply_t(session: UserSessionT, reply: ServerReplyT, now: int) -> SessionKeyT:
    if not is_fresh(now, reply.t_prime, session.window):
        raise Rejected(Reason.FRESHNESS, f"T'={reply.t_prime} outside window at now={now}")
    S = session.server_identity
    if reply_mac(session.user_id, S, session.r_i, reply.t_prime) != reply.c2:
        raise Rejected(Reason.AUTHENTICITY, "C_2 mismatch")
    return SessionKeyT(session_key(session.user_id, S, session.r_i, session.t_sent, reply.t_prime))


def server_session_key_t(session: ServerSessionT) -> SessionKeyT:
    return SessionKeyT(session_key(session.user_id, session.server_identity,
                                   session.r_i, session.t, session.t_prime))
