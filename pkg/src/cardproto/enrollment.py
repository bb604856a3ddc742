"""Registration and password change, shared by both login schemes."""

from __future__ import annotations

import random
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import FrozenSet, Iterator, Tuple

from .crypto import Digest, HashDomain, hash, xor

MAX_ID_LEN = 64
DEFAULT_SERVER_ID = "S"
DEFAULT_WINDOW = 60
HASH_FAMILY = tuple(HashDomain)


class Reason(str, Enum):
    PASSWORD = "password"
    IDENTITY = "identity"
    FRESHNESS = "freshness"
    AUTHENTICITY = "authenticity"
    DUPLICATE = "duplicate"


class Rejected(Exception):
    """A protocol participant refused to proceed."""

    def __init__(self, reason: Reason, detail: str = ""):
        self.reason = Reason(reason)
        self.detail = detail
        super().__init__(f"reject({self.reason.value})" + (f": {detail}" if detail else ""))


def _check_text(value: str, what: str) -> str:
    if not isinstance(value, str) or not value:
        raise ValueError(f"{what} must be a non-empty string")
    if len(value.encode("utf-8")) > MAX_ID_LEN:
        raise ValueError(f"{what} longer than {MAX_ID_LEN} octets")
    return value


def check_user_id(user_id: str) -> str:
    return _check_text(user_id, "user id")


def check_password(pw: str) -> str:
    return _check_text(pw, "password")


@dataclass(frozen=True)
class ServerState:
    master_secret: bytes = field(repr=False)
    server_identity: str = DEFAULT_SERVER_ID
    registry: FrozenSet[str] = frozenset()
    freshness_window: int = DEFAULT_WINDOW
    seen_requests: FrozenSet[Tuple[str, int]] = frozenset()

    def __post_init__(self):
        if len(self.master_secret) != 32:
            raise ValueError("master secret must be 32 octets")
        if self.freshness_window < 0:
            raise ValueError("freshness window must be non-negative")

    @classmethod
    def create(cls, rng: random.Random, server_identity: str = DEFAULT_SERVER_ID,
               freshness_window: int = DEFAULT_WINDOW) -> "ServerState":
        return cls(rng.randbytes(32), server_identity, frozenset(), freshness_window)

    def derive_ri(self, user_id: str) -> Digest:
        """R_i = h(ID_i, x_s)."""
        return hash(HashDomain.H, [user_id, self.master_secret])


@dataclass(frozen=True)
class SmartCard:
    user_id: str
    h_i: Digest
    x_i: Digest
    hash_family: Tuple[HashDomain, ...] = HASH_FAMILY

    def to_wire(self) -> dict:
        return {
            "type": "smart_card",
            "user_id": self.user_id,
            "h_i": self.h_i.hex(),
            "x_i": self.x_i.hex(),
            "hash_family": [d.name for d in self.hash_family],
        }

    @classmethod
    def from_wire(cls, data: dict) -> "SmartCard":
        return cls(data["user_id"], Digest.fromhex(data["h_i"]), Digest.fromhex(data["x_i"]),
                   tuple(HashDomain[n] for n in data["hash_family"]))

    def to_bytes(self) -> bytes:
        uid = self.user_id.encode("utf-8")
        return len(uid).to_bytes(1, "big") + uid + self.h_i + self.x_i + bytes(self.hash_family)


def password_mask(user_id: str, pw: str) -> Digest:
    """h(ID_i, PW_i)."""
    return hash(HashDomain.H, [user_id, pw])


def register_user(server: ServerState, user_id: str, pw: str) -> Tuple[ServerState, SmartCard]:
    check_user_id(user_id)
    check_password(pw)
    if user_id in server.registry:
        raise Rejected(Reason.DUPLICATE, f"{user_id!r} already registered")
    r_i = server.derive_ri(user_id)
    card = SmartCard(user_id, hash(HashDomain.H, [r_i]), xor(r_i, password_mask(user_id, pw)))
    return replace(server, registry=server.registry | {user_id}), card


# Counts card_local_check calls on the current thread, so callers can prove a
# code path never touched a card+password pair.
_usage = threading.local()


@contextmanager
def track_card_use() -> Iterator[list]:
    prev = getattr(_usage, "log", None)
    log: list = []
    _usage.log = log
    try:
        yield log
    finally:
        _usage.log = prev


def card_local_check(card: SmartCard, pw: str) -> Digest:
    """Recover R_i from the card and entered password, or reject.

    Raises ``Rejected(PASSWORD)`` when h(X_i xor h(ID_i, PW)) != H_i.
    """
    log = getattr(_usage, "log", None)
    if log is not None:
        log.append(card.user_id)
    r_prime = xor(card.x_i, password_mask(card.user_id, pw))
    if hash(HashDomain.H, [r_prime]) != card.h_i:
        raise Rejected(Reason.PASSWORD, "H_i check failed")
    return r_prime


def change_password(card: SmartCard, old_pw: str, new_pw: str) -> SmartCard:
    check_password(new_pw)
    r_i = card_local_check(card, old_pw)
    return replace(card, x_i=xor(r_i, password_mask(card.user_id, new_pw)))
