"""Executable attacks against both schemes.

Every attack returns an :class:`AttackReport` instead of raising; a failed
attack is ``succeeded=False`` with the rejection in the narrative. Attacks
take a ``tap`` callback ``tap(kind, actor, message)`` so a harness can log
the forged traffic onto its channel.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from . import scheme_nonce as sn
from . import scheme_timestamp as st
from .crypto import Digest, HashDomain, encode_fields, encode_item, hash, xor
from .enrollment import (DEFAULT_SERVER_ID, Rejected, Reason, ServerState,
                         SmartCard, password_mask, track_card_use)
from .kernels import scan_guesses

Tap = Optional[Callable[[str, str, object], None]]
ADVERSARY = "adversary"
SERVER = "server"
USER = "user"


@dataclass(frozen=True)
class ExtractedCard:
    user_id: str
    h_i: Digest
    x_i: Digest


@dataclass(frozen=True)
class RogueCredential:
    user_id: str
    r_i: Digest

    def corrupted(self, bit: int = 0) -> "RogueCredential":
        """Same credential with one bit of R_i flipped (control runs)."""
        raw = bytearray(self.r_i)
        raw[bit // 8] ^= 1 << (bit % 8)
        return RogueCredential(self.user_id, Digest(bytes(raw)))


class Dictionary:
    """Ordered candidate passwords. Duplicates are tried once."""

    def __init__(self, words):
        self.words: List[str] = list(words)
        self._encoded: Optional[Tuple[List[str], List[bytes]]] = None
        if not self.words:
            raise ValueError("dictionary must be non-empty")

    @classmethod
    def load(cls, path) -> "Dictionary":
        text = Path(path).read_text(encoding="utf-8")
        return cls(line for line in text.splitlines() if line)

    def unique(self) -> List[str]:
        return list(dict.fromkeys(self.words))

    def encoded(self) -> Tuple[List[str], List[bytes]]:
        """Deduplicated words and their UTF-8 forms, computed once."""
        if self._encoded is None:
            words = self.unique()
            self._encoded = (words, [w.encode("utf-8") for w in words])
        return self._encoded

    def __len__(self) -> int:
        return len(self.words)


@dataclass
class AttackReport:
    attack_name: str
    succeeded: bool = False
    guesses_tried: int = 0
    recovered_password: Optional[str] = None
    recovered_r_i: Optional[Digest] = None
    forged_messages_accepted: int = 0
    narrative: List[str] = field(default_factory=list)
    factors_used: List[str] = field(default_factory=list)
    session_keys: Dict[str, str] = field(default_factory=dict)

    def step(self, text: str) -> None:
        self.narrative.append(text)

    def accept(self, text: str) -> None:
        self.narrative.append("ACCEPT: " + text)

    def to_wire(self) -> dict:
        return {
            "type": "attack_report",
            "attack_name": self.attack_name,
            "succeeded": self.succeeded,
            "guesses_tried": self.guesses_tried,
            "recovered_password": self.recovered_password,
            "recovered_r_i": self.recovered_r_i.hex() if self.recovered_r_i else None,
            "forged_messages_accepted": self.forged_messages_accepted,
            "narrative": list(self.narrative),
            "factors_used": list(self.factors_used),
            "session_keys": dict(self.session_keys),
        }

    @classmethod
    def from_wire(cls, data: dict) -> "AttackReport":
        r_i = data.get("recovered_r_i")
        return cls(data["attack_name"], data["succeeded"], data["guesses_tried"],
                   data.get("recovered_password"), Digest.fromhex(r_i) if r_i else None,
                   data["forged_messages_accepted"], list(data["narrative"]),
                   list(data.get("factors_used", [])), dict(data.get("session_keys", {})))


def _emit(tap: Tap, kind: str, actor: str, msg) -> None:
    if tap is not None:
        tap(kind, actor, msg)


def extract_card(card: SmartCard) -> ExtractedCard:
    return ExtractedCard(card.user_id, card.h_i, card.x_i)


def recover_ri_insider(ex: ExtractedCard, pw: str) -> RogueCredential:
    """R_i = X_i xor h(ID_i, PW_i), using the insider's own password."""
    r_i = xor(ex.x_i, password_mask(ex.user_id, pw))
    if hash(HashDomain.H, [r_i]) != ex.h_i:
        raise Rejected(Reason.PASSWORD, "H_i check failed on extracted card")
    return RogueCredential(ex.user_id, r_i)


def clone_login_t(cred: RogueCredential, server: ServerState, now: int,
                  latency: int = 0, tap: Tap = None) -> AttackReport:
    """Log in to the timestamp scheme with only ``(ID_i, R_i)``."""
    report = AttackReport("clone_login_t", factors_used=["ID_i", "R_i"])
    S = server.server_identity
    req, session = st.login_from_secret(cred.user_id, cred.r_i, now, S, server.freshness_window)
    report.step(f"forged <ID_i={cred.user_id}, T={now}, C_1> from R_i alone")
    _emit(tap, "inject", ADVERSARY, req)
    try:
        reply, srv_session, _ = st.server_verify_login_t(server, req, now + latency)
    except Rejected as exc:
        report.step(f"server {exc}")
        return report
    report.forged_messages_accepted += 1
    report.accept("server verified forged C_1 and replied")
    _emit(tap, "send", SERVER, reply)
    try:
        key = st.user_verify_reply_t(session, reply, now + 2 * latency)
    except Rejected as exc:
        report.step(f"clone {exc}")
        return report
    server_key = st.server_session_key_t(srv_session)
    report.session_keys = {"clone": key.key.hex(), "server": server_key.key.hex()}
    report.succeeded = key.key == server_key.key
    report.step("clone verified C_2; session keys " + ("agree" if report.succeeded else "differ"))
    return report


def clone_login_n(cred: RogueCredential, server: ServerState, rng: random.Random,
                  tap: Tap = None) -> AttackReport:
    """Run the nonce scheme's challenge-response with only ``(ID_i, R_i)``."""
    report = AttackReport("clone_login_n", factors_used=["ID_i", "R_i"])
    S = server.server_identity
    req, session = sn.login_from_secret(cred.user_id, cred.r_i, rng, S)
    report.step(f"sent <ID_i={cred.user_id}, N_i> with no card")
    _emit(tap, "inject", ADVERSARY, req)
    try:
        ch, srv_session = sn.server_challenge_n(server, req, rng)
    except Rejected as exc:
        report.step(f"server {exc}")
        return report
    _emit(tap, "send", SERVER, ch)
    try:
        resp, clone_key = sn.user_verify_challenge_n(session, ch)
    except Rejected as exc:
        report.step(f"clone could not verify C_1: {exc}")
        # answer anyway with a C_2 under the held R_i, so the server side is also exercised
        resp = sn.UserResponseN(sn.response_mac(cred.user_id, S, cred.r_i, ch.n_s, req.n_i))
        clone_key = None
    else:
        report.step("clone verified C_1 using R_i")
    _emit(tap, "inject", ADVERSARY, resp)
    try:
        server_key = sn.server_verify_response_n(srv_session, resp)
    except Rejected as exc:
        report.step(f"server {exc}")
        return report
    report.forged_messages_accepted += 1
    report.accept("server verified forged C_2")
    if clone_key is None:
        return report
    report.session_keys = {"clone": clone_key.key.hex(), "server": server_key.key.hex()}
    report.succeeded = clone_key.key == server_key.key
    report.step("session keys " + ("agree" if report.succeeded else "differ"))
    return report


def _guess(report: AttackReport, ex: ExtractedCard, dictionary: Dictionary,
           check_prefix: bytes, check_suffix: bytes, target: bytes) -> AttackReport:
    words, encoded = dictionary.encoded()
    mask_prefix = HashDomain.H.prefix + encode_item(ex.user_id)
    idx = scan_guesses(encoded, bytes(ex.x_i), mask_prefix, check_prefix, check_suffix,
                       bytes(target))
    if idx < 0:
        report.guesses_tried = len(words)
        report.step(f"dictionary exhausted after {len(words)} guesses")
        return report
    pw = words[idx]
    report.guesses_tried = idx + 1
    report.recovered_password = pw
    report.recovered_r_i = xor(ex.x_i, password_mask(ex.user_id, pw))
    report.succeeded = True
    report.accept(f"guess #{idx + 1} {pw!r} reproduces the captured value")
    return report


def offline_guess(ex: ExtractedCard, observed: st.LoginRequestT, dictionary: Dictionary,
                  server_identity: str = DEFAULT_SERVER_ID) -> AttackReport:
    """Stolen card plus one intercepted login: test each word against C_1.

    Runs entirely offline; the server is never contacted.
    """
    report = AttackReport("offline_guess")
    report.step(f"extracted X_i from {ex.user_id}'s card; intercepted <ID_i, T={observed.t}, C_1>")
    prefix = HashDomain.H1.prefix + encode_fields([server_identity, ex.user_id]) \
        + (32).to_bytes(4, "big")
    return _guess(report, ex, dictionary, prefix, encode_item(observed.t), observed.c1)


def offline_guess_n(ex: ExtractedCard, login: sn.LoginRequestN, challenge: sn.ServerChallengeN,
                    dictionary: Dictionary,
                    server_identity: str = DEFAULT_SERVER_ID) -> AttackReport:
    """Same attack against a nonce-scheme transcript, checked on the server's C_1."""
    report = AttackReport("offline_guess_n")
    report.step("extension: guessing against an observed nonce-scheme C_1 = h1(S, ID_i, R_i*, N_i, N_s)")
    prefix = HashDomain.H1.prefix + encode_fields([server_identity, ex.user_id]) \
        + (32).to_bytes(4, "big")
    return _guess(report, ex, dictionary, prefix, encode_fields([login.n_i, challenge.n_s]),
                  challenge.c1)


def offline_guess_card_only(ex: ExtractedCard, dictionary: Dictionary) -> AttackReport:
    """Guess with the card alone: h(X_i xor h(ID_i, w)) = H_i filters candidates."""
    report = AttackReport("offline_guess_card_only")
    report.step("extension: no intercepted traffic, candidates filtered on H_i alone")
    prefix = HashDomain.H.prefix + (32).to_bytes(4, "big")
    return _guess(report, ex, dictionary, prefix, b"", ex.h_i)


def forge_server_reply(cred: RogueCredential, observed: st.LoginRequestT, now: int,
                       victim: st.UserSessionT, user_now: Optional[int] = None,
                       tap: Tap = None) -> AttackReport:
    """Answer an intercepted login as the server, using R_i only."""
    report = AttackReport("forge_server_reply", factors_used=["ID_i", "R_i"])
    S = victim.server_identity
    reply = st.ServerReplyT(now, st.reply_mac(observed.user_id, S, cred.r_i, now))
    report.step(f"forged <T'={now}, C_2> for {observed.user_id}")
    _emit(tap, "inject", ADVERSARY, reply)
    try:
        key = st.user_verify_reply_t(victim, reply, now if user_now is None else user_now)
    except Rejected as exc:
        report.step(f"user {exc}")
        return report
    report.forged_messages_accepted += 1
    report.accept("honest user accepted the forged reply as the server's")
    attacker_key = st.session_key(observed.user_id, S, cred.r_i, observed.t, now)
    report.session_keys = {"user": key.key.hex(), "attacker": attacker_key.hex()}
    report.succeeded = key.key == attacker_key
    return report


def two_factor_audit(server: ServerState, cred: RogueCredential, now: int,
                     rng: random.Random, latency: int = 0, tap: Tap = None) -> AttackReport:
    """Authenticate to both schemes while counting every card+password use.

    ``succeeded`` means the audit confirmed the missing second factor: both
    clones got through and no card check ran.
    """
    report = AttackReport("two_factor_audit")
    with track_card_use() as uses:
        rt = clone_login_t(cred, server, now, latency, tap)
        rn = clone_login_n(cred, server, rng, tap)
    for sub in (rt, rn):
        report.narrative.extend(f"[{sub.attack_name}] {line}" for line in sub.narrative)
        report.forged_messages_accepted += sub.forged_messages_accepted
        for side, key in sub.session_keys.items():
            report.session_keys[f"{sub.attack_name}.{side}"] = key
    report.factors_used = ["ID_i", "R_i"]
    report.step(f"card+password checks during audit: {len(uses)}")
    report.succeeded = rt.succeeded and rn.succeeded and not uses
    if report.succeeded:
        report.step("authenticated with factors used: {ID_i, R_i} only")
    else:
        report.step("schemes held: clone runs did not both authenticate")
    return report
