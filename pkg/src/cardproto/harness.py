"""Deterministic scenario runner.

A scenario drives principals over a logged public channel. Every value that
could vary (master secret, nonces) comes from one ``random.Random(seed)``, so
a :class:`ScenarioConfig` fully determines its :class:`Transcript`.

Channel event kinds are ``send``, ``deliver``, ``intercept``, ``inject`` and
``drop``; protocol verdicts are logged in the same stream as ``accept`` and
``reject`` events so the transcript reads top to bottom.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from . import adversary as adv
from . import scheme_nonce as sn
from . import scheme_timestamp as st
from . import wire
from .enrollment import (DEFAULT_SERVER_ID, DEFAULT_WINDOW, Rejected, Reason,
                         ServerState, SmartCard, register_user, track_card_use)

EPOCH = 1_000_000
DEFAULT_USERS = (("alice", "sunshine"), ("bob", "hunter2"))
CHANNEL_KINDS = ("send", "deliver", "intercept", "inject", "drop")


class ConfigError(ValueError):
    pass


class ScenarioError(RuntimeError):
    pass


@dataclass
class ScenarioConfig:
    scenario_name: str
    seed: int = 0
    freshness_window: int = DEFAULT_WINDOW
    clock_skews: Dict[str, int] = field(default_factory=dict)
    users: List[Tuple[str, str]] = field(default_factory=lambda: [tuple(u) for u in DEFAULT_USERS])
    dictionary_path: Optional[str] = None
    latency: int = 1

    def to_wire(self) -> dict:
        return {
            "type": "config",
            "scenario_name": self.scenario_name,
            "seed": self.seed,
            "freshness_window": self.freshness_window,
            "clock_skews": dict(sorted(self.clock_skews.items())),
            "users": [list(u) for u in self.users],
            "dictionary_path": self.dictionary_path,
            "latency": self.latency,
        }

    @classmethod
    def from_wire(cls, d: dict) -> "ScenarioConfig":
        return cls(d["scenario_name"], d["seed"], d["freshness_window"], dict(d["clock_skews"]),
                   [tuple(u) for u in d["users"]], d.get("dictionary_path"), d.get("latency", 1))


@dataclass(frozen=True)
class ChannelEvent:
    seq: int
    tick: int
    kind: str
    actor: str
    message: Optional[dict] = None
    ref: Optional[int] = None
    detail: str = ""

    def to_wire(self) -> dict:
        out = {"type": "event", "seq": self.seq, "tick": self.tick, "kind": self.kind,
               "actor": self.actor}
        if self.message is not None:
            out["message"] = self.message
        if self.ref is not None:
            out["ref"] = self.ref
        if self.detail:
            out["detail"] = self.detail
        return out

    @classmethod
    def from_wire(cls, d: dict) -> "ChannelEvent":
        return cls(d["seq"], d["tick"], d["kind"], d["actor"], d.get("message"), d.get("ref"),
                   d.get("detail", ""))


@dataclass
class Transcript:
    config: ScenarioConfig
    events: List[ChannelEvent] = field(default_factory=list)
    reports: List[adv.AttackReport] = field(default_factory=list)
    expectations: List[Tuple[str, bool]] = field(default_factory=list)

    @property
    def failures(self) -> List[str]:
        return [name for name, held in self.expectations if not held]

    @property
    def all_pass(self) -> bool:
        return not self.failures

    def to_jsonl(self) -> str:
        lines = [self.config.to_wire()]
        lines += [e.to_wire() for e in self.events]
        lines += [r.to_wire() for r in self.reports]
        lines += [{"type": "expectation", "name": n, "held": h} for n, h in self.expectations]
        lines.append({"type": "verdict", "all_pass": self.all_pass, "failures": self.failures})
        return "".join(json.dumps(line, sort_keys=True, separators=(",", ":")) + "\n"
                       for line in lines)

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        records = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not records or records[0].get("type") != "config":
            raise ValueError("transcript must start with a config record")
        t = cls(ScenarioConfig.from_wire(records[0]))
        for r in records[1:]:
            kind = r.get("type")
            if kind == "event":
                t.events.append(ChannelEvent.from_wire(r))
            elif kind == "attack_report":
                t.reports.append(adv.AttackReport.from_wire(r))
            elif kind == "expectation":
                t.expectations.append((r["name"], r["held"]))
        return t


class Channel:
    """Public channel with a FIFO delivery queue and adversary taps."""

    def __init__(self, transcript: Transcript, skews: Dict[str, int], latency: int):
        self.transcript = transcript
        self.skews = skews
        self.latency = latency
        self.tick = EPOCH
        self.queue: deque = deque()

    def clock(self, principal: str) -> int:
        return self.tick + self.skews.get(principal, 0)

    def _log(self, kind: str, actor: str, message=None, ref=None, detail="",
             tick: Optional[int] = None) -> ChannelEvent:
        ev = ChannelEvent(len(self.transcript.events), self.tick if tick is None else tick,
                          kind, actor, None if message is None else wire.to_wire(message),
                          ref, detail)
        self.transcript.events.append(ev)
        return ev

    def send(self, actor: str, message) -> int:
        ev = self._log("send", actor, message)
        self.queue.append((ev.seq, message))
        return ev.seq

    def inject(self, actor: str, message, tick: Optional[int] = None) -> int:
        ev = self._log("inject", actor, message, tick=tick)
        self.queue.append((ev.seq, message))
        return ev.seq

    def deliver(self, recipient: str):
        if not self.queue:
            raise ScenarioError("deliver on an empty channel")
        src, message = self.queue.popleft()
        self.tick += self.latency
        self._log("deliver", recipient, message, ref=src)
        return message

    def drop(self, actor: str = adv.ADVERSARY):
        if not self.queue:
            raise ScenarioError("drop on an empty channel")
        src, message = self.queue.popleft()
        self._log("drop", actor, message, ref=src)
        return message

    def intercept(self, predicate: Callable[[object], bool], actor: str = adv.ADVERSARY):
        """Passive tap: copy the first matching sent message and log it."""
        for ev in self.transcript.events:
            if ev.kind in ("send", "inject") and ev.message is not None:
                msg = wire.from_wire(ev.message)
                if predicate(msg):
                    self._log("intercept", actor, msg, ref=ev.seq)
                    return msg
        raise ScenarioError("no matching message to intercept")

    def outcome(self, actor: str, accepted: bool, detail: str) -> None:
        self._log("accept" if accepted else "reject", actor, detail=detail)

    def tap(self, kind: str, actor: str, message) -> None:
        """Route an attack's traffic through the channel (emit then deliver)."""
        if kind == "inject":
            self.inject(actor, message)
        else:
            self.send(actor, message)
        if isinstance(message, (st.LoginRequestT, sn.LoginRequestN, sn.UserResponseN)):
            recipient = adv.SERVER
        else:
            recipient = adv.ADVERSARY if actor == adv.SERVER else adv.USER
        self.deliver(recipient)


class Run:
    """Shared state of one scenario execution."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.transcript = Transcript(config)
        self.rng = random.Random(config.seed)
        self.channel = Channel(self.transcript, dict(config.clock_skews), config.latency)
        self.server = ServerState.create(self.rng, DEFAULT_SERVER_ID, config.freshness_window)
        self.cards: Dict[str, SmartCard] = {}
        self.passwords: Dict[str, str] = {}
        if not config.users:
            raise ConfigError("scenario needs at least one user")
        for uid, pw in config.users:
            try:
                self.server, self.cards[uid] = register_user(self.server, uid, pw)
            except (Rejected, ValueError) as exc:
                raise ConfigError(f"cannot register {uid!r}: {exc}") from None
            self.passwords[uid] = pw
        if config.freshness_window < 0 or config.latency < 0:
            raise ConfigError("window and latency must be non-negative")
        for principal, skew in config.clock_skews.items():
            if EPOCH + skew < 0:
                raise ConfigError(f"skew for {principal!r} drives its clock below zero")

    @property
    def first_user(self) -> Tuple[str, str]:
        return self.config.users[0]

    def expect(self, name: str, held: bool) -> bool:
        self.transcript.expectations.append((name, bool(held)))
        return held

    def report(self, report: adv.AttackReport) -> adv.AttackReport:
        self.transcript.reports.append(report)
        return report

    # honest protocol runs over the channel

    def login_t(self, uid: str, pw: str, actor: str = "user"):
        """LF1-LF4 then AF1-AF3. Returns (request, user_session, reply-or-None)."""
        ch = self.channel
        S, w = self.server.server_identity, self.server.freshness_window
        req, session = st.build_login_t(self.cards[uid], pw, ch.clock(actor), S, w)
        ch.send(actor, req)
        return req, session, self.server_receive_t(ch.deliver("server"))

    def server_receive_t(self, req: st.LoginRequestT):
        ch = self.channel
        try:
            reply, srv_session, self.server = st.server_verify_login_t(
                self.server, req, ch.clock("server"))
        except Rejected as exc:
            ch.outcome("server", False, str(exc))
            return None
        ch.outcome("server", True, f"C_1 verified for {req.user_id}")
        ch.send("server", reply)
        return reply, srv_session

    def honest_t(self, uid: str, pw: str, actor: str = "user") -> Optional[bool]:
        req, session, answered = self.login_t(uid, pw, actor)
        if answered is None:
            return False
        _, srv_session = answered
        ch = self.channel
        reply = ch.deliver(actor)
        try:
            key = st.user_verify_reply_t(session, reply, ch.clock(actor))
        except Rejected as exc:
            ch.outcome(actor, False, str(exc))
            return False
        agree = key.key == st.server_session_key_t(srv_session).key
        ch.outcome(actor, agree, f"session key {key.key.hex()} "
                   + ("equals server key" if agree else "differs from server key"))
        return agree

    def honest_n(self, uid: str, pw: str, actor: str = "user") -> bool:
        ch = self.channel
        req, session = sn.build_login_n(self.cards[uid], pw, self.rng, self.server.server_identity)
        ch.send(actor, req)
        try:
            chal, srv_session = sn.server_challenge_n(self.server, ch.deliver("server"), self.rng)
        except Rejected as exc:
            ch.outcome("server", False, str(exc))
            return False
        ch.send("server", chal)
        try:
            resp, user_key = sn.user_verify_challenge_n(session, ch.deliver(actor))
        except Rejected as exc:
            ch.outcome(actor, False, str(exc))
            return False
        ch.outcome(actor, True, "C_1 verified, server authenticated")
        ch.send(actor, resp)
        try:
            srv_key = sn.server_verify_response_n(srv_session, ch.deliver("server"))
        except Rejected as exc:
            ch.outcome("server", False, str(exc))
            return False
        agree = srv_key.key == user_key.key
        ch.outcome("server", agree, f"C_2 verified; session key {srv_key.key.hex()} "
                   + ("equals user key" if agree else "differs from user key"))
        return agree

    def insider_credential(self, uid: str, pw: str) -> adv.RogueCredential:
        cred = adv.recover_ri_insider(adv.extract_card(self.cards[uid]), pw)
        self.expect(f"insider recovers R_i for {uid}", cred.r_i == self.server.derive_ri(uid))
        return cred


def _predict_honest_t(config: ScenarioConfig) -> bool:
    skew_u = config.clock_skews.get("user", 0)
    skew_s = config.clock_skews.get("server", 0)
    to_server = config.latency + skew_s - skew_u
    to_user = config.latency + skew_u - skew_s
    w = config.freshness_window
    return 0 <= to_server <= w and 0 <= to_user <= w


def scenario_honest_t(run: Run) -> None:
    expected = _predict_honest_t(run.config)
    for uid, pw in run.config.users:
        ok = run.honest_t(uid, pw)
        run.expect(f"honest_t {uid}: accepted={expected}", ok == expected)


def scenario_honest_n(run: Run) -> None:
    for uid, pw in run.config.users:
        run.expect(f"honest_n {uid}: keys agree", run.honest_n(uid, pw))


def scenario_replay_t(run: Run) -> None:
    uid, pw = run.first_user
    run.expect("honest login accepted", run.honest_t(uid, pw))
    captured = run.channel.intercept(lambda m: isinstance(m, st.LoginRequestT))
    run.channel.inject(adv.ADVERSARY, captured)
    answered = run.server_receive_t(run.channel.deliver("server"))
    last = run.transcript.events[-1]
    run.expect("replayed request rejected (freshness)",
               answered is None and last.kind == "reject" and Reason.FRESHNESS.value in last.detail)


def _insider_setup(run: Run):
    uid, pw = run.first_user
    run.channel.outcome(uid, True, "insider extracts own card and recovers R_i")
    return run.insider_credential(uid, pw)


def scenario_insider_clone_t(run: Run) -> None:
    cred = _insider_setup(run)
    ch = run.channel
    with track_card_use() as uses:
        rep = adv.clone_login_t(cred, run.server, ch.clock(adv.ADVERSARY), ch.latency, ch.tap)
    run.report(rep)
    run.expect("clone_login_t accepted without card or password", rep.succeeded and not uses)


def scenario_insider_clone_n(run: Run) -> None:
    cred = _insider_setup(run)
    with track_card_use() as uses:
        rep = adv.clone_login_n(cred, run.server, run.rng, run.channel.tap)
    run.report(rep)
    run.expect("clone_login_n accepted without card or password", rep.succeeded and not uses)


def scenario_stolen_card_guess(run: Run) -> None:
    if not run.config.dictionary_path:
        raise ConfigError("stolen_card_guess needs --dict PATH")
    try:
        dictionary = adv.Dictionary.load(run.config.dictionary_path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load dictionary: {exc}") from None
    uid, pw = run.first_user
    run.expect("honest login accepted", run.honest_t(uid, pw))
    observed = run.channel.intercept(lambda m: isinstance(m, st.LoginRequestT) and m.user_id == uid)
    ex = adv.extract_card(run.cards[uid])
    rep = run.report(adv.offline_guess(ex, observed, dictionary, run.server.server_identity))
    run.expect("offline guess recovers the password", rep.succeeded and rep.recovered_password == pw)
    run.expect("recovered R_i matches server's", rep.recovered_r_i == run.server.derive_ri(uid))
    card_only = run.report(adv.offline_guess_card_only(ex, dictionary))
    run.expect("card-only guess agrees", card_only.recovered_password == rep.recovered_password)
    if rep.succeeded:
        ch = run.channel
        clone = run.report(adv.clone_login_t(adv.RogueCredential(uid, rep.recovered_r_i),
                                             run.server, ch.clock(adv.ADVERSARY), ch.latency, ch.tap))
        run.expect("recovered R_i logs in", clone.succeeded)


def scenario_server_masquerade_t(run: Run) -> None:
    uid, pw = run.first_user
    cred = run.insider_credential(uid, pw)
    ch = run.channel
    S, w = run.server.server_identity, run.server.freshness_window
    req, session = st.build_login_t(run.cards[uid], pw, ch.clock("user"), S, w)
    ch.send("user", req)
    observed = ch.intercept(lambda m: isinstance(m, st.LoginRequestT))
    ch.drop()
    rep = adv.forge_server_reply(cred, observed, ch.clock(adv.ADVERSARY), session,
                                 user_now=ch.clock(adv.ADVERSARY) + ch.latency, tap=ch.tap)
    run.report(rep)
    run.expect("honest user accepts forged server reply", rep.succeeded)


def scenario_two_factor_audit(run: Run) -> None:
    cred = _insider_setup(run)
    ch = run.channel
    rep = run.report(adv.two_factor_audit(run.server, cred, ch.clock(adv.ADVERSARY), run.rng,
                                          ch.latency, ch.tap))
    run.expect("audit: both schemes pass with {ID_i, R_i} only",
               rep.succeeded and rep.factors_used == ["ID_i", "R_i"])
    control = adv.two_factor_audit(run.server, cred.corrupted(), ch.clock(adv.ADVERSARY), run.rng,
                                   ch.latency)
    control.attack_name = "two_factor_audit_control"
    run.report(control)
    run.expect("control: corrupted R_i fails", not control.succeeded)


SCENARIOS: Dict[str, Callable[[Run], None]] = {
    "honest_t": scenario_honest_t,
    "honest_n": scenario_honest_n,
    "replay_t": scenario_replay_t,
    "insider_clone_t": scenario_insider_clone_t,
    "insider_clone_n": scenario_insider_clone_n,
    "stolen_card_guess": scenario_stolen_card_guess,
    "server_masquerade_t": scenario_server_masquerade_t,
    "two_factor_audit": scenario_two_factor_audit,
}


def run_scenario(config: ScenarioConfig) -> Transcript:
    try:
        body = SCENARIOS[config.scenario_name]
    except KeyError:
        raise ConfigError(f"unknown scenario {config.scenario_name!r}; "
                          f"available: {', '.join(SCENARIOS)}") from None
    run = Run(config)
    body(run)
    return run.transcript


def render_report(transcript: Transcript) -> str:
    cfg = transcript.config
    out = [f"scenario {cfg.scenario_name} (seed {cfg.seed}, window {cfg.freshness_window}, "
           f"latency {cfg.latency})"]
    for ev in transcript.events:
        what = ev.message["type"] if ev.message else ev.detail
        ref = f" <- #{ev.ref}" if ev.ref is not None else ""
        out.append(f"  #{ev.seq:<3} t={ev.tick:<8} {ev.kind:<9} {ev.actor:<10} {what}{ref}")
    for rep in transcript.reports:
        status = "SUCCEEDED" if rep.succeeded else "FAILED"
        out.append(f"attack {rep.attack_name}: {status}")
        if rep.guesses_tried:
            out.append(f"  guesses tried: {rep.guesses_tried}")
        if rep.recovered_password is not None:
            out.append(f"  recovered password: {rep.recovered_password}")
        if rep.factors_used:
            out.append(f"  factors used: {{{', '.join(rep.factors_used)}}}")
        out.extend(f"  - {line}" for line in rep.narrative)
        for side, key in rep.session_keys.items():
            out.append(f"  key[{side}] = {key}")
    for name, held in transcript.expectations:
        out.append(f"[{'ok' if held else 'FAIL'}] {name}")
    out.append("verdict: " + ("all_pass" if transcript.all_pass
                              else "FAIL (" + "; ".join(transcript.failures) + ")"))
    return "\n".join(out)
