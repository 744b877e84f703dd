"""Locality-explicit ITM runtime.

Parties are generator-based programs scheduled round-robin; every message
must travel a declared channel, and any off-channel send raises
LocalityViolation.  A run is strictly single-threaded and deterministic:
identical seeds reproduce transcripts byte for byte.

Party roles: provers P1..Pk, verifiers V1..Vk, the read-only verdict
machine V0, and optional correlators (Phat for provers, Vhat for
verifiers).  V0 never runs a program; it is a pure decision rule applied
to the verifier output tapes at the end of the run.
"""

from __future__ import annotations

import hashlib
import json
import random
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Iterator, Sequence

PROVER = "prover"
VERIFIER = "verifier"
CORRELATOR_P = "correlator-P"
CORRELATOR_V = "correlator-V"
VERDICT = "verdict-V0"

_ROLE_ORDER = {VERDICT: 0, VERIFIER: 1, PROVER: 2, CORRELATOR_V: 3, CORRELATOR_P: 4}


class TopologyViolation(Exception):
    """A declared channel set breaks the locality-explicit wiring rules."""


class LocalityViolation(Exception):
    """A party attempted to use an undeclared channel or direction."""

    def __init__(self, msg: str, transcript: "Transcript | None" = None):
        super().__init__(msg)
        self.transcript = transcript


class DeadlockError(Exception):
    """No party can make progress while some verifier has not halted."""

    def __init__(self, msg: str, transcript: "Transcript | None" = None):
        super().__init__(msg)
        self.transcript = transcript


@dataclass(frozen=True, order=True)
class PartyId:
    role: str
    index: int = 0

    def __repr__(self) -> str:
        return {
            PROVER: f"P{self.index}",
            VERIFIER: f"V{self.index}",
            VERDICT: "V0",
            CORRELATOR_P: "Phat",
            CORRELATOR_V: "Vhat",
        }[self.role]


def prover(i: int) -> PartyId:
    return PartyId(PROVER, i)


def verifier(i: int) -> PartyId:
    return PartyId(VERIFIER, i)


V0 = PartyId(VERDICT, 0)
PHAT = PartyId(CORRELATOR_P, 0)
VHAT = PartyId(CORRELATOR_V, 0)

TWO_WAY = "two-way"
ONE_WAY = "one-way"


@dataclass(frozen=True)
class ChannelSpec:
    """Channel between two distinct parties; one-way means a -> b only."""

    a: PartyId
    b: PartyId
    direction: str = TWO_WAY

    def __post_init__(self):
        if self.a == self.b:
            raise TopologyViolation(f"self-channel at {self.a}")
        if self.direction not in (TWO_WAY, ONE_WAY):
            raise TopologyViolation(f"bad direction {self.direction}")

    def allows(self, frm: PartyId, to: PartyId) -> bool:
        if self.direction == TWO_WAY:
            return {frm, to} == {self.a, self.b}
        return frm == self.a and to == self.b

    def name(self) -> str:
        arrow = "<->" if self.direction == TWO_WAY else "->"
        return f"{self.a!r}{arrow}{self.b!r}"


class Topology:
    """Validated party set + channel set with shared random strings R, S."""

    def __init__(
        self,
        parties: Sequence[PartyId],
        channels: Sequence[ChannelSpec],
        R: int = 0,
        S: int = 0,
    ):
        self.parties = sorted(set(parties), key=lambda p: (_ROLE_ORDER[p.role], p.index))
        self.channels = list(channels)
        self.R = R
        self.S = S
        self._validate()
        self._lookup: dict[tuple[PartyId, PartyId], ChannelSpec] = {}
        for ch in self.channels:
            self._lookup[(ch.a, ch.b)] = ch
            if ch.direction == TWO_WAY:
                self._lookup[(ch.b, ch.a)] = ch

    def _validate(self) -> None:
        party_set = set(self.parties)
        verdicts = [p for p in self.parties if p.role == VERDICT]
        if len(verdicts) != 1:
            raise TopologyViolation("exactly one verdict verifier V0 required")
        for ch in self.channels:
            for end in (ch.a, ch.b):
                if end not in party_set:
                    raise TopologyViolation(f"channel endpoint {end!r} not a party")
        for ch in self.channels:
            roles = {ch.a.role, ch.b.role}
            if roles == {PROVER}:
                raise TopologyViolation(f"prover-prover channel {ch.name()}")
            if VERDICT in roles:
                # V0 only reads: must be one-way into V0 from a verifier
                if ch.direction != ONE_WAY or ch.b != V0 or ch.a.role != VERIFIER:
                    raise TopologyViolation(f"V0 may only read verifier tapes: {ch.name()}")
            if roles == {PROVER, VERIFIER} and ch.a.index != ch.b.index:
                raise TopologyViolation(f"cross-pair channel {ch.name()}")
            if roles == {VERIFIER} or roles == {CORRELATOR_P, CORRELATOR_V}:
                raise TopologyViolation(f"undeclarable channel {ch.name()}")
            if CORRELATOR_P in roles and VERIFIER in roles:
                raise TopologyViolation(f"verifier on prover correlator: {ch.name()}")
            if CORRELATOR_V in roles and PROVER in roles:
                raise TopologyViolation(f"prover on verifier correlator: {ch.name()}")
        # every prover: exactly one channel to its own verifier, at most one to Phat
        for p in self.parties:
            if p.role != PROVER:
                continue
            to_verifier = [
                ch for ch in self.channels
                if {ch.a, ch.b} == {p, PartyId(VERIFIER, p.index)}
            ]
            if len(to_verifier) != 1:
                raise TopologyViolation(f"{p!r} needs exactly one channel to V{p.index}")

    def channel_for(self, frm: PartyId, to: PartyId) -> ChannelSpec:
        ch = self._lookup.get((frm, to))
        if ch is None or not ch.allows(frm, to):
            raise LocalityViolation(f"no declared channel {frm!r} -> {to!r}")
        return ch

    def is_local(self) -> bool:
        """True when Vhat = Phat = empty (no correlator parties)."""
        return all(p.role not in (CORRELATOR_P, CORRELATOR_V) for p in self.parties)


def build_topology(
    n_pairs: int,
    *,
    prover_correlator: bool = False,
    verifier_correlator: bool = False,
    R: int = 0,
    S: int = 0,
    extra_channels: Sequence[ChannelSpec] = (),
) -> Topology:
    """Standard LE-MIP wiring: k prover/verifier pairs, tapes to V0 and
    optional correlators.  Extra channels are validated like any other."""
    parties: list[PartyId] = [V0]
    channels: list[ChannelSpec] = []
    for i in range(1, n_pairs + 1):
        pi, vi = prover(i), verifier(i)
        parties += [pi, vi]
        channels.append(ChannelSpec(vi, pi, TWO_WAY))
        channels.append(ChannelSpec(vi, V0, ONE_WAY))
    if prover_correlator:
        parties.append(PHAT)
        channels += [ChannelSpec(prover(i), PHAT) for i in range(1, n_pairs + 1)]
    if verifier_correlator:
        parties.append(VHAT)
        channels += [ChannelSpec(verifier(i), VHAT) for i in range(1, n_pairs + 1)]
    channels += list(extra_channels)
    return Topology(parties, channels, R=R, S=S)


# ---------------------------------------------------------------------------
# messages + transcript


@dataclass(frozen=True)
class Message:
    seq: int
    sender: PartyId
    receiver: PartyId
    channel: str
    payload: Any


def encode_payload(obj: Any) -> bytes:
    """Deterministic byte encoding of structured payloads (TLV)."""
    if obj is None:
        return b"n"
    if isinstance(obj, bool):
        return b"b1" if obj else b"b0"
    if isinstance(obj, int):
        raw = obj.to_bytes((obj.bit_length() + 8) // 8, "little", signed=True)
        return b"i" + len(raw).to_bytes(4, "little") + raw
    if isinstance(obj, bytes):
        return b"y" + len(obj).to_bytes(4, "little") + obj
    if isinstance(obj, str):
        raw = obj.encode()
        return b"s" + len(raw).to_bytes(4, "little") + raw
    if isinstance(obj, (tuple, list)):
        parts = [encode_payload(x) for x in obj]
        return b"t" + len(parts).to_bytes(4, "little") + b"".join(parts)
    raise TypeError(f"unencodable payload part: {type(obj)}")


class Transcript:
    """Ordered message log plus per-verifier output tapes and the verdict."""

    def __init__(self) -> None:
        self.messages: list[Message] = []
        self.tapes: dict[int, list[Any]] = {}
        self.verdict: str | None = None

    def append(self, msg: Message) -> None:
        self.messages.append(msg)
        if msg.receiver == V0:
            self.tapes.setdefault(msg.sender.index, []).append(msg.payload)

    def canonical_bytes(self, include_correlators: bool = True) -> bytes:
        h = []
        for m in self.messages:
            if not include_correlators and (
                m.sender.role in (CORRELATOR_P, CORRELATOR_V)
                or m.receiver.role in (CORRELATOR_P, CORRELATOR_V)
            ):
                continue
            h.append(
                repr(m.sender).encode()
                + b">"
                + repr(m.receiver).encode()
                + encode_payload(m.payload)
            )
        tail = (self.verdict or "").encode()
        return b"|".join(h) + b"#" + tail

    def digest(self, include_correlators: bool = True) -> bytes:
        return hashlib.sha256(self.canonical_bytes(include_correlators)).digest()

    def export_jsonl(self) -> str:
        lines = []
        for m in self.messages:
            lines.append(
                json.dumps(
                    {
                        "seq": m.seq,
                        "from": repr(m.sender),
                        "to": repr(m.receiver),
                        "channel": m.channel,
                        "payload_hex": encode_payload(m.payload).hex(),
                    },
                    separators=(",", ":"),
                )
            )
        return "\n".join(lines)

    def messages_between(self, a: PartyId, b: PartyId) -> list[Message]:
        return [
            m
            for m in self.messages
            if {m.sender, m.receiver} == {a, b}
        ]


# ---------------------------------------------------------------------------
# scheduler effects


@dataclass(frozen=True)
class Send:
    to: PartyId
    payload: Any


@dataclass(frozen=True)
class Recv:
    frm: PartyId


class RecvAny:
    """Receive the earliest pending message from any declared channel."""


def derive_seed(*parts: Any) -> int:
    data = b"\x00".join(str(p).encode() for p in parts)
    return int.from_bytes(hashlib.sha256(data).digest()[:8], "little")


class ByteTape:
    """Deterministic byte/element stream derived from a seed and a label.

    Every party constructing a tape from the same (seed, label) reads the
    identical stream: this realizes the shared strings R and S.
    """

    def __init__(self, seed: int, label: str = ""):
        self._rng = random.Random(derive_seed(seed, label))

    def read(self, n: int) -> bytes:
        return self._rng.randbytes(n)

    def randint_below(self, bound: int) -> int:
        return self._rng.randrange(bound)

    def field_elem(self, spec) -> int:
        return self._rng.randrange(spec.order)

    def nonzero_field_elem(self, spec) -> tuple[int, int]:
        """Uniform nonzero element; returns (value, resample_count)."""
        resamples = 0
        v = self._rng.randrange(spec.order)
        while v == 0:
            resamples += 1
            v = self._rng.randrange(spec.order)
        return v, resamples

    def sample(self, population: Sequence[int], k: int) -> list[int]:
        return self._rng.sample(list(population), k)

    def shuffled(self, items: Sequence[Any]) -> list[Any]:
        out = list(items)
        self._rng.shuffle(out)
        return out


def shared_tape(seed: int, party_class: str) -> ByteTape:
    """Class-wide shared stream: provers read R, verifiers read S."""
    if party_class not in ("provers", "verifiers"):
        raise ValueError(f"unknown party class {party_class}")
    return ByteTape(seed, party_class)


class Context:
    """Per-party environment handed to programs (randomness, identity)."""

    def __init__(self, pid: PartyId, rand: random.Random, shared: ByteTape | None):
        self.pid = pid
        self.rand = rand
        self.shared = shared


Program = Callable[[Context], Iterator[Any]]


class _PartyState:
    __slots__ = ("pid", "gen", "inbox", "waiting", "done")

    def __init__(self, pid: PartyId, gen: Iterator[Any]):
        self.pid = pid
        self.gen = gen
        self.inbox: dict[PartyId, deque] = {}
        self.waiting: Any = None  # None | Recv | RecvAny
        self.done = False


def run_protocol(
    topology: Topology,
    programs: dict[PartyId, Program],
    seeds: dict[str, int] | None = None,
    verdict_rule: Callable[[dict[int, list[Any]]], str] | None = None,
    max_steps: int = 2_000_000,
) -> Transcript:
    """Round-robin deterministic execution until all verifiers halt.

    Provers and correlators are reactive and may be left blocked (that is
    what an aborting verifier produces); a cycle with no progress while a
    verifier is still live raises DeadlockError.  Any undeclared send
    aborts with LocalityViolation carrying the transcript so far.
    """
    seeds = seeds or {}
    R = seeds.get("R", topology.R)
    S = seeds.get("S", topology.S)
    base = seeds.get("base", derive_seed(R, S))

    transcript = Transcript()
    states: dict[PartyId, _PartyState] = {}
    for pid in topology.parties:
        if pid.role == VERDICT:
            continue
        prog = programs.get(pid)
        if prog is None:
            raise ValueError(f"no program for {pid!r}")
        if pid.role == PROVER:
            shared = shared_tape(R, "provers")
        elif pid.role == VERIFIER:
            shared = shared_tape(S, "verifiers")
        else:
            shared = None
        ctx = Context(pid, random.Random(derive_seed(base, repr(pid))), shared)
        states[pid] = _PartyState(pid, prog(ctx))

    order = [s for s in states.values()]
    seq = 0
    steps = 0

    def verifiers_live() -> bool:
        return any(not s.done for s in order if s.pid.role == VERIFIER)

    def deliver(state: _PartyState) -> tuple[bool, Any]:
        """Try to satisfy the party's pending receive."""
        w = state.waiting
        if isinstance(w, Recv):
            q = state.inbox.get(w.frm)
            if q:
                return True, q.popleft()[1]
            return False, None
        # RecvAny: earliest seq across inboxes
        best_pid, best_seq = None, None
        for sender, q in state.inbox.items():
            if q and (best_seq is None or q[0][0] < best_seq):
                best_pid, best_seq = sender, q[0][0]
        if best_pid is None:
            return False, None
        _, payload = state.inbox[best_pid].popleft()
        return True, (best_pid, payload)

    def step_party(state: _PartyState) -> bool:
        """Run one party until it blocks or halts; True if it progressed."""
        nonlocal seq, steps
        progressed = False
        while True:
            steps += 1
            if steps > max_steps:
                raise DeadlockError("step budget exhausted", transcript)
            try:
                if state.waiting is not None:
                    ok, value = deliver(state)
                    if not ok:
                        return progressed
                    state.waiting = None
                    effect = state.gen.send(value)
                else:
                    effect = next(state.gen)
            except StopIteration:
                state.done = True
                return True
            progressed = True
            if isinstance(effect, Send):
                try:
                    ch = topology.channel_for(state.pid, effect.to)
                except LocalityViolation as exc:
                    raise LocalityViolation(str(exc), transcript) from None
                msg = Message(seq, state.pid, effect.to, ch.name(), effect.payload)
                seq += 1
                transcript.append(msg)
                dest = states.get(effect.to)
                if dest is not None:
                    dest.inbox.setdefault(state.pid, deque()).append(
                        (msg.seq, effect.payload)
                    )
            elif isinstance(effect, (Recv, RecvAny)):
                # validate the read direction as strictly as sends
                if isinstance(effect, Recv):
                    try:
                        topology.channel_for(effect.frm, state.pid)
                    except LocalityViolation as exc:
                        raise LocalityViolation(str(exc), transcript) from None
                state.waiting = effect
            else:
                raise TypeError(f"unknown effect {effect!r} from {state.pid!r}")

    while verifiers_live():
        progressed = False
        for state in order:
            if state.done:
                continue
            if not verifiers_live():
                break
            progressed |= step_party(state)
        if not progressed and verifiers_live():
            raise DeadlockError(
                "no runnable party with unhalted verifiers", transcript
            )

    # drain: reactive parties flush work already in flight until they block
    # or halt, so the end-of-run cut is schedule-independent
    while True:
        progressed = False
        for state in order:
            if state.done or state.pid.role == VERIFIER:
                continue
            progressed |= step_party(state)
        if not progressed:
            break

    if verdict_rule is not None:
        transcript.verdict = v0_decide(transcript.tapes, verdict_rule)
    return transcript


def v0_decide(
    tapes: dict[int, list[Any]], rule: Callable[[dict[int, list[Any]]], str]
) -> str:
    """Pure verdict over finalized verifier tapes; never sends anything."""
    verdict = rule(tapes)
    if verdict not in ("accept", "reject"):
        raise ValueError(f"verdict rule returned {verdict!r}")
    return verdict


def all_accept_rule(tapes: dict[int, list[Any]]) -> str:
    """Accept iff every tape carries at least one entry and none flags reject."""
    if not tapes:
        return "reject"
    for entries in tapes.values():
        for e in entries:
            if e == "reject" or (isinstance(e, (tuple, list)) and "reject" in e):
                return "reject"
    return "accept"


def assert_pairwise_local(transcript: Transcript) -> None:
    """In a local LE-MIP the messages partition into (V_i, P_i) pairs plus
    one-way tape writes to V0."""
    for m in transcript.messages:
        if m.receiver == V0:
            assert m.sender.role == VERIFIER
            continue
        roles = {m.sender.role, m.receiver.role}
        assert roles == {PROVER, VERIFIER}, f"off-pair message {m}"
        assert m.sender.index == m.receiver.index, f"cross-pair message {m}"
