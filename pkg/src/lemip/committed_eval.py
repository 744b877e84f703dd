"""Algebra over committed values: linear forms, audited multiplication
triples, and committed polynomial evaluation.

Linear relations among commitments are free (the PR-type commitment is
additively homomorphic); products consume pre-committed random triples
(alpha, beta, gamma = alpha*beta) that survive a cut-and-choose audit.
Multiplying committed x and y with a triple opens only the masked
differences delta = x - alpha and eps = y - beta (uniform, value-hiding),
after which both sides derive

    [x*y] = [gamma] + delta*[beta] + eps*[alpha] + delta*eps

homomorphically.  A prover lying anywhere must produce a false unveiling,
which the verdict machine's cross-check (d - w2 = w1*z2 with the never
revealed z2) catches with probability 1 - 1/|F|.

Everything here is expressed over `Combo` - a linear form over base
commitment indices plus a public constant - so the verifier ledger, the
prover's openings, and the final verdict checks all speak the same
language.  The runtime protocols ship exactly the values these classes
produce and consume.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

from .fields import FieldSpec
from .runtime import ByteTape


class EvalError(ValueError):
    pass


class Combo:
    """Linear form  sum(coeff_i * base_i) + const  over commitment indices.

    Immutable; raw field ints throughout.  `const` is a public additive
    constant folded into the committed value (its c-share is const*z1,
    its d/w shares are zero).
    """

    __slots__ = ("spec", "bases", "const")

    def __init__(self, spec: FieldSpec, bases: dict[int, int] | None = None, const: int = 0):
        self.spec = spec
        self.bases = {i: c for i, c in (bases or {}).items() if c != 0}
        self.const = spec.canonical(const)

    @classmethod
    def base(cls, spec: FieldSpec, idx: int) -> "Combo":
        return cls(spec, {idx: 1})

    @classmethod
    def public(cls, spec: FieldSpec, value: int) -> "Combo":
        return cls(spec, {}, value)

    def add(self, other: "Combo") -> "Combo":
        bases = dict(self.bases)
        for i, c in other.bases.items():
            bases[i] = self.spec.add(bases.get(i, 0), c)
        return Combo(self.spec, bases, self.spec.add(self.const, other.const))

    def scale(self, s: int) -> "Combo":
        return Combo(
            self.spec,
            {i: self.spec.mul(c, s) for i, c in self.bases.items()},
            self.spec.mul(self.const, s),
        )

    def sub(self, other: "Combo") -> "Combo":
        return self.add(other.scale(self.spec.neg(1)))

    def key(self) -> tuple:
        return (tuple(sorted(self.bases.items())), self.const)

    def __repr__(self) -> str:
        return f"Combo({self.bases}, +{self.const})"


class ProverCommitter:
    """Prover-side state: committed values and their openings.

    Fresh (w1, w2) pairs come off the shared prover tape in commitment
    order, which is what lets the silent second prover reproduce every
    cross-share d = w1*z2 + w2 without ever seeing the values.
    """

    def __init__(self, spec: FieldSpec, z1: int, tape: ByteTape):
        self.spec = spec
        self.z1 = z1
        self.tape = tape
        self.openings: list[tuple[int, int, int]] = []  # (v, w1, w2)

    def commit(self, v: int) -> tuple[int, int]:
        """Commit a value; returns (index, c)."""
        w1 = self.tape.field_elem(self.spec)
        w2 = self.tape.field_elem(self.spec)
        idx = len(self.openings)
        self.openings.append((self.spec.canonical(v), w1, w2))
        c = self.spec.add(self.spec.mul(self.openings[idx][0], self.z1), w1)
        return idx, c

    def value(self, combo: Combo) -> int:
        acc = combo.const
        for i, a in combo.bases.items():
            acc = self.spec.add(acc, self.spec.mul(a, self.openings[i][0]))
        return acc

    def opening(self, combo: Combo) -> tuple[int, int]:
        w1 = w2 = 0
        for i, a in combo.bases.items():
            _, bw1, bw2 = self.openings[i]
            w1 = self.spec.add(w1, self.spec.mul(a, bw1))
            w2 = self.spec.add(w2, self.spec.mul(a, bw2))
        return w1, w2


def cross_shares(spec: FieldSpec, tape: ByteTape, z2: int, count: int) -> list[int]:
    """Second prover's d-stream: d_j = w1_j*z2 + w2_j from the shared tape.

    Depends only on pre-shared randomness and z2, never on the values."""
    ds = []
    for _ in range(count):
        w1 = tape.field_elem(spec)
        w2 = tape.field_elem(spec)
        ds.append(spec.add(spec.mul(w1, z2), w2))
    return ds


@dataclass
class UnveilRecord:
    """One unveiling as the verdict machine will audit it."""

    combo_key: tuple
    claimed: int
    w1: int
    w2: int


class VerifierLedger:
    """V1-side state: received c-shares and in-run unveil checks.

    The c-side check (c_combo - w1 = claimed*z1) is all V1 can do alone;
    the d-side lives with V0.  Every unveiling is recorded for the tape.
    """

    def __init__(self, spec: FieldSpec, z1: int):
        self.spec = spec
        self.z1 = z1
        self.cs: list[int] = []
        self.records: list[UnveilRecord] = []

    def receive_commit(self, c: int) -> int:
        self.cs.append(self.spec.canonical(c))
        return len(self.cs) - 1

    def combo_c(self, combo: Combo) -> int:
        acc = self.spec.mul(combo.const, self.z1)
        for i, a in combo.bases.items():
            acc = self.spec.add(acc, self.spec.mul(a, self.cs[i]))
        return acc

    def check_unveil(self, combo: Combo, claimed: int, w1: int, w2: int) -> bool:
        ok = self.spec.sub(self.combo_c(combo), w1) == self.spec.mul(claimed, self.z1)
        self.records.append(UnveilRecord(combo.key(), claimed, w1, w2))
        return ok


def verify_openings_for_v0(
    spec: FieldSpec,
    z1: int,
    z2: int,
    cs: Sequence[int],
    ds: Sequence[int],
    records: Iterable[UnveilRecord],
) -> bool:
    """The verdict machine's commitment audit: both legs of every unveiling.

    c_combo - w1 = claimed*z1  and  d_combo - w2 = w1*z2, with the shares
    of public constants being (const*z1, 0, 0, 0)."""
    for rec in records:
        bases, const = rec.combo_key
        c_combo = spec.mul(const, z1)
        d_combo = 0
        for i, a in bases:
            if i >= len(cs) or i >= len(ds):
                return False
            c_combo = spec.add(c_combo, spec.mul(a, cs[i]))
            d_combo = spec.add(d_combo, spec.mul(a, ds[i]))
        if spec.sub(c_combo, rec.w1) != spec.mul(rec.claimed, z1):
            return False
        if spec.sub(d_combo, rec.w2) != spec.mul(rec.w1, z2):
            return False
    return True


# ---------------------------------------------------------------------------
# multiplication triples


@dataclass
class MulTriple:
    """Indices of one committed (alpha, beta, gamma) candidate."""

    ia: int
    ib: int
    ic: int
    status: str = "unopened"  # unopened | audited-ok | consumed


def gen_triples(
    committer: ProverCommitter, n: int, sigma: int, rng: random.Random
) -> tuple[list[MulTriple], list[int]]:
    """Prover commits 2*sigma*n candidate triples; returns (triples, c-shares)."""
    triples, cs = [], []
    for _ in range(2 * sigma * n):
        a = rng.randrange(committer.spec.order)
        b = rng.randrange(committer.spec.order)
        ia, ca = committer.commit(a)
        ib, cb = committer.commit(b)
        ic, cc = committer.commit(committer.spec.mul(a, b))
        triples.append(MulTriple(ia, ib, ic))
        cs.extend((ca, cb, cc))
    return triples, cs


def audit_selection(coins: ByteTape, total: int, opened: int) -> list[int]:
    """Verifier coins pick which triples to open fully."""
    return sorted(coins.sample(range(total), opened))


def corrupt_triple(committer: ProverCommitter, triple: MulTriple, offset: int = 1) -> None:
    """Fault injection: shift gamma so gamma != alpha*beta."""
    v, w1, w2 = committer.openings[triple.ic]
    committer.openings[triple.ic] = (committer.spec.add(v, offset), w1, w2)


class TripleAuditFailure(Exception):
    pass


def open_triples(
    committer: ProverCommitter, triples: Sequence[MulTriple], which: Sequence[int]
) -> list[tuple[int, ...]]:
    """Prover's audit response: (alpha, w1, w2, beta, w1, w2, gamma, w1, w2)."""
    msgs = []
    for t in which:
        trip = triples[t]
        parts = []
        for idx in (trip.ia, trip.ib, trip.ic):
            v, w1, w2 = committer.openings[idx]
            parts += [v, w1, w2]
        msgs.append(tuple(parts))
    return msgs


def audit_triples(
    ledger: VerifierLedger,
    triples: Sequence[MulTriple],
    which: Sequence[int],
    openings_msgs: Sequence[tuple[int, ...]],
) -> list[MulTriple]:
    """Check opened triples (c-side + gamma = alpha*beta); returns survivors.

    Raises TripleAuditFailure on any bad opening; survivors keep protocol
    order and are reserved for multiplications."""
    spec = ledger.spec
    which_set = set(which)
    for t, msg in zip(which, openings_msgs):
        trip = triples[t]
        a, aw1, aw2, b, bw1, bw2, g, gw1, gw2 = msg
        ok = ledger.check_unveil(Combo.base(spec, trip.ia), a, aw1, aw2)
        ok &= ledger.check_unveil(Combo.base(spec, trip.ib), b, bw1, bw2)
        ok &= ledger.check_unveil(Combo.base(spec, trip.ic), g, gw1, gw2)
        if not ok or spec.mul(a, b) != g:
            raise TripleAuditFailure(f"triple {t} failed audit")
        trip.status = "audited-ok"
    survivors = [trip for i, trip in enumerate(triples) if i not in which_set]
    for trip in survivors:
        trip.status = "audited-ok"
    return survivors


# ---------------------------------------------------------------------------
# committed multiplication


def mul_open(
    committer: ProverCommitter, cx: Combo, cy: Combo, triple: MulTriple
) -> tuple[int, ...]:
    """Prover's message for one multiplication: openings of the masks."""
    spec = committer.spec
    dcombo = cx.sub(Combo.base(spec, triple.ia))
    ecombo = cy.sub(Combo.base(spec, triple.ib))
    delta = committer.value(dcombo)
    eps = committer.value(ecombo)
    dw1, dw2 = committer.opening(dcombo)
    ew1, ew2 = committer.opening(ecombo)
    return (delta, dw1, dw2, eps, ew1, ew2)


def mul_result_combo(spec: FieldSpec, triple: MulTriple, delta: int, eps: int) -> Combo:
    """[x*y] = [gamma] + delta*[beta] + eps*[alpha] + delta*eps."""
    out = Combo.base(spec, triple.ic)
    out = out.add(Combo.base(spec, triple.ib).scale(delta))
    out = out.add(Combo.base(spec, triple.ia).scale(eps))
    return out.add(Combo.public(spec, spec.mul(delta, eps)))


def committed_mul_verify(
    ledger: VerifierLedger, cx: Combo, cy: Combo, triple: MulTriple, msg: tuple[int, ...]
) -> tuple[Combo, bool]:
    """Verifier absorbs a multiplication message; returns (result, c-side ok)."""
    if triple.status != "audited-ok":
        raise EvalError(f"triple not usable: {triple.status}")
    spec = ledger.spec
    delta, dw1, dw2, eps, ew1, ew2 = msg
    ok = ledger.check_unveil(cx.sub(Combo.base(spec, triple.ia)), delta, dw1, dw2)
    ok &= ledger.check_unveil(cy.sub(Combo.base(spec, triple.ib)), eps, ew1, ew2)
    triple.status = "consumed"
    return mul_result_combo(spec, triple, delta, eps), ok


# ---------------------------------------------------------------------------
# polynomial terms over mixed public/committed inputs


@dataclass(frozen=True)
class Term:
    """public_coeff * product(factors); factor = public int or affine Combo."""

    coeff: int
    factors: tuple[Any, ...]  # each: ("pub", value) | ("combo", Combo)


def poly_mul_count(terms: Sequence[Term]) -> int:
    """Multiplications among committed factors needed to evaluate the terms."""
    n = 0
    for t in terms:
        committed = sum(1 for f in t.factors if f[0] == "combo")
        n += max(committed - 1, 0)
    return n


class PolyEvalProver:
    """Prover half of committed_poly_eval; mirrors PolyEvalVerifier step
    for step so both sides derive the identical output combo."""

    def __init__(self, committer: ProverCommitter, triples: Sequence[MulTriple]):
        self.committer = committer
        self.queue = list(triples)
        self.messages: list[tuple[int, ...]] = []

    def _mul(self, cx: Combo, cy: Combo) -> Combo:
        if not self.queue:
            raise EvalError("triple pool exhausted")
        triple = self.queue.pop(0)
        msg = mul_open(self.committer, cx, cy, triple)
        self.messages.append(msg)
        return mul_result_combo(self.committer.spec, triple, msg[0], msg[3])

    def eval_terms(self, terms: Sequence[Term]) -> Combo:
        return _eval_terms(self.committer.spec, terms, self._mul)


class PolyEvalVerifier:
    def __init__(self, ledger: VerifierLedger, triples: Sequence[MulTriple], messages: Sequence[tuple[int, ...]]):
        self.ledger = ledger
        self.queue = list(triples)
        self.messages = list(messages)
        self.ok = True

    def _mul(self, cx: Combo, cy: Combo) -> Combo:
        if not self.queue or not self.messages:
            raise EvalError("triple pool or message stream exhausted")
        triple = self.queue.pop(0)
        msg = self.messages.pop(0)
        out, ok = committed_mul_verify(self.ledger, cx, cy, triple, msg)
        self.ok &= ok
        return out

    def eval_terms(self, terms: Sequence[Term]) -> Combo:
        return _eval_terms(self.ledger.spec, terms, self._mul)


def _eval_terms(
    spec: FieldSpec, terms: Sequence[Term], mul: Callable[[Combo, Combo], Combo]
) -> Combo:
    total = Combo(spec)
    for term in terms:
        pub = term.coeff
        combos: list[Combo] = []
        for f in term.factors:
            if f[0] == "pub":
                pub = spec.mul(pub, f[1])
            else:
                combos.append(f[1])
        if pub == 0:
            continue
        if not combos:
            total = total.add(Combo.public(spec, pub))
            continue
        acc = combos[0]
        for nxt in combos[1:]:
            acc = mul(acc, nxt)
        total = total.add(acc.scale(pub))
    return total


# ---------------------------------------------------------------------------
# direct two-party session (library surface; the runtime protocols ship
# these same values over channels)


class CommittedSession:
    """Both halves of the committed-evaluation machinery wired directly."""

    def __init__(self, spec: FieldSpec, seed: int = 0):
        self.spec = spec
        self._seed = seed
        keys_tape = ByteTape(seed, "session-keys")
        self.z1, _ = keys_tape.nonzero_field_elem(spec)
        self.z2, _ = keys_tape.nonzero_field_elem(spec)
        self.prover_tape = ByteTape(seed, "session-prover")
        self.committer = ProverCommitter(spec, self.z1, self.prover_tape)
        self.ledger = VerifierLedger(spec, self.z1)
        self.coins = ByteTape(seed, "session-coins")
        self.rng = random.Random(seed ^ 0x5EED)
        self.triples: list[MulTriple] = []
        self.survivors: list[MulTriple] = []

    def commit(self, v: int) -> Combo:
        idx, c = self.committer.commit(v)
        got = self.ledger.receive_commit(c)
        assert got == idx
        return Combo.base(self.spec, idx)

    def prepare_triples(self, n: int, sigma: int) -> None:
        self.triples, cs = gen_triples(self.committer, n, sigma, self.rng)
        for c in cs:
            self.ledger.receive_commit(c)
        which = audit_selection(self.coins, len(self.triples), sigma * n)
        msgs = open_triples(self.committer, self.triples, which)
        self.survivors = audit_triples(self.ledger, self.triples, which, msgs)
        self.survivors = self.coins.shuffled(self.survivors)

    def committed_mul(self, cx: Combo, cy: Combo) -> Combo:
        if not self.survivors:
            raise EvalError("triple pool exhausted")
        triple = self.survivors.pop(0)
        msg = mul_open(self.committer, cx, cy, triple)
        out, ok = committed_mul_verify(self.ledger, cx, cy, triple, msg)
        if not ok:
            raise EvalError("multiplication opening failed the c-side check")
        return out

    def prove_zero(self, combo: Combo) -> bool:
        """Prover unveils; verifier accepts iff the value is 0 (c-side)."""
        w1, w2 = self.committer.opening(combo)
        claimed = self.committer.value(combo)
        ok = self.ledger.check_unveil(combo, 0, w1, w2)
        return ok and claimed == 0

    def unveil(self, combo: Combo) -> tuple[int, bool]:
        w1, w2 = self.committer.opening(combo)
        claimed = self.committer.value(combo)
        ok = self.ledger.check_unveil(combo, claimed, w1, w2)
        return claimed, ok

    def committed_poly_eval(self, terms: Sequence[Term]) -> Combo:
        n = poly_mul_count(terms)
        pe_p = PolyEvalProver(self.committer, self.survivors[:n])
        out_p = pe_p.eval_terms(terms)
        pe_v = PolyEvalVerifier(self.ledger, self.survivors[:n], pe_p.messages)
        out_v = pe_v.eval_terms(terms)
        if out_p.key() != out_v.key():
            raise EvalError("prover and verifier derived different combos")
        if not pe_v.ok:
            raise EvalError("a multiplication opening failed")
        self.survivors = self.survivors[n:]
        return out_v

    def v0_audit(self) -> bool:
        """Replay every recorded unveiling with both keys in hand.

        The second prover's d-stream is reproduced by reading the shared
        tape again from the start - the same thing P2 does in-protocol."""
        p2_tape = ByteTape(self._seed, "session-prover")
        ds = cross_shares(self.spec, p2_tape, self.z2, len(self.committer.openings))
        return verify_openings_for_v0(
            self.spec, self.z1, self.z2, self.ledger.cs, ds, self.ledger.records
        )
