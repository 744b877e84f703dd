"""The local zero-knowledge protocol for oracle-3-SAT.

Structure per repetition (one isolated verifier per prover, verdict by V0):

  pre-computation:  both verifiers derive the commitment keys z1, z2, all
      questions, and the cross-check index from the shared string S; the
      provers derive the hash key gamma and the commitment randomness
      stream from the shared string R.
  commit setup:  P1 commits gamma and the multiplication-triple pool (with
      a cut-and-choose audit); P2 streams every cross-share
      d_j = w1_j*z2 + w2_j, which depends only on shared randomness.
  committed sumcheck:  the coefficients of each round polynomial are
      committed; the round relation g_i(0)+g_i(1) = s_{i-1} is proven zero
      homomorphically; the final value is matched against a committed
      evaluation of the arithmetization over the three committed oracle
      answers (audited triples plus one committed squaring).
  committed multilinearity:  each answer is committed; the line relations
      are linear and proven zero homomorphically.
  consistency:  P1 commits Omega_1 = A(Q_i) + H_gamma(Q_i), unveils it,
      and proves it was computed from the existing commitments (linear in
      the gamma and answer commitments); P2 answers Omega_2 in plaintext.

V0 accepts iff Omega_1 = Omega_2, every unveiling verifies against both
keys (the d-side check is what actually binds), and V1 never flagged a
failure.

Prover behavior is pluggable through a strategy object so honest provers,
the canonical cheats, and the PR-local simulators drive one program
skeleton and therefore produce identically shaped transcripts.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Iterator, Sequence

from .bfl import (
    CheatingSumcheckProver,
    HonestSumcheckProver,
    Oracle3SatInstance,
    OracleSumcheckPoly,
    QuestionBundle,
    VerifierProgram,
    best_constant_table,
    brute_force_oracle,
)
from .committed_eval import (
    Combo,
    MulTriple,
    Term,
    ProverCommitter,
    UnveilRecord,
    VerifierLedger,
    audit_selection,
    mul_result_combo,
    verify_openings_for_v0,
)
from .fields import FieldSpec, next_prime
from .runtime import (
    V0,
    ByteTape,
    Context,
    Recv,
    Send,
    build_topology,
    prover,
    run_protocol,
    verifier,
)


@dataclass(frozen=True)
class ZkParams:
    k: int = 16
    sigma: int = 8
    reps: int = 1

    def field(self) -> FieldSpec:
        return FieldSpec.prime(next_prime(1 << self.k))


def zk_seeds(seed: int) -> tuple[int, int]:
    """(S, R) for one trial."""
    return seed, seed ^ 0x7A7A7A7A


def su2_hash(spec: FieldSpec, gamma: Sequence[int], q: Sequence[int]) -> int:
    """Strongly universal-2 hash over F^s: H_gamma(Q) = sum a_j Q_j + b.

    The key gamma = (a_1..a_s, b) has s+1 field elements; for Q != Q' the
    pair (H(Q), H(Q')) is uniform over F^2 under a uniform key.
    """
    if len(gamma) != len(q) + 1:
        raise ValueError(f"key length {len(gamma)} != s+1 = {len(q) + 1}")
    acc = gamma[-1]
    for a, x in zip(gamma, q):
        acc = spec.add(acc, spec.mul(a, x))
    return acc


@dataclass(frozen=True)
class PrecomputationBundle:
    """Everything V1 and V2 derive identically from the shared string S."""

    z1: int
    z2: int
    questions: QuestionBundle
    key_resamples: int

    @property
    def istar(self) -> int:
        return self.questions.istar


def precompute(
    inst: Oracle3SatInstance, spec: FieldSpec, S: int, rep: int
) -> PrecomputationBundle:
    """Deterministic derivation; zero keys are resampled and the count
    recorded."""
    tape = ByteTape(S, f"zk-bundle-{rep}")
    z1, r1 = tape.nonzero_field_elem(spec)
    z2, r2 = tape.nonzero_field_elem(spec)
    vp = VerifierProgram(inst, spec)
    questions = vp.run(tape)
    return PrecomputationBundle(z1, z2, questions, r1 + r2)


def gamma_tape(R: int, rep: int) -> ByteTape:
    return ByteTape(R, f"zk-gamma-{rep}")


def w_tape(R: int, rep: int) -> ByteTape:
    return ByteTape(R, f"zk-w-{rep}")


def draw_gamma(spec: FieldSpec, R: int, rep: int, s: int) -> list[int]:
    tape = gamma_tape(R, rep)
    return [tape.field_elem(spec) for _ in range(s + 1)]


def line_coeffs(spec: FieldSpec, coords: Sequence[int]) -> tuple[int, int]:
    """Lagrange weights putting the third collinear point on the first two."""
    c1, c2, c3 = coords
    lam1 = spec.mul(spec.sub(c3, c2), spec.inv(spec.sub(c1, c2)))
    lam2 = spec.mul(spec.sub(c3, c1), spec.inv(spec.sub(c2, c1)))
    return lam1, lam2


def line_axis_coords(
    q1: Sequence[int], q2: Sequence[int], q3: Sequence[int]
) -> tuple[int, int, int]:
    """Recover the varied coordinate of an axis-parallel line from its
    three points (they differ in exactly one position)."""
    for j, (a, b) in enumerate(zip(q1, q2)):
        if a != b:
            return q1[j], q2[j], q3[j]
    raise ValueError("degenerate line: identical points")


class ZkSchedule:
    """Public commitment layout, identical on every side of the protocol.

    Commit order: gamma (s+1), triple pool (3 per triple), sumcheck
    coefficients (degree bound + 1 per round), the three oracle answers,
    the multilinearity answers, Omega.  P2 derives the total to stream its
    cross-shares."""

    def __init__(self, inst: Oracle3SatInstance, spec: FieldSpec, sigma: int):
        self.inst = inst
        self.spec = spec
        self.sigma = sigma
        vp = VerifierProgram(inst, spec)
        self.degree_bounds = vp.degree_bounds
        self.i_size = vp.i_size
        t_vars = {inst.t_var(j) for j in (1, 2, 3)}
        committed_factors = [
            sum(1 for lit in clause if abs(lit) in t_vars) for clause in inst.B.clauses
        ]
        self.n_mul = sum(max(t - 1, 0) for t in committed_factors) + 1  # + squaring
        self.n_triples = 2 * sigma * self.n_mul
        self.n_audit = sigma * self.n_mul

        s = inst.s
        pos = 0
        self.gamma_idx = list(range(pos, pos + s + 1))
        pos += s + 1
        self.triple_idx: list[tuple[int, int, int]] = []
        for _ in range(self.n_triples):
            self.triple_idx.append((pos, pos + 1, pos + 2))
            pos += 3
        self.coef_idx: list[list[int]] = []
        for d in self.degree_bounds:
            self.coef_idx.append(list(range(pos, pos + d + 1)))
            pos += d + 1
        self.oracle_idx = list(range(pos, pos + 3))
        pos += 3
        self.answer_idx = list(range(pos, pos + inst.n_questions))
        pos += inst.n_questions
        self.omega_idx = pos
        pos += 1
        self.total = pos

    def triples(self) -> list[MulTriple]:
        return [MulTriple(ia, ib, ic) for ia, ib, ic in self.triple_idx]

    def final_terms(self, challenges: Sequence[int]) -> list[Term]:
        """Clause terms of the arithmetization at the sumcheck point, with
        the t-variables as committed oracle answers."""
        spec = self.spec
        inst = self.inst
        terms = []
        for clause in inst.B.clauses:
            factors: list[Any] = []
            for lit in clause:
                var = abs(lit)
                if var <= inst.m:
                    val = challenges[var - 1]
                    factors.append(("pub", spec.sub(1, val) if lit > 0 else val))
                else:
                    j = var - inst.m  # 1..3
                    base = Combo.base(spec, self.oracle_idx[j - 1])
                    if lit > 0:
                        factors.append(("combo", Combo.public(spec, 1).sub(base)))
                    else:
                        factors.append(("combo", base))
            terms.append(Term(1, tuple(factors)))
        return terms

    def s_combo(self, i: int, r_i: int) -> Combo:
        """s_i = g_i(r_i) as a linear form over round-i coefficients."""
        bases = {}
        p = 1
        for idx in self.coef_idx[i]:
            bases[idx] = p
            p = self.spec.mul(p, r_i)
        return Combo(self.spec, bases)

    def rc_combo(self, i: int, prev: Combo | None) -> Combo:
        """g_i(0) + g_i(1) - s_{i-1} (s_0 is the public zero)."""
        bases = {idx: 1 for idx in self.coef_idx[i]}
        bases[self.coef_idx[i][0]] = 2
        combo = Combo(self.spec, bases)
        if prev is not None:
            combo = combo.sub(prev)
        return combo

    def line_zero_combo(
        self, li: int, questions: Sequence[Sequence[int]]
    ) -> Combo:
        """Third answer minus the degree-1 interpolation of the first two,
        derived from the three question points themselves."""
        spec = self.spec
        q1, q2, q3 = questions[3 * li], questions[3 * li + 1], questions[3 * li + 2]
        coords = line_axis_coords(q1, q2, q3)
        lam1, lam2 = line_coeffs(spec, coords)
        i1, i2, i3 = (self.answer_idx[3 * li + o] for o in range(3))
        return (
            Combo.base(spec, i3)
            .sub(Combo.base(spec, i1).scale(lam1))
            .sub(Combo.base(spec, i2).scale(lam2))
        )

    def n_lines(self) -> int:
        return self.inst.n_questions // 3

    def omega_proof_combo(self, ans_idx: int, q: Sequence[int]) -> Combo:
        """Omega - A(Q_i) - H_gamma(Q_i), gamma read from its commitments."""
        spec = self.spec
        combo = Combo.base(spec, self.omega_idx).sub(Combo.base(spec, ans_idx))
        for j, qj in enumerate(q):
            combo = combo.sub(Combo.base(spec, self.gamma_idx[j]).scale(qj))
        return combo.sub(Combo.base(spec, self.gamma_idx[-1]))

    def pool_index(self, istar: int) -> int:
        """Commitment index holding the pooled answer for 1-based istar."""
        if istar <= self.inst.n_questions:
            return self.answer_idx[istar - 1]
        return self.oracle_idx[istar - self.inst.n_questions - 1]


def _done(value):
    """Generator returning immediately; lets strategy methods that need no
    interaction flow through `yield from`."""
    return value
    yield  # pragma: no cover


# ---------------------------------------------------------------------------
# prover strategies


class HonestZkProver:
    """P1's brain: true values, true openings, honest sumcheck."""

    def __init__(self, inst, spec, schedule: ZkSchedule, table, R: int, rep: int):
        self.inst = inst
        self.spec = spec
        self.schedule = schedule
        self.table = table
        self.gamma = draw_gamma(spec, R, rep, inst.s)
        self.committer: ProverCommitter | None = None
        self._wtape = w_tape(R, rep)
        self.F = OracleSumcheckPoly(inst, spec, table)
        self.sumcheck = HonestSumcheckProver(self.F, inst.m, list(schedule.degree_bounds))
        self.rng = random.Random(ByteTape(R, f"zk-p1-priv-{rep}").randint_below(1 << 62))
        self.cs: list[int] = []

    def set_keys(self, z1: int) -> None:
        self.committer = ProverCommitter(self.spec, z1, self._wtape)

    def commit(self, value: int | None) -> int:
        idx, c = self.committer.commit(value)
        self.cs.append(c)
        return c

    def gamma_values(self) -> list[int | None]:
        return list(self.gamma)

    def triple_values(self) -> list[tuple[int | None, int | None, int | None]]:
        out = []
        for _ in range(self.schedule.n_triples):
            a = self.rng.randrange(self.spec.order)
            b = self.rng.randrange(self.spec.order)
            out.append((a, b, self.spec.mul(a, b)))
        return out

    def round_coeffs(self, i: int) -> list[int | None]:
        g = self.sumcheck.round_poly()
        coeffs = list(g.coeffs)
        coeffs += [0] * (self.schedule.degree_bounds[i] + 1 - len(coeffs))
        return coeffs

    def receive_challenge(self, r: int) -> None:
        self.sumcheck.receive_challenge(r)

    def oracle_answer_values(self) -> list[int | None]:
        return [
            self.F.oracle_at([self.sumcheck.prefix[v] for v in self.inst.block_vars(j)])
            for j in (1, 2, 3)
        ]

    def answer_value(self, q: Sequence[int]) -> int | None:
        return self.F.oracle_at(list(q))

    def omega_value(self, q: Sequence[int], pool_value: int | None) -> int:
        return self.spec.add(pool_value, su2_hash(self.spec, self.gamma, q))

    def unveil(self, combo: Combo, kind: str, target: int | None = None):
        claimed = self.committer.value(combo)
        w1, w2 = self.committer.opening(combo)
        return _done((claimed, w1, w2))

    def audit_unveil(self, triple: MulTriple):
        parts = []
        for idx in (triple.ia, triple.ib, triple.ic):
            v, w1, w2 = self.committer.openings[idx]
            parts += [v, w1, w2]
        return _done(tuple(parts))


class CheatingZkProver(HonestZkProver):
    """Canonical cheats for unsatisfiable instances.

    `cheat`: best-constant oracle plus the root-hunting sumcheck liar;
    `random-answers`: additionally answers the multilinearity questions at
    random.  A zero-proof whose true value is nonzero is unveiled with a
    forged opening (w1 = c_combo, guessed w2): V1's c-side check passes,
    the verdict machine's cross-check catches it with prob 1 - 1/|F|.
    """

    def __init__(self, inst, spec, schedule, table, R, rep, kind: str):
        super().__init__(inst, spec, schedule, table, R, rep)
        self.kind = kind
        self.sumcheck = CheatingSumcheckProver(
            self.F,
            inst.m,
            list(schedule.degree_bounds),
            schedule.i_size,
            random.Random(ByteTape(R, f"zk-p1-cheat-{rep}").randint_below(1 << 62)),
        )

    def answer_value(self, q: Sequence[int]) -> int | None:
        if self.kind == "random-answers":
            return self.rng.randrange(self.spec.order)
        return super().answer_value(q)

    def omega_value(self, q: Sequence[int], pool_value: int | None) -> int:
        # stay consistent with whatever was committed at the pool slot
        return self.spec.add(pool_value, su2_hash(self.spec, self.gamma, q))

    def unveil(self, combo: Combo, kind: str, target: int | None = None):
        claimed = self.committer.value(combo)
        if target is not None and claimed != target:
            c_combo = self._c_combo(combo)
            w1 = self.spec.sub(c_combo, self.spec.mul(target, self.committer.z1))
            w2 = self.rng.randrange(self.spec.order)
            return _done((target, w1, w2))
        return super().unveil(combo, kind, target)

    def _c_combo(self, combo: Combo) -> int:
        acc = self.spec.mul(combo.const, self.committer.z1)
        for i, a in combo.bases.items():
            acc = self.spec.add(acc, self.spec.mul(a, self.cs[i]))
        return acc


def resolve_zk_table(inst, prover_kind, table):
    if table is not None:
        return tuple(table)
    if prover_kind == "honest":
        found = brute_force_oracle(inst)
        if found is None:
            raise ValueError("honest prover needs a satisfiable instance")
        return found
    return best_constant_table(inst)


def honest_strategy_factory(inst, spec, schedule, prover_kind, table, R):
    def factory(rep: int):
        if prover_kind == "honest":
            return HonestZkProver(inst, spec, schedule, table, R, rep)
        return CheatingZkProver(inst, spec, schedule, table, R, rep, prover_kind)

    return factory


# ---------------------------------------------------------------------------
# P1 program (shared by honest provers, cheats, and the simulator M1)


def prover1_zk(inst, spec, schedule: ZkSchedule, strategy_factory, reps: int):
    """The message skeleton of P1; every value comes from the strategy."""

    def program(ctx: Context) -> Iterator[Any]:
        for rep in range(reps):
            strat = strategy_factory(rep)
            msg = yield Recv(verifier(1))
            strat.set_keys(msg[1])

            gcs = [strat.commit(v) for v in strat.gamma_values()]
            yield Send(verifier(1), ("gamma", tuple(gcs)))

            tcs = []
            for a, b, g in strat.triple_values():
                tcs += [strat.commit(a), strat.commit(b), strat.commit(g)]
            yield Send(verifier(1), ("triples", tuple(tcs)))
            triples = schedule.triples()

            msg = yield Recv(verifier(1))
            which = msg[1]
            opens = []
            for t in which:
                opens.append((yield from strat.audit_unveil(triples[t])))
            yield Send(verifier(1), ("audit-open", tuple(opens)))
            survivors = [t for i, t in enumerate(triples) if i not in set(which)]

            # committed sumcheck
            prev_s: Combo | None = None
            challenges: list[int] = []
            for i in range(inst.m):
                ccs = [strat.commit(v) for v in strat.round_coeffs(i)]
                yield Send(verifier(1), ("coefs", i, tuple(ccs)))
                rc = schedule.rc_combo(i, prev_s)
                opening = yield from strat.unveil(rc, "rc", 0)
                yield Send(verifier(1), ("rc-open", i, tuple(opening[1:])))
                msg = yield Recv(verifier(1))
                r_i = msg[2]
                challenges.append(r_i)
                strat.receive_challenge(r_i)
                prev_s = schedule.s_combo(i, r_i)

            oracle_values = strat.oracle_answer_values()
            ocs = [strat.commit(v) for v in oracle_values]
            yield Send(verifier(1), ("oracle", tuple(ocs)))

            # committed evaluation of the final value
            terms = schedule.final_terms(challenges)
            queue = list(survivors)
            mul_count = 0

            def mul(cx: Combo, cy: Combo):
                nonlocal mul_count
                triple = queue.pop(0)
                dcombo = cx.sub(Combo.base(spec, triple.ia))
                ecombo = cy.sub(Combo.base(spec, triple.ib))
                delta = yield from strat.unveil(dcombo, "mul-delta")
                eps = yield from strat.unveil(ecombo, "mul-eps")
                m_msg = (delta[0], delta[1], delta[2], eps[0], eps[1], eps[2])
                yield Send(verifier(1), ("mul", mul_count, m_msg))
                mul_count += 1
                return mul_result_combo(spec, triple, delta[0], eps[0])

            f_val = Combo(spec)
            for term in terms:
                pub = term.coeff
                combos = []
                for f in term.factors:
                    if f[0] == "pub":
                        pub = spec.mul(pub, f[1])
                    else:
                        combos.append(f[1])
                if pub == 0:
                    continue
                if not combos:
                    f_val = f_val.add(Combo.public(spec, pub))
                    continue
                acc = combos[0]
                for nxt in combos[1:]:
                    acc = yield from mul(acc, nxt)
                f_val = f_val.add(acc.scale(pub))
            sq = yield from mul(f_val, f_val)
            final_combo = sq.sub(prev_s)
            opening = yield from strat.unveil(final_combo, "final", 0)
            yield Send(verifier(1), ("final-zero", tuple(opening[1:])))

            # committed multilinearity
            questions: list[tuple[int, ...]] = []
            pool_vals: dict[int, int | None] = {}
            for j in range(inst.n_questions):
                msg = yield Recv(verifier(1))
                q = tuple(msg[2])
                questions.append(q)
                val = strat.answer_value(q)
                pool_vals[schedule.answer_idx[j]] = val
                yield Send(verifier(1), ("ans", j + 1, strat.commit(val)))
            for j, v in zip(schedule.oracle_idx, oracle_values):
                pool_vals[j] = v
            for li in range(schedule.n_lines()):
                combo = schedule.line_zero_combo(li, questions)
                opening = yield from strat.unveil(combo, "line", 0)
                yield Send(verifier(1), ("line-zero", li, tuple(opening[1:])))

            # consistency test: V1 sends only the index; P1 answers from its
            # own record of the question asked at that slot
            msg = yield Recv(verifier(1))
            istar = msg[1]
            if istar <= inst.n_questions:
                q_istar = questions[istar - 1]
            else:
                j = istar - inst.n_questions  # 1..3
                q_istar = tuple(challenges[v] for v in inst.block_vars(j))
            pool_idx = schedule.pool_index(istar)
            omega = strat.omega_value(q_istar, pool_vals[pool_idx])
            yield Send(verifier(1), ("omega-c", strat.commit(omega)))
            omega_combo = Combo.base(spec, schedule.omega_idx)
            opening = yield from strat.unveil(omega_combo, "omega-value", omega)
            yield Send(verifier(1), ("omega-open", tuple(opening)))
            proof = schedule.omega_proof_combo(pool_idx, q_istar)
            opening = yield from strat.unveil(proof, "omega-proof", 0)
            yield Send(verifier(1), ("omega-zero", tuple(opening[1:])))

    return program


# ---------------------------------------------------------------------------
# P2 program (honest / cheat; the simulator M2 has its own responder)


def prover2_zk(inst, spec, schedule: ZkSchedule, responder_factory, reps: int):
    """P2's skeleton: receive z2, stream cross-shares, answer Omega_2."""

    def program(ctx: Context) -> Iterator[Any]:
        for rep in range(reps):
            responder = responder_factory(rep)
            msg = yield Recv(verifier(2))
            z2 = msg[1]
            ds = yield from responder.cross_shares(z2)
            yield Send(verifier(2), ("crosses", tuple(ds)))
            msg = yield Recv(verifier(2))
            q = tuple(msg[1])
            omega2 = responder.omega2(q)
            yield Send(verifier(2), ("omega2", omega2))

    return program


class HonestP2Responder:
    def __init__(self, inst, spec, schedule, table, kind: str, R: int, rep: int):
        self.inst = inst
        self.spec = spec
        self.schedule = schedule
        self.table = table
        self.kind = kind
        self.gamma = draw_gamma(spec, R, rep, inst.s)
        self._wtape = w_tape(R, rep)
        self.rng = random.Random(ByteTape(R, f"zk-p2-priv-{rep}").randint_below(1 << 62))

    def cross_shares(self, z2: int):
        from .committed_eval import cross_shares

        return _done(cross_shares(self.spec, self._wtape, z2, self.schedule.total))

    def omega2(self, q: Sequence[int]) -> int:
        from .fields import mle_eval_raw

        if self.kind == "random-answers":
            a = self.rng.randrange(self.spec.order)
        else:
            a = mle_eval_raw(self.spec, list(self.table), list(q))
        return self.spec.add(a, su2_hash(self.spec, self.gamma, q))


def honest_responder_factory(inst, spec, schedule, prover_kind, table, R):
    def factory(rep: int):
        return HonestP2Responder(inst, spec, schedule, table, prover_kind, R, rep)

    return factory


# ---------------------------------------------------------------------------
# verifier programs


def verifier1_zk(inst, spec, schedule: ZkSchedule, S: int, reps: int, behavior: str = "honest"):
    """V1: drives the committed protocol; `early-abort` stops after the
    audit, `biased-challenge` replaces every challenge with 0."""

    def program(ctx: Context) -> Iterator[Any]:
        for rep in range(reps):
            bundle = precompute(inst, spec, S, rep)
            z1 = bundle.z1
            ledger = VerifierLedger(spec, z1)
            flags = {
                "commit": True, "audit": True, "sumcheck": True,
                "evaluation": True, "multilinearity": True, "consistency": True,
            }

            yield Send(prover(1), ("keys", z1))
            msg = yield Recv(prover(1))
            gcs = msg[1]
            flags["commit"] &= len(gcs) == inst.s + 1
            for c in gcs:
                ledger.receive_commit(c)

            msg = yield Recv(prover(1))
            tcs = msg[1]
            flags["commit"] &= len(tcs) == 3 * schedule.n_triples
            for c in tcs:
                ledger.receive_commit(c)
            triples = schedule.triples()
            coins = ByteTape(S, f"zk-audit-{rep}")
            which = audit_selection(coins, schedule.n_triples, schedule.n_audit)
            yield Send(prover(1), ("audit", tuple(which)))
            msg = yield Recv(prover(1))
            for t, op in zip(which, msg[1]):
                trip = triples[t]
                a, aw1, aw2, b, bw1, bw2, g, gw1, gw2 = op
                flags["audit"] &= ledger.check_unveil(Combo.base(spec, trip.ia), a, aw1, aw2)
                flags["audit"] &= ledger.check_unveil(Combo.base(spec, trip.ib), b, bw1, bw2)
                flags["audit"] &= ledger.check_unveil(Combo.base(spec, trip.ic), g, gw1, gw2)
                flags["audit"] &= spec.mul(a, b) == g
            survivors = [t for i, t in enumerate(triples) if i not in set(which)]

            if behavior == "early-abort":
                flags["sumcheck"] = flags["evaluation"] = False
                flags["multilinearity"] = flags["consistency"] = False
                yield Send(
                    V0,
                    ("v1", rep, False, _pack_flags(flags), None, z1,
                     tuple(ledger.cs), _pack_records(ledger)),
                )
                return

            prev_s: Combo | None = None
            challenges: list[int] = []
            for i in range(inst.m):
                msg = yield Recv(prover(1))
                ccs = msg[2]
                flags["sumcheck"] &= len(ccs) == schedule.degree_bounds[i] + 1
                for c in ccs:
                    ledger.receive_commit(c)
                msg = yield Recv(prover(1))
                w1, w2 = msg[2]
                flags["sumcheck"] &= ledger.check_unveil(schedule.rc_combo(i, prev_s), 0, w1, w2)
                if behavior == "biased-challenge":
                    r_i = 0
                else:
                    r_i = bundle.questions.challenges[i]
                challenges.append(r_i)
                yield Send(prover(1), ("challenge", i, r_i))
                prev_s = schedule.s_combo(i, r_i)

            msg = yield Recv(prover(1))
            flags["sumcheck"] &= len(msg[1]) == 3
            for c in msg[1]:
                ledger.receive_commit(c)

            mul_msgs = []
            for _ in range(schedule.n_mul):
                msg = yield Recv(prover(1))
                mul_msgs.append(msg[2])
            terms = schedule.final_terms(challenges)
            queue = list(survivors)
            pos = 0

            def mul(cx: Combo, cy: Combo) -> Combo:
                nonlocal pos
                triple = queue.pop(0)
                delta, dw1, dw2, eps, ew1, ew2 = mul_msgs[pos]
                pos += 1
                flags["evaluation"] &= ledger.check_unveil(
                    cx.sub(Combo.base(spec, triple.ia)), delta, dw1, dw2
                )
                flags["evaluation"] &= ledger.check_unveil(
                    cy.sub(Combo.base(spec, triple.ib)), eps, ew1, ew2
                )
                return mul_result_combo(spec, triple, delta, eps)

            f_val = Combo(spec)
            for term in terms:
                pub = term.coeff
                combos = []
                for f in term.factors:
                    if f[0] == "pub":
                        pub = spec.mul(pub, f[1])
                    else:
                        combos.append(f[1])
                if pub == 0:
                    continue
                if not combos:
                    f_val = f_val.add(Combo.public(spec, pub))
                    continue
                acc = combos[0]
                for nxt in combos[1:]:
                    acc = mul(acc, nxt)
                f_val = f_val.add(acc.scale(pub))
            sq = mul(f_val, f_val)
            msg = yield Recv(prover(1))
            w1, w2 = msg[1]
            flags["evaluation"] &= ledger.check_unveil(sq.sub(prev_s), 0, w1, w2)

            # committed multilinearity
            questions = bundle.questions.plan.questions()
            for j, q in enumerate(questions, start=1):
                yield Send(prover(1), ("q", j, tuple(q)))
                msg = yield Recv(prover(1))
                ledger.receive_commit(msg[2])
            for li in range(schedule.n_lines()):
                msg = yield Recv(prover(1))
                w1, w2 = msg[2]
                flags["multilinearity"] &= ledger.check_unveil(
                    schedule.line_zero_combo(li, questions), 0, w1, w2
                )

            # consistency test
            istar = bundle.istar
            yield Send(prover(1), ("index", istar))
            msg = yield Recv(prover(1))
            ledger.receive_commit(msg[1])
            msg = yield Recv(prover(1))
            omega1, w1, w2 = msg[1]
            flags["consistency"] &= ledger.check_unveil(
                Combo.base(spec, schedule.omega_idx), omega1, w1, w2
            )
            if istar <= inst.n_questions:
                q_istar = tuple(questions[istar - 1])
            else:
                j = istar - inst.n_questions
                q_istar = tuple(challenges[v] for v in inst.block_vars(j))
            msg = yield Recv(prover(1))
            w1, w2 = msg[1]
            proof = schedule.omega_proof_combo(schedule.pool_index(istar), q_istar)
            flags["consistency"] &= ledger.check_unveil(proof, 0, w1, w2)

            yield Send(
                V0,
                ("v1", rep, all(flags.values()), _pack_flags(flags), omega1, z1,
                 tuple(ledger.cs), _pack_records(ledger)),
            )

    return program


def verifier2_zk(inst, spec, schedule: ZkSchedule, S: int, reps: int, behavior: str = "honest"):
    """V2: hands out z2, collects cross-shares, asks the cross-check
    question.  `substitute-question` asks a different question than the
    pre-agreed one - the attack the hash-based consistency test defeats."""

    def program(ctx: Context) -> Iterator[Any]:
        for rep in range(reps):
            bundle = precompute(inst, spec, S, rep)
            yield Send(prover(2), ("keys", bundle.z2))
            msg = yield Recv(prover(2))
            ds = tuple(msg[1])
            q = bundle.questions.question(inst, bundle.istar)
            if behavior == "substitute-question":
                q = tuple(spec.add(x, 1) for x in q)
            yield Send(prover(2), ("q", tuple(q)))
            msg = yield Recv(prover(2))
            yield Send(V0, ("v2", rep, bundle.z2, ds, msg[1]))

    return program


def _pack_flags(flags: dict[str, bool]) -> tuple:
    return tuple(sorted((k, bool(v)) for k, v in flags.items()))


def _pack_records(ledger: VerifierLedger) -> tuple:
    return tuple(
        (rec.combo_key[0], rec.combo_key[1], rec.claimed, rec.w1, rec.w2)
        for rec in ledger.records
    )


def zk_verdict_rule(spec: FieldSpec, schedule: ZkSchedule, reps: int):
    """V0: every unveiling must verify against both keys, the Omegas must
    match, and V1 must not have flagged a failure."""

    def rule(tapes: dict[int, list[Any]]) -> str:
        t1 = {e[1]: e for e in tapes.get(1, []) if e[0] == "v1"}
        t2 = {e[1]: e for e in tapes.get(2, []) if e[0] == "v2"}
        for rep in range(reps):
            if rep not in t1 or rep not in t2:
                return "reject"
            _, _, ok, _flags, omega1, z1, cs, packed = t1[rep]
            _, _, z2, ds, omega2 = t2[rep]
            if not ok or omega1 is None or omega1 != omega2:
                return "reject"
            if len(ds) < len(cs):
                return "reject"
            records = [
                UnveilRecord((tuple(bases), const), claimed, w1, w2)
                for bases, const, claimed, w1, w2 in packed
            ]
            if not verify_openings_for_v0(spec, z1, z2, cs, ds, records):
                return "reject"
        return "accept"

    return rule


def zk_report(transcript) -> dict:
    """Per-phase pass/fail flags and commitment counts from a run."""
    phases: dict[str, dict] = {}
    counts: dict[str, int] = {}
    for e in transcript.tapes.get(1, []):
        if e[0] != "v1":
            continue
        rep = e[1]
        phases[f"rep{rep}"] = dict(e[3])
        counts[f"rep{rep}"] = len(e[6])
    return {"verdict": transcript.verdict, "phases": phases, "commitments": counts}


def run_zk_lemip(
    inst: Oracle3SatInstance,
    seed: int,
    params: ZkParams = ZkParams(),
    prover_kind: str = "honest",
    v1_behavior: str = "honest",
    v2_behavior: str = "honest",
    table: Sequence[int] | None = None,
) -> tuple[str, Any]:
    """One full execution on the local topology; returns (verdict, transcript)."""
    spec = params.field()
    S, R = zk_seeds(seed)
    schedule = ZkSchedule(inst, spec, params.sigma)
    table = resolve_zk_table(inst, prover_kind, table)
    topo = build_topology(2, S=S, R=R)
    transcript = run_protocol(
        topo,
        {
            verifier(1): verifier1_zk(inst, spec, schedule, S, params.reps, v1_behavior),
            verifier(2): verifier2_zk(inst, spec, schedule, S, params.reps, v2_behavior),
            prover(1): prover1_zk(
                inst,
                spec,
                schedule,
                honest_strategy_factory(inst, spec, schedule, prover_kind, table, R),
                params.reps,
            ),
            prover(2): prover2_zk(
                inst,
                spec,
                schedule,
                honest_responder_factory(inst, spec, schedule, prover_kind, table, R),
                params.reps,
            ),
        },
        verdict_rule=zk_verdict_rule(spec, schedule, params.reps),
    )
    return transcript.verdict, transcript


def consistency_test(
    spec: FieldSpec,
    gamma: Sequence[int],
    table: Sequence[int],
    q1: Sequence[int],
    q2: Sequence[int],
) -> tuple[int, int]:
    """Direct (library-level) consistency pair: what P1 unveils and what P2
    answers when asked q1 and q2 respectively."""
    from .fields import mle_eval_raw

    omega1 = spec.add(
        mle_eval_raw(spec, list(table), list(q1)), su2_hash(spec, gamma, q1)
    )
    omega2 = spec.add(
        mle_eval_raw(spec, list(table), list(q2)), su2_hash(spec, gamma, q2)
    )
    return omega1, omega2
