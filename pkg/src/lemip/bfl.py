"""Oracle-3-SAT instances and the sumcheck-based two-prover protocol, in
plaintext (non zero-knowledge) form.

An instance (B, r, s) is a 3-CNF over r+3s+3 variables partitioned into a
z-block, three oracle-argument blocks b1..b3 of length s, and three
oracle-value variables t1..t3.  It is a yes-instance when some oracle
A : {0,1}^s -> {0,1} satisfies B(z, b, A(b1), A(b2), A(b3)) everywhere.

The protocol sums the squared arithmetization over the Boolean cube of
the r+3s real variables, with the t-variables replaced by the multilinear
extension of A, and checks the sum is zero: a sumcheck against prover 1,
a multilinearity test of prover 1's oracle answers, and one cross-check
of a uniformly chosen question against prover 2.

Everything the verifier side asks is derived non-adaptively from the
shared verifier string, which is what lets the single-verifier protocol
be rewritten with one isolated verifier per prover plus a read-only
verdict machine, with identical verdicts under paired randomness.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Iterator, Sequence

from .boxes import bulletin_correlator
from .fields import (
    ArithPoly,
    Cnf3,
    FieldSpec,
    UnivariatePoly,
    arithmetize,
    boolean_cube,
    lagrange_interpolate,
    mle_eval_raw,
)
from .runtime import (
    V0,
    VHAT,
    ByteTape,
    Recv,
    Send,
    build_topology,
    prover,
    run_protocol,
    verifier,
)


class InstanceError(ValueError):
    pass


@dataclass(frozen=True)
class Oracle3SatInstance:
    """(B, r, s) with the standard variable partition.

    Variables 1..r are z, r+1..r+3s the three oracle-argument blocks,
    r+3s+1..r+3s+3 the oracle-value variables t1..t3.
    """

    B: Cnf3
    r: int
    s: int

    def __post_init__(self):
        if self.r < 0 or self.s < 1:
            raise InstanceError("need r >= 0 and s >= 1")
        if self.B.m != self.r + 3 * self.s + 3:
            raise InstanceError(
                f"B has {self.B.m} variables, expected {self.r + 3 * self.s + 3}"
            )

    @property
    def m(self) -> int:
        """Sumcheck variable count: |z| + 3s."""
        return self.r + 3 * self.s

    @property
    def n_questions(self) -> int:
        """Multilinearity question count; the pool adds the 3 oracle points."""
        return self.r + 3 * self.s + 3

    def block_vars(self, j: int) -> range:
        """0-based sumcheck-variable indices of oracle-argument block j (1..3)."""
        start = self.r + (j - 1) * self.s
        return range(start, start + self.s)

    def t_var(self, j: int) -> int:
        """1-based CNF variable index of t_j."""
        return self.r + 3 * self.s + j

    def to_json(self) -> str:
        return json.dumps(
            {"r": self.r, "s": self.s, "clauses": [list(c) for c in self.B.clauses]},
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "Oracle3SatInstance":
        try:
            raw = json.loads(text)
            r, s = int(raw["r"]), int(raw["s"])
            clauses = raw["clauses"]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"bad instance file: {exc}") from exc
        return cls(Cnf3(r + 3 * s + 3, clauses), r, s)


def brute_force_oracle(inst: Oracle3SatInstance) -> tuple[int, ...] | None:
    """Exhaustive search for a 3-satisfying oracle; the independent
    reference for everything else in this module.

    Enumerates all 2^(2^s) oracle tables and all 2^(r+3s) assignments;
    guarded to desk scale (2^s <= 16, r <= 4).  Table index convention:
    A(b) = table[sum(b_j << j)], LSB first.
    """
    if (1 << inst.s) > 16 or inst.r > 4:
        raise InstanceError("brute force guarded to 2^s <= 16 and r <= 4")
    n_args = 1 << inst.s
    assignments = list(boolean_cube(inst.m))
    for table_bits in range(1 << n_args):
        table = tuple((table_bits >> i) & 1 for i in range(n_args))
        good = True
        for assign in assignments:
            full = list(assign) + [0, 0, 0]
            for j in (1, 2, 3):
                arg = 0
                for pos, var in enumerate(inst.block_vars(j)):
                    arg |= assign[var] << pos
                full[inst.t_var(j) - 1] = table[arg]
            if inst.B.eval(full) != 1:
                good = False
                break
        if good:
            return table
    return None


class OracleSumcheckPoly:
    """F(x_1..x_m) = arithmetization of B with t_j replaced by the
    multilinear extension of the oracle table on block j."""

    def __init__(self, inst: Oracle3SatInstance, spec: FieldSpec, table: Sequence[int]):
        self.inst = inst
        self.spec = spec
        self.table = list(table)
        self.arith = arithmetize(inst.B)
        self.m = inst.m

    def oracle_at(self, point: Sequence[int]) -> int:
        return mle_eval_raw(self.spec, self.table, point)

    def eval(self, point: Sequence[int]) -> int:
        full = list(point) + [0, 0, 0]
        for j in (1, 2, 3):
            coords = [point[v] for v in self.inst.block_vars(j)]
            full[self.inst.t_var(j) - 1] = self.oracle_at(coords)
        return self.arith.eval(self.spec, full)

    def var_degree(self, i: int) -> int:
        """Degree of F in sumcheck variable i (0-based): direct literal
        occurrences plus one per t-literal whose block contains i."""
        var_1b = i + 1
        in_block = [j for j in (1, 2, 3) if i in self.inst.block_vars(j)]
        best = 0
        for clause in self.inst.B.clauses:
            deg = sum(1 for lit in clause if abs(lit) == var_1b)
            for j in in_block:
                deg += sum(1 for lit in clause if abs(lit) == self.inst.t_var(j))
            best = max(best, deg)
        return best


@dataclass
class SumcheckState:
    """Running values s_0..s_m, challenges drawn from I, degree bounds."""

    i_size: int
    degree_bounds: list[int]
    running: list[int] = field(default_factory=lambda: [0])  # s_0 = 0
    challenges: list[int] = field(default_factory=list)
    reject_round: int | None = None


def round_degree_bounds(var_degree: Callable[[int], int], m: int) -> list[int]:
    """Univariate degree bound per round for the squared polynomial."""
    return [2 * var_degree(i) for i in range(m)]


def choose_i_size(degree_bounds: Sequence[int], m: int, order: int) -> int:
    """|I| >= 2dm with d the max round degree (and at least 2)."""
    d = max(degree_bounds, default=0)
    size = max(2 * d * m, 2)
    if size > order:
        raise InstanceError(f"field of order {order} too small for |I|={size}")
    return size


class HonestSumcheckProver:
    """Computes each round polynomial by exhaustive partial sums."""

    def __init__(self, F, m: int, degree_bounds: Sequence[int]):
        self.F = F
        self.m = m
        self.degree_bounds = degree_bounds
        self.prefix: list[int] = []

    def round_poly(self) -> UnivariatePoly:
        spec = self.F.spec
        i = len(self.prefix)
        d = self.degree_bounds[i]
        pts = []
        for x in range(d + 1):
            total = 0
            for suffix in product((0, 1), repeat=self.m - i - 1):
                v = self.F.eval(self.prefix + [x] + list(suffix))
                total = spec.add(total, spec.mul(v, v))
            pts.append((x, total))
        return lagrange_interpolate(spec, pts)

    def receive_challenge(self, r: int) -> None:
        self.prefix.append(r)


class CheatingSumcheckProver(HonestSumcheckProver):
    """Claims a zero sum that is false and hunts for a lucky challenge.

    Keeps a running debt (claimed minus true partial value).  Each round
    it sends the honest polynomial plus a correction with as many roots
    in I as the degree bound allows; a challenge landing on a root clears
    the debt and the prover turns honest.  Catch probability is at least
    1 - d*m/|I| by Schwartz-Zippel.
    """

    def __init__(self, F, m, degree_bounds, i_size: int, rng: random.Random):
        super().__init__(F, m, degree_bounds)
        self.i_size = i_size
        self.rng = rng
        self.debt: int | None = None  # None until the first round is built
        self.last_sent: UnivariatePoly | None = None
        self._last_honest: UnivariatePoly | None = None

    def round_poly(self) -> UnivariatePoly:
        spec = self.F.spec
        honest = super().round_poly()
        self._last_honest = honest
        i = len(self.prefix)
        if self.debt is None:
            # claimed s_0 = 0; the true opening sum is honest(0)+honest(1)
            self.debt = spec.neg(spec.add(honest.eval(0), honest.eval(1)))
        if self.debt == 0:
            self.last_sent = honest
            return honest
        d = self.degree_bounds[i]
        correction = self._correction(spec, d)
        if correction is None:
            if spec.kind == "prime" and spec.modulus != 2:
                correction = UnivariatePoly(spec, [spec.mul(self.debt, spec.inv(2))])
            else:
                correction = UnivariatePoly(spec, [])
        sent = honest + correction
        self.last_sent = sent
        return sent

    def _correction(self, spec: FieldSpec, d: int) -> UnivariatePoly | None:
        """debt-fixing polynomial with d roots inside I (if one exists)."""
        if d < 1:
            return None
        for _ in range(20):
            roots = self.rng.sample(range(min(self.i_size, spec.order)), min(d, self.i_size))
            w = UnivariatePoly(spec, [1])
            for a in roots:
                shifted = UnivariatePoly(spec, [0] + list(w.coeffs))
                scaled = w.scale(spec.neg(a))
                w = shifted + scaled
            denom = spec.add(w.eval(0), w.eval(1))
            if denom != 0:
                return w.scale(spec.mul(self.debt, spec.inv(denom)))
        return None

    def receive_challenge(self, r: int) -> None:
        spec = self.F.spec
        if self.debt is not None and self.last_sent is not None and self._last_honest is not None:
            self.debt = spec.sub(self.last_sent.eval(r), self._last_honest.eval(r))
        super().receive_challenge(r)


def run_sumcheck(
    f: ArithPoly,
    spec: FieldSpec,
    seed: int = 0,
    prover_kind: str = "honest",
    i_size: int | None = None,
    challenges: Sequence[int] | None = None,
) -> tuple[str, SumcheckState]:
    """Standalone sumcheck for the claim: sum over the cube of f^2 is 0.

    The verifier evaluates f itself at the end (no oracle involved).
    `challenges` overrides the drawn randomness, for exhaustive tests.
    """
    m = f.phi.m

    class _Plain:
        spec = None

        def eval(self, pt):
            return f.eval(spec, pt)

    F = _Plain()
    F.spec = spec
    bounds = round_degree_bounds(lambda i: f.var_degree(i + 1), m)
    i_size = i_size or choose_i_size(bounds, m, spec.order)
    tape = ByteTape(seed, "sumcheck-verifier")
    if prover_kind == "honest":
        p: HonestSumcheckProver = HonestSumcheckProver(F, m, bounds)
    elif prover_kind == "cheat":
        p = CheatingSumcheckProver(F, m, bounds, i_size, random.Random(seed ^ 0xC0FFEE))
    else:
        raise ValueError(f"unknown prover kind {prover_kind!r}")

    state = SumcheckState(i_size, list(bounds))
    for i in range(m):
        g = p.round_poly()
        if g.degree > bounds[i]:
            state.reject_round = i
            return "reject", state
        if spec.add(g.eval(0), g.eval(1)) != state.running[-1]:
            state.reject_round = i
            return "reject", state
        r_i = challenges[i] if challenges is not None else tape.randint_below(i_size)
        state.challenges.append(r_i)
        state.running.append(g.eval(r_i))
        p.receive_challenge(r_i)
    final = F.eval(state.challenges)
    if spec.mul(final, final) != state.running[-1]:
        state.reject_round = m
        return "reject", state
    return "accept", state


# ---------------------------------------------------------------------------
# multilinearity test


@dataclass(frozen=True)
class LineTest:
    base: tuple[int, ...]
    axis: int
    coords: tuple[int, int, int]

    def points(self) -> list[tuple[int, ...]]:
        pts = []
        for c in self.coords:
            p = list(self.base)
            p[self.axis] = c
            pts.append(tuple(p))
        return pts


@dataclass(frozen=True)
class QueryPlan:
    """floor(n/3) axis-parallel line tests plus random extra points;
    flattening gives the questions Q_1..Q_n in I^s."""

    lines: tuple[LineTest, ...]
    extras: tuple[tuple[int, ...], ...]

    def questions(self) -> list[tuple[int, ...]]:
        qs: list[tuple[int, ...]] = []
        for line in self.lines:
            qs.extend(line.points())
        qs.extend(self.extras)
        return qs


def build_query_plan(s: int, n_questions: int, i_size: int, tape: ByteTape) -> QueryPlan:
    lines = []
    for _ in range(n_questions // 3):
        base = tuple(tape.randint_below(i_size) for _ in range(s))
        axis = tape.randint_below(s)
        coords = tuple(tape.sample(range(i_size), 3))
        lines.append(LineTest(base, axis, coords))
    extras = tuple(
        tuple(tape.randint_below(i_size) for _ in range(s))
        for _ in range(n_questions % 3)
    )
    return QueryPlan(tuple(lines), extras)


def multilinearity_test(spec: FieldSpec, plan: QueryPlan, answers: Sequence[int]) -> bool:
    """Degree-1 collinearity on every tested line: the third answer must
    match the two-point interpolation of the first two."""
    pos = 0
    for line in plan.lines:
        y = answers[pos : pos + 3]
        pos += 3
        c1, c2, c3 = line.coords
        lam1 = spec.mul(spec.sub(c3, c2), spec.inv(spec.sub(c1, c2)))
        lam2 = spec.mul(spec.sub(c3, c1), spec.inv(spec.sub(c2, c1)))
        if spec.add(spec.mul(lam1, y[0]), spec.mul(lam2, y[1])) != y[2]:
            return False
    return True


# ---------------------------------------------------------------------------
# the verifier program Lambda: randomness -> questions


@dataclass(frozen=True)
class QuestionBundle:
    challenges: tuple[int, ...]
    plan: QueryPlan
    istar: int  # 1-based index into the n_questions + 3 pool
    i_size: int
    degree_bounds: tuple[int, ...]

    def oracle_points(self, inst: Oracle3SatInstance) -> list[tuple[int, ...]]:
        return [
            tuple(self.challenges[v] for v in inst.block_vars(j)) for j in (1, 2, 3)
        ]

    def question(self, inst: Oracle3SatInstance, idx: int) -> tuple[int, ...]:
        """idx is 1-based over the pool Q_1..Q_{n+3}."""
        qs = self.plan.questions() + self.oracle_points(inst)
        return qs[idx - 1]


class VerifierProgram:
    """The deterministic question-generation circuit: randomness in,
    questions out.  Identical randomness gives identical questions; this
    non-adaptivity is what the localized rewrite rests on."""

    def __init__(self, inst: Oracle3SatInstance, spec: FieldSpec):
        self.inst = inst
        self.spec = spec
        probe = OracleSumcheckPoly(inst, spec, [0] * (1 << inst.s))
        self.degree_bounds = tuple(round_degree_bounds(probe.var_degree, inst.m))
        self.i_size = choose_i_size(self.degree_bounds, inst.m, spec.order)

    def run(self, tape: ByteTape) -> QuestionBundle:
        challenges = tuple(tape.randint_below(self.i_size) for _ in range(self.inst.m))
        plan = build_query_plan(self.inst.s, self.inst.n_questions, self.i_size, tape)
        istar = 1 + tape.randint_below(self.inst.n_questions + 3)
        return QuestionBundle(challenges, plan, istar, self.i_size, self.degree_bounds)


def bundle_tape(S: int, rep: int) -> ByteTape:
    """The substream of the shared verifier string one repetition reads."""
    return ByteTape(S, f"bundle-{rep}")


def prover_rand(R: int, label: str, rep: int) -> random.Random:
    """Prover-side private randomness as a substream of the shared R."""
    return random.Random(ByteTape(R, f"{label}-{rep}").randint_below(1 << 62))


def seeds_for(seed: int) -> tuple[int, int]:
    """(S, R) for one trial."""
    return seed, seed ^ 0x5B5B5B5B


# ---------------------------------------------------------------------------
# prover strategies


def best_constant_table(inst: Oracle3SatInstance) -> tuple[int, ...]:
    """The canonical cheat oracle: the constant table violating fewest
    assignments."""
    best, best_viol = None, None
    for const in (0, 1):
        viol = 0
        for assign in boolean_cube(inst.m):
            full = list(assign) + [const, const, const]
            viol += inst.B.eval(full) == 0
        if best_viol is None or viol < best_viol:
            best, best_viol = tuple([const] * (1 << inst.s)), viol
    return best


def _resolve_table(inst, prover_kind, table):
    if table is not None:
        return tuple(table)
    if prover_kind == "honest":
        found = brute_force_oracle(inst)
        if found is None:
            raise InstanceError("honest prover needs a satisfiable instance")
        return found
    return best_constant_table(inst)


def _p1_sumcheck_prover(inst, spec, table, kind, bounds, i_size, R, rep):
    F = OracleSumcheckPoly(inst, spec, table)
    if kind == "honest":
        return F, HonestSumcheckProver(F, inst.m, bounds)
    return F, CheatingSumcheckProver(
        F, inst.m, bounds, i_size, prover_rand(R, "p1-cheat", rep)
    )


def plaintext_prover1(inst, spec, table, kind: str, reps: int, R: int):
    """P1 program: sumcheck rounds, oracle answers, multilinearity answers."""

    def program(ctx) -> Iterator[Any]:
        for rep in range(reps):
            vp = VerifierProgram(inst, spec)
            F, p = _p1_sumcheck_prover(
                inst, spec, table, kind, list(vp.degree_bounds), vp.i_size, R, rep
            )
            ans_rng = prover_rand(R, "p1-answers", rep)
            for i in range(inst.m):
                g = p.round_poly()
                yield Send(verifier(1), ("coefs", rep, i, tuple(g.coeffs)))
                msg = yield Recv(verifier(1))
                if msg[0] == "abort":
                    return
                p.receive_challenge(msg[2])
            answers = [
                F.oracle_at([p.prefix[v] for v in inst.block_vars(j)])
                for j in (1, 2, 3)
            ]
            yield Send(verifier(1), ("oracle-answers", rep, tuple(answers)))
            while True:
                msg = yield Recv(verifier(1))
                if msg[0] == "abort":
                    return
                if msg[0] == "done":
                    break
                _, j, q = msg
                if kind == "random-answers":
                    ans = ans_rng.randrange(spec.order)
                else:
                    ans = F.oracle_at(list(q))
                yield Send(verifier(1), ("a", j, ans))

    return program


def plaintext_prover2(inst, spec, table, kind: str, reps: int, R: int):
    """P2: a stateless copy answering the cross-check from the same
    extension (or the same canonical cheat)."""

    def program(ctx) -> Iterator[Any]:
        for rep in range(reps):
            ans_rng = prover_rand(R, "p2-answers", rep)
            msg = yield Recv(verifier(2))
            _, q = msg
            if kind == "random-answers":
                ans = ans_rng.randrange(spec.order)
            else:
                ans = mle_eval_raw(spec, list(table), list(q))
            yield Send(verifier(2), ("omega2", rep, ans))

    return program


def _v1_phase(inst, spec, bundle, rep, out):
    """Generator driving one repetition of V1's side; fills `out` with
    sumcheck_ok / answers / aborted."""
    running = 0
    ok = True
    out["aborted"] = False
    for i in range(inst.m):
        msg = yield Recv(prover(1))
        g = UnivariatePoly(spec, list(msg[3]))
        if g.degree > bundle.degree_bounds[i]:
            yield Send(prover(1), ("abort", rep))
            out.update(sumcheck_ok=False, answers={}, aborted=True)
            return
        if spec.add(g.eval(0), g.eval(1)) != running:
            ok = False
        r_i = bundle.challenges[i]
        running = g.eval(r_i)
        yield Send(prover(1), ("challenge", rep, r_i))
    msg = yield Recv(prover(1))
    oracle_answers = list(msg[2])
    arith = arithmetize(inst.B)
    f_val = arith.eval(spec, list(bundle.challenges) + oracle_answers)
    if spec.mul(f_val, f_val) != running:
        ok = False
    answers: dict[int, int] = {}
    flat = []
    for j, q in enumerate(bundle.plan.questions(), start=1):
        yield Send(prover(1), ("q", j, tuple(q)))
        msg = yield Recv(prover(1))
        answers[j] = msg[2]
        flat.append(msg[2])
    yield Send(prover(1), ("done", rep))
    if not multilinearity_test(spec, bundle.plan, flat):
        ok = False
    for j, a in zip(
        range(inst.n_questions + 1, inst.n_questions + 4), oracle_answers
    ):
        answers[j] = a
    out.update(sumcheck_ok=ok, answers=answers)


def bfl_verdict_rule(reps: int):
    """Accept iff every repetition's flags are ok and the cross-checked
    answers match (sequential amplification)."""

    def rule(tapes: dict[int, list[Any]]) -> str:
        t1 = {e[1]: e for e in tapes.get(1, []) if e[0] == "v1"}
        t2 = {e[1]: e for e in tapes.get(2, []) if e[0] == "v2"}
        for rep in range(reps):
            if rep not in t1 or rep not in t2:
                return "reject"
            _, _, ok, a1 = t1[rep]
            _, _, a2 = t2[rep]
            if not ok or a1 != a2:
                return "reject"
        return "accept"

    return rule


def run_bfl_lemip(
    inst: Oracle3SatInstance,
    spec: FieldSpec,
    seed: int,
    prover_kind: str = "honest",
    table: Sequence[int] | None = None,
    reps: int = 1,
) -> tuple[str, Any]:
    """Localized protocol: isolated V1/P1 and V2/P2 pairs, no correlators,
    all verifier questions pre-derived from the shared string S."""
    S, R = seeds_for(seed)
    table = _resolve_table(inst, prover_kind, table)
    vp = VerifierProgram(inst, spec)

    def v1(ctx) -> Iterator[Any]:
        for rep in range(reps):
            bundle = vp.run(bundle_tape(S, rep))
            out: dict[str, Any] = {}
            yield from _v1_phase(inst, spec, bundle, rep, out)
            yield Send(V0, ("v1", rep, out["sumcheck_ok"], out["answers"].get(bundle.istar)))
            if out["aborted"]:
                return

    def v2(ctx) -> Iterator[Any]:
        for rep in range(reps):
            bundle = vp.run(bundle_tape(S, rep))
            yield Send(prover(2), ("q", bundle.question(inst, bundle.istar)))
            msg = yield Recv(prover(2))
            yield Send(V0, ("v2", rep, msg[2]))

    topo = build_topology(2, S=S, R=R)
    transcript = run_protocol(
        topo,
        {
            verifier(1): v1,
            verifier(2): v2,
            prover(1): plaintext_prover1(inst, spec, table, prover_kind, reps, R),
            prover(2): plaintext_prover2(inst, spec, table, prover_kind, reps, R),
        },
        verdict_rule=bfl_verdict_rule(reps),
    )
    return transcript.verdict, transcript


def run_bfl_classic(
    inst: Oracle3SatInstance,
    spec: FieldSpec,
    seed: int,
    prover_kind: str = "honest",
    table: Sequence[int] | None = None,
    reps: int = 1,
) -> tuple[str, Any]:
    """Single-verifier (standard-model) variant via the bulletin board:
    V2 learns the cross-check question only from V1's post."""
    S, R = seeds_for(seed)
    table = _resolve_table(inst, prover_kind, table)
    vp = VerifierProgram(inst, spec)

    def v1(ctx) -> Iterator[Any]:
        for rep in range(reps):
            bundle = vp.run(bundle_tape(S, rep))
            out: dict[str, Any] = {}
            yield from _v1_phase(inst, spec, bundle, rep, out)
            yield Send(VHAT, ("post", (rep, bundle.question(inst, bundle.istar))))
            yield Recv(VHAT)
            yield Send(V0, ("v1", rep, out["sumcheck_ok"], out["answers"].get(bundle.istar)))
            if out["aborted"]:
                return

    def v2(ctx) -> Iterator[Any]:
        for rep in range(reps):
            yield Send(VHAT, ("read-wait", rep + 1))
            msg = yield Recv(VHAT)
            _, q = msg[1][rep]
            yield Send(prover(2), ("q", q))
            msg = yield Recv(prover(2))
            yield Send(V0, ("v2", rep, msg[2]))

    topo = build_topology(2, verifier_correlator=True, S=S, R=R)
    transcript = run_protocol(
        topo,
        {
            verifier(1): v1,
            verifier(2): v2,
            prover(1): plaintext_prover1(inst, spec, table, prover_kind, reps, R),
            prover(2): plaintext_prover2(inst, spec, table, prover_kind, reps, R),
            VHAT: bulletin_correlator(),
        },
        verdict_rule=bfl_verdict_rule(reps),
    )
    return transcript.verdict, transcript


def reference_bfl(
    inst: Oracle3SatInstance,
    spec: FieldSpec,
    seed: int,
    prover_kind: str = "honest",
    table: Sequence[int] | None = None,
    reps: int = 1,
) -> str:
    """Pure-function single-verifier reference (no runtime, no messages),
    reading the same randomness substreams as the runtime variants."""
    S, R = seeds_for(seed)
    table = _resolve_table(inst, prover_kind, table)
    vp = VerifierProgram(inst, spec)
    for rep in range(reps):
        bundle = vp.run(bundle_tape(S, rep))
        F, p = _p1_sumcheck_prover(
            inst, spec, table, prover_kind, list(bundle.degree_bounds), bundle.i_size, R, rep
        )
        p1_ans = prover_rand(R, "p1-answers", rep)
        p2_ans = prover_rand(R, "p2-answers", rep)
        ok = True
        running = 0
        for i in range(inst.m):
            g = p.round_poly()
            if g.degree > bundle.degree_bounds[i]:
                return "reject"
            if spec.add(g.eval(0), g.eval(1)) != running:
                ok = False
            r_i = bundle.challenges[i]
            running = g.eval(r_i)
            p.receive_challenge(r_i)
        answers3 = [
            F.oracle_at([bundle.challenges[v] for v in inst.block_vars(j)])
            for j in (1, 2, 3)
        ]
        arith = arithmetize(inst.B)
        f_val = arith.eval(spec, list(bundle.challenges) + answers3)
        if spec.mul(f_val, f_val) != running:
            ok = False
        pool: dict[int, int] = {}
        flat = []
        for j, q in enumerate(bundle.plan.questions(), start=1):
            a = (
                p1_ans.randrange(spec.order)
                if prover_kind == "random-answers"
                else F.oracle_at(list(q))
            )
            pool[j] = a
            flat.append(a)
        for j, a in zip(range(inst.n_questions + 1, inst.n_questions + 4), answers3):
            pool[j] = a
        if not multilinearity_test(spec, bundle.plan, flat):
            ok = False
        q = bundle.question(inst, bundle.istar)
        a2 = (
            p2_ans.randrange(spec.order)
            if prover_kind == "random-answers"
            else mle_eval_raw(spec, list(table), list(q))
        )
        if not ok or pool[bundle.istar] != a2:
            return "reject"
    return "accept"
