"""PR-local simulators and the real-vs-simulated transcript comparison.

The simulator tuple (Mhat, M1, M2) replaces the provers against real,
possibly malicious, verifier programs.  Mhat serves indexed one-shot PR
boxes, one per commitment slot.  M2 feeds the key z2 it receives into
side B of every box and publishes the outputs as its cross-shares; M1
commits uniformly random strings and, whenever something must be
unveiled, equivocates: it picks the target value the protocol expects,
sets w1 = c_combo - target*z1, and solves one linear equation over the
not-yet-used boxes in the combination so that the side-A outputs sum to
a w2 satisfying the verdict machine's cross-check exactly.

M1 and M2 never exchange a message; their only shared state is the
common random string every simulator machine is initialized with (the
hash key gamma lives there, which is what makes the consistency phase
come out right).

Comparison harness: transcripts are canonicalized per verifier view
(each verifier's own incoming and outgoing messages - the global
interleaving of independent pairs is not observable by the verifiers).
At enumerable parameters the two value-bearing sub-distributions (one
commitment lifecycle, the consistency pair) are compared exactly by
enumerating all randomness; full runs are compared by a chi-square
homogeneity test over a feature projection of the views.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from itertools import product
from typing import Any, Sequence

from scipy import stats

from .boxes import pr_box_correlator
from .committed_eval import Combo, MulTriple
from .fields import FieldSpec, mle_eval_raw
from .runtime import (
    CORRELATOR_P,
    CORRELATOR_V,
    PHAT,
    ByteTape,
    Recv,
    Send,
    Transcript,
    build_topology,
    encode_payload,
    prover,
    run_protocol,
    verifier,
)
from .zk_protocol import (
    ZkParams,
    ZkSchedule,
    draw_gamma,
    prover1_zk,
    prover2_zk,
    run_zk_lemip,
    su2_hash,
    verifier1_zk,
    verifier2_zk,
    zk_seeds,
    zk_verdict_rule,
)


class SimulationError(Exception):
    pass


ZERO_KINDS = {"rc", "line", "final", "omega-proof"}
FRESH_RANDOM_KINDS = {"mul-delta", "mul-eps"}


class SimulatorM1:
    """M1's brain: random commitments, box-equivocated unveilings.

    Implements the same strategy surface as the honest prover so the
    shared program skeleton emits identically shaped messages.
    """

    def __init__(self, inst, spec: FieldSpec, schedule: ZkSchedule, R_sim: int, rep: int, broken: bool = False):
        self.inst = inst
        self.spec = spec
        self.schedule = schedule
        self.gamma = draw_gamma(spec, R_sim, rep, inst.s)  # shared with M2
        self.tape = ByteTape(R_sim, f"sim-m1-{rep}")
        self.z1: int | None = None
        self.cs: list[int] = []
        self.fixed: dict[int, tuple[int, int]] = {}  # box idx -> (alpha, u)
        self.broken = broken

    # -- commitments: uniform strings, no values behind them ---------------

    def set_keys(self, z1: int) -> None:
        self.z1 = z1

    def commit(self, value: int | None) -> int:
        c = self.tape.field_elem(self.spec)
        self.cs.append(c)
        return c

    def gamma_values(self):
        return [None] * (self.inst.s + 1)

    def triple_values(self):
        return [(None, None, None)] * self.schedule.n_triples

    def round_coeffs(self, i: int):
        return [None] * (self.schedule.degree_bounds[i] + 1)

    def receive_challenge(self, r: int) -> None:
        pass

    def oracle_answer_values(self):
        return [None, None, None]

    def answer_value(self, q):
        return None

    def omega_value(self, q, pool_value) -> int:
        return su2_hash(self.spec, self.gamma, q)

    # -- equivocation -------------------------------------------------------

    def _c_combo(self, combo: Combo) -> int:
        spec = self.spec
        acc = spec.mul(combo.const, self.z1)
        for i, a in combo.bases.items():
            acc = spec.add(acc, spec.mul(a, self.cs[i]))
        return acc

    def unveil(self, combo: Combo, kind: str, target: int | None = None):
        spec = self.spec
        if kind in ZERO_KINDS:
            target = 0
        elif kind in FRESH_RANDOM_KINDS:
            target = self.tape.field_elem(spec)
        elif target is None:
            raise SimulationError(f"no target for unveil kind {kind!r}")
        w1 = spec.sub(self._c_combo(combo), spec.mul(target, self.z1))
        if self.broken:
            # control group: skip equivocation, guess the cross-opening
            return (target, w1, self.tape.field_elem(spec))
        w2 = yield from self._solve_boxes(combo, w1)
        return (target, w1, w2)

    def _solve_boxes(self, combo: Combo, w1: int):
        """Feed side A of the combo's unused boxes so that
        sum(a_j * alpha_j) = -w1, then read w2 off the outputs."""
        spec = self.spec
        need = spec.neg(w1)
        acc = 0
        free: list[tuple[int, int]] = []
        for idx, a in sorted(combo.bases.items()):
            if idx in self.fixed:
                acc = spec.add(acc, spec.mul(a, self.fixed[idx][0]))
            else:
                free.append((idx, a))
        if not free:
            raise SimulationError(f"no fresh box for combo {combo!r}")
        queries = []
        for idx, a in free[:-1]:
            alpha = self.tape.field_elem(spec)
            queries.append((idx, alpha))
            acc = spec.add(acc, spec.mul(a, alpha))
        solver_idx, solver_a = free[-1]
        alpha = spec.mul(spec.sub(need, acc), spec.inv(solver_a))
        queries.append((solver_idx, alpha))
        yield Send(PHAT, ("boxes", "A", tuple(queries)))
        msg = yield Recv(PHAT)
        for (idx, a_in), u in zip(queries, msg[1]):
            self.fixed[idx] = (a_in, u)
        w2 = 0
        for idx, a in combo.bases.items():
            w2 = spec.add(w2, spec.mul(a, self.fixed[idx][1]))
        return w2

    def audit_unveil(self, triple: MulTriple):
        """Audited triples must open to a plausible (alpha, beta, alpha*beta)."""
        spec = self.spec
        a_val = self.tape.field_elem(spec)
        b_val = self.tape.field_elem(spec)
        g_val = spec.mul(a_val, b_val)
        parts = []
        for idx, val in ((triple.ia, a_val), (triple.ib, b_val), (triple.ic, g_val)):
            opened = yield from self.unveil(Combo.base(spec, idx), "audit", val)
            parts += list(opened)
        return tuple(parts)


class SimulatorM2:
    """M2: publishes box outputs as cross-shares, hashes the question."""

    def __init__(self, inst, spec: FieldSpec, schedule: ZkSchedule, R_sim: int, rep: int):
        self.inst = inst
        self.spec = spec
        self.schedule = schedule
        self.gamma = draw_gamma(spec, R_sim, rep, inst.s)

    def cross_shares(self, z2: int):
        queries = tuple((idx, z2) for idx in range(self.schedule.total))
        yield Send(PHAT, ("boxes", "B", queries))
        msg = yield Recv(PHAT)
        return list(msg[1])

    def omega2(self, q: Sequence[int]) -> int:
        return su2_hash(self.spec, self.gamma, q)


def simulate_zk(
    inst,
    seed: int,
    params: ZkParams = ZkParams(),
    v1_behavior: str = "honest",
    v2_behavior: str = "honest",
    broken: bool = False,
) -> tuple[str, Transcript]:
    """Run the verifier programs against (Mhat, M1, M2) instead of provers."""
    spec = params.field()
    S, R_sim = zk_seeds(seed)
    schedule = ZkSchedule(inst, spec, params.sigma)

    def m1_factory(rep: int):
        return SimulatorM1(inst, spec, schedule, R_sim, rep, broken=broken)

    def m2_factory(rep: int):
        return SimulatorM2(inst, spec, schedule, R_sim, rep)

    topo = build_topology(2, prover_correlator=True, S=S, R=R_sim)
    transcript = run_protocol(
        topo,
        {
            verifier(1): verifier1_zk(inst, spec, schedule, S, params.reps, v1_behavior),
            verifier(2): verifier2_zk(inst, spec, schedule, S, params.reps, v2_behavior),
            prover(1): prover1_zk(inst, spec, schedule, m1_factory, params.reps),
            prover(2): prover2_zk(inst, spec, schedule, m2_factory, params.reps),
            PHAT: pr_box_correlator(spec),
        },
        verdict_rule=zk_verdict_rule(spec, schedule, params.reps),
    )
    return transcript.verdict, transcript


def phase1_cut(transcript: Transcript) -> Transcript:
    """Each pair's conversation truncated at the start of its consistency
    test: the pre-computation, committed sumcheck, and multilinearity
    phases."""
    cut = Transcript()
    done = {1: False, 2: False}
    for m in transcript.messages:
        pl = m.payload
        tag = pl[0] if isinstance(pl, tuple) and pl else None
        if tag == "index":
            done[1] = True
        if tag == "q" and m.receiver == prover(2):
            done[2] = True
        pair = 1 if prover(1) in (m.sender, m.receiver) or verifier(1) in (m.sender, m.receiver) else 2
        if not done[pair]:
            cut.append(m)
    return cut


def simulate_part1(inst, seed: int, params: ZkParams = ZkParams()) -> Transcript:
    """Partial simulated transcript covering everything before the
    consistency test."""
    _, transcript = simulate_zk(inst, seed, params)
    return phase1_cut(transcript)


def simulate_part2(
    spec: FieldSpec, gamma: Sequence[int], q1: Sequence[int], q2: Sequence[int]
) -> tuple[int, int]:
    """The consistency phase in isolation: what M1 unveils for index i and
    what M2 answers for the (possibly substituted) question."""
    return su2_hash(spec, gamma, q1), su2_hash(spec, gamma, q2)


# ---------------------------------------------------------------------------
# canonical views + features


def verifier_views(transcript: Transcript) -> bytes:
    """Per-verifier conversation streams (correlator traffic excluded),
    plus the verdict: the distribution object the ZK definition speaks
    about.  Independent pairs' global interleaving is not part of any
    verifier's view, so it is quotiented out."""
    chunks = []
    indices = sorted(
        {m.sender.index for m in transcript.messages if m.sender.role == "verifier"}
        | {m.receiver.index for m in transcript.messages if m.receiver.role == "verifier"}
    )
    for vi in indices:
        chunk = [b"V%d" % vi]
        for m in transcript.messages:
            if CORRELATOR_P in (m.sender.role, m.receiver.role):
                continue
            if CORRELATOR_V in (m.sender.role, m.receiver.role):
                continue
            if (m.sender.role == "verifier" and m.sender.index == vi) or (
                m.receiver.role == "verifier" and m.receiver.index == vi
            ):
                chunk.append(
                    repr(m.sender).encode()
                    + b">"
                    + repr(m.receiver).encode()
                    + encode_payload(m.payload)
                )
        chunks.append(b"|".join(chunk))
    return b"&".join(chunks) + b"#" + (transcript.verdict or "").encode()


def view_digest(transcript: Transcript) -> bytes:
    return hashlib.sha256(verifier_views(transcript)).digest()


FEATURE_NAMES = (
    "verdict",
    "v1_flag",
    "omega_match",
    "omega1_bin",
    "first_c_bin",
    "first_d_bin",
    "shape_bin",
)


def transcript_features(transcript: Transcript, bins: int = 8) -> tuple:
    """Low-dimensional projection of a run for the statistical comparison.

    Full-transcript hashes are unique per run (fresh randomness), so a
    chi-square over them has no power; these features quotient out healthy
    uniform randomness while exposing verdicts, validity outcomes, the
    consistency values, and the message shape."""
    e1 = next((e for e in transcript.tapes.get(1, []) if e[0] == "v1"), None)
    e2 = next((e for e in transcript.tapes.get(2, []) if e[0] == "v2"), None)
    v1_flag = bool(e1[2]) if e1 else None
    omega1 = e1[4] if e1 else None
    omega2 = e2[4] if e2 else None
    first_c = e1[6][0] if e1 and e1[6] else None
    first_d = e2[3][0] if e2 and e2[3] else None
    shape = []
    for m in transcript.messages:
        if CORRELATOR_P in (m.sender.role, m.receiver.role):
            continue
        if CORRELATOR_V in (m.sender.role, m.receiver.role):
            continue
        tag = m.payload[0] if isinstance(m.payload, tuple) and m.payload else ""
        shape.append((repr(m.sender), repr(m.receiver), tag))
    shape_bin = int.from_bytes(
        hashlib.sha256(repr(sorted(shape)).encode()).digest()[:2], "little"
    ) % 4
    return (
        transcript.verdict,
        v1_flag,
        omega1 == omega2 if omega1 is not None else None,
        omega1 % bins if isinstance(omega1, int) else None,
        first_c % bins if isinstance(first_c, int) else None,
        first_d % bins if isinstance(first_d, int) else None,
        shape_bin,
    )


# ---------------------------------------------------------------------------
# exact sub-distributions (enumerable parameters)


def real_commit_unveil_dist(spec: FieldSpec, z1: int, z2: int, value: int) -> Counter:
    """Exact distribution of one commitment lifecycle (c, d, w1, w2) for a
    committed-and-unveiled value, over all (w1, w2)."""
    out: Counter = Counter()
    for w1, w2 in product(range(spec.order), repeat=2):
        c = spec.add(spec.mul(value, z1), w1)
        d = spec.add(spec.mul(w1, z2), w2)
        out[(c, d, w1, w2)] += 1
    return out


def sim_commit_unveil_dist(spec: FieldSpec, z1: int, z2: int, value: int) -> Counter:
    """The simulator's lifecycle: uniform c, box-backed d = x, equivocated
    opening; enumerated over all (c, x)."""
    out: Counter = Counter()
    for c, x in product(range(spec.order), repeat=2):
        w1 = spec.sub(c, spec.mul(value, z1))
        # side-A input -w1: u = (-w1)*z2 + x
        u = spec.add(spec.mul(spec.neg(w1), z2), x)
        out[(c, x, w1, u)] += 1
    return out


def real_consistency_dist(
    spec: FieldSpec, table: Sequence[int], q1: Sequence[int], q2: Sequence[int]
) -> Counter:
    """(Omega_1, Omega_2) over a uniform hash key, real provers."""
    out: Counter = Counter()
    s = len(q1)
    a1 = mle_eval_raw(spec, list(table), list(q1))
    a2 = mle_eval_raw(spec, list(table), list(q2))
    for gamma in product(range(spec.order), repeat=s + 1):
        out[
            (
                spec.add(a1, su2_hash(spec, gamma, q1)),
                spec.add(a2, su2_hash(spec, gamma, q2)),
            )
        ] += 1
    return out


def sim_consistency_dist(
    spec: FieldSpec, q1: Sequence[int], q2: Sequence[int]
) -> Counter:
    """(Omega_1, Omega_2) over a uniform hash key, simulators."""
    out: Counter = Counter()
    s = len(q1)
    for gamma in product(range(spec.order), repeat=s + 1):
        out[(su2_hash(spec, gamma, q1), su2_hash(spec, gamma, q2))] += 1
    return out


# ---------------------------------------------------------------------------
# the distinguisher harness


@dataclass
class ComparisonReport:
    mode: str
    n_real: int
    n_sim: int
    statistic: float
    p_value: float | None
    passed: bool
    per_feature: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n_real": self.n_real,
            "n_sim": self.n_sim,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "passed": self.passed,
            "per_feature": self.per_feature,
        }


def _total_variation(a: Counter, b: Counter) -> float:
    na, nb = sum(a.values()), sum(b.values())
    keys = set(a) | set(b)
    return sum(abs(a.get(k, 0) / na - b.get(k, 0) / nb) for k in keys) / 2


def indistinguishability_test(
    real: Sequence[Any],
    sim: Sequence[Any],
    mode: str = "chisq",
    significance: float = 0.01,
    min_samples: int = 200,
) -> ComparisonReport:
    """Compare two transcript samples (or exact distributions).

    exact: `real` and `sim` are Counters over outcomes; passes iff the
    normalized distributions are identical (statistic = total variation).

    chisq: `real` and `sim` are sequences of feature tuples; two-sample
    chi-square homogeneity over the pooled categories, significance 0.01.
    """
    if mode == "exact":
        a = real if isinstance(real, Counter) else Counter(real)
        b = sim if isinstance(sim, Counter) else Counter(sim)
        tv = _total_variation(a, b)
        return ComparisonReport("exact", sum(a.values()), sum(b.values()), tv, None, tv == 0.0, {})

    if len(real) < min_samples or len(sim) < min_samples:
        raise SimulationError(
            f"need at least {min_samples} samples per side, got {len(real)}/{len(sim)}"
        )
    # joint tuples are too sparse for one table; test every feature's
    # marginal and combine with a Bonferroni correction (conservative under
    # dependence, so the significance level is honored)
    per_feature: dict[str, float] = {}
    worst_stat, min_p = 0.0, 1.0
    n_features = len(real[0])
    for fi in range(n_features):
        name = FEATURE_NAMES[fi] if fi < len(FEATURE_NAMES) else f"f{fi}"
        stat, p = _two_sample_chisq([t[fi] for t in real], [t[fi] for t in sim])
        per_feature[name] = stat
        if p < min_p:
            min_p, worst_stat = p, stat
    p_value = min(1.0, min_p * n_features)
    return ComparisonReport(
        "chisq", len(real), len(sim), worst_stat, p_value, p_value > significance, per_feature
    )


def _two_sample_chisq(real: list, sim: list) -> tuple[float, float]:
    """Chi-square homogeneity on pooled categories (small cells merged)."""
    cats = Counter(map(repr, real)) + Counter(map(repr, sim))
    keep = {k for k, n in cats.items() if n >= 10}
    def bucket(x):
        r = repr(x)
        return r if r in keep else "__other__"

    ra = Counter(map(bucket, real))
    sb = Counter(map(bucket, sim))
    keys = sorted(set(ra) | set(sb))
    if len(keys) < 2:
        return 0.0, 1.0  # a single category: distributions identical
    table = [[ra.get(k, 0) for k in keys], [sb.get(k, 0) for k in keys]]
    res = stats.chi2_contingency(table)
    return float(res.statistic), float(res.pvalue)


def sample_views(
    inst,
    seeds: Sequence[int],
    params: ZkParams,
    simulated: bool,
    v1_behavior: str = "honest",
    v2_behavior: str = "honest",
    broken: bool = False,
) -> list[tuple]:
    """Feature samples for one side of the comparison."""
    out = []
    for seed in seeds:
        if simulated:
            _, t = simulate_zk(inst, seed, params, v1_behavior, v2_behavior, broken)
        else:
            _, t = run_zk_lemip(inst, seed, params, "honest", v1_behavior, v2_behavior)
        out.append(transcript_features(t))
    return out


def compare_real_vs_sim(
    inst,
    params: ZkParams,
    n_samples: int,
    v1_behavior: str = "honest",
    v2_behavior: str = "honest",
    broken: bool = False,
    seed_base: int = 0,
    significance: float = 0.01,
) -> ComparisonReport:
    """End-to-end comparison with independent seeds on the two sides."""
    real_seeds = range(seed_base, seed_base + n_samples)
    sim_seeds = range(seed_base + 10_000_019, seed_base + 10_000_019 + n_samples)
    real = sample_views(inst, real_seeds, params, False, v1_behavior, v2_behavior)
    sim = sample_views(inst, sim_seeds, params, True, v1_behavior, v2_behavior, broken)
    return indistinguishability_test(real, sim, "chisq", significance)
