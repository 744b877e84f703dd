"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s`.  Desk-scale parameters
throughout: r <= 2, s <= 2, m <= 8, k = 16, sigma = 8 (the statistical
indistinguishability sampling uses sigma = 1, which the criterion leaves
free, to keep the 9x10^4 full protocol executions inside the time budget).
"""

import math
import random
import time
from collections import Counter
from itertools import product

import pytest
from scipy import stats

from lemip.attacks import demo_relay_verifier, demo_ridiculous
from lemip.bfl import (
    Oracle3SatInstance,
    brute_force_oracle,
    run_bfl_classic,
    run_bfl_lemip,
    run_sumcheck,
)
from lemip.boxes import PRBoxInstance
from lemip.commitments import (
    double_open_attempt,
    equivocate,
    pr_commit,
    pr_cross,
    pr_unveil_verify,
)
from lemip.committed_eval import CommittedSession, Term
from lemip.fields import Cnf3, FieldSpec, arithmetize
from lemip.runtime import (
    V0,
    LocalityViolation,
    Recv,
    Send,
    TopologyViolation,
    assert_pairwise_local,
    build_topology,
    prover,
    run_protocol,
    verifier,
)
from lemip.simulators import (
    compare_real_vs_sim,
    indistinguishability_test,
    real_commit_unveil_dist,
    real_consistency_dist,
    sim_commit_unveil_dist,
    sim_consistency_dist,
)
from lemip.zk_protocol import ZkParams, consistency_test, draw_gamma, run_zk_lemip

F65537 = FieldSpec.prime(65537)
SAT = Oracle3SatInstance(Cnf3(7, [[5, 6, 7]]), 1, 1)
SAT_S2 = Oracle3SatInstance(Cnf3(2 + 6 + 3, [[1, 9, 10], [-2, 11, 3]]), 2, 2)
UNSAT = Oracle3SatInstance(Cnf3(7, [[5], [-6]]), 1, 1)

DESK = ZkParams(k=16, sigma=8, reps=2)
SAMPLING = ZkParams(k=16, sigma=1)
N_SAMPLES = 10_000


def crit(num: int, desc: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    print(f"criterion {num:02d} {status}  {desc}" + (f"  [{detail}]" if detail else ""))
    assert passed, f"criterion {num}: {desc} {detail}"


@pytest.fixture(scope="module")
def honest_zk_runs():
    runs = []
    for seed in range(200):
        verdict, transcript = run_zk_lemip(SAT, seed, DESK)
        runs.append((verdict, transcript))
    return runs


# ---------------------------------------------------------------------------


def test_criterion_01_locality_enforcement(honest_zk_runs):
    t0 = time.time()
    # exhaustive channel declarations: every illegal channel spec rejected
    from lemip.runtime import ONE_WAY, TWO_WAY, ChannelSpec

    illegal = [
        ChannelSpec(prover(1), prover(2)),
        ChannelSpec(verifier(1), verifier(2)),
        ChannelSpec(verifier(1), prover(2)),
        ChannelSpec(prover(1), verifier(2)),
        ChannelSpec(V0, verifier(1), ONE_WAY),
        ChannelSpec(verifier(1), V0, TWO_WAY),
        ChannelSpec(prover(1), V0, ONE_WAY),
    ]
    rejected = 0
    for ch in illegal:
        try:
            build_topology(2, extra_channels=[ch])
        except TopologyViolation:
            rejected += 1
    topo_ok = rejected == len(illegal)

    # exhaustive undeclared sends: every pair without a declared channel
    # raises LocalityViolation at send time
    from lemip.runtime import DeadlockError

    parties = [verifier(1), verifier(2), prover(1), prover(2)]
    declared = {
        (verifier(1), prover(1)), (prover(1), verifier(1)),
        (verifier(2), prover(2)), (prover(2), verifier(2)),
        (verifier(1), V0), (verifier(2), V0),
    }

    def idle(ctx):
        return
        yield

    def waiting(i):
        def program(ctx):
            yield Recv(prover(i))

        return program

    send_ok = True
    for src in parties:
        for dst in parties + [V0]:
            if src == dst:
                continue

            def offender(ctx, _dst=dst):
                yield Send(_dst, "probe")

            programs = {}
            for p in parties:
                if p == src:
                    programs[p] = offender
                elif p.role == "verifier":
                    programs[p] = waiting(p.index)  # keeps the run alive
                else:
                    programs[p] = idle
            try:
                run_protocol(build_topology(2), programs)
                violated = False
            except LocalityViolation:
                violated = True
            except DeadlockError:
                violated = False  # declared send delivered, run then starved
            expected = (src, dst) not in declared
            if violated != expected:
                send_ok = False

    # 200 honest runs, no violations, all pairwise local
    runs_ok = True
    for verdict, transcript in honest_zk_runs:
        try:
            assert_pairwise_local(transcript)
        except AssertionError:
            runs_ok = False
    crit(
        1,
        "locality enforcement (exhaustive sends + 200 clean honest runs)",
        topo_ok and send_ok and runs_ok,
        f"{time.time() - t0:.1f}s",
    )


def test_criterion_02_pr_box():
    t0 = time.time()
    rng = random.Random(20_000)
    law_ok = True
    for i in range(100_000):
        spec = F65537 if i % 2 else FieldSpec.binary(16)
        a, b = rng.randrange(spec.order), rng.randrange(spec.order)
        box = PRBoxInstance(i, spec, rng)
        x = box.query("B", b)
        u = box.query("A", a)
        if spec.sub(u, x) != spec.mul(a, b):
            law_ok = False
            break

    spec4 = FieldSpec.binary(4)
    counts = Counter(PRBoxInstance(i, spec4, rng).x for i in range(10_000))
    _, p_unif = stats.chisquare([counts.get(v, 0) for v in range(16)])

    nosignal_ok = True
    for i in range(10_000):
        b0 = PRBoxInstance(i, spec4, random.Random(i))
        b1 = PRBoxInstance(i, spec4, random.Random(i))
        b2 = PRBoxInstance(i, spec4, random.Random(i))
        b1.query("A", 0)
        b2.query("A", 1)
        if not (b0.query("B", 7) == b1.query("B", 7) == b2.query("B", 7)):
            nosignal_ok = False
            break

    crit(
        2,
        "PR box: law on 10^5 boxes, uniform marginal, no-signaling audit",
        law_ok and p_unif > 0.01 and nosignal_ok,
        f"p={p_unif:.3f} {time.time() - t0:.1f}s",
    )


def test_criterion_03_concealing():
    t0 = time.time()
    ok = True
    for spec, values in [
        (FieldSpec.binary(1), (0, 1)),
        (FieldSpec.binary(2), (0, 1)),
        (FieldSpec.binary(3), (0, 1)),
        (FieldSpec.prime(5), range(5)),
        (FieldSpec.prime(7), range(7)),
    ]:
        z1 = spec.elem(1)
        z2 = spec.elem(spec.order - 1)
        dists = []
        for v in values:
            counter = Counter()
            for w1, w2 in product(range(spec.order), repeat=2):
                c = pr_commit(spec.elem(v), z1, spec.elem(w1))
                d = pr_cross(spec.elem(w1), z2, spec.elem(w2))
                counter[(c.value, d.value)] += 1
            dists.append(counter)
        ok &= all(d == dists[0] for d in dists[1:])
        ok &= set(dists[0].values()) == {1}
    crit(3, "perfect concealing: exact (c, d) equality across values, k <= 3",
         ok, f"{time.time() - t0:.1f}s")


def test_criterion_04_binding():
    t0 = time.time()
    exact_ok = True
    for k in (2, 4, 8, 12):
        spec = FieldSpec.binary(k)
        rng = random.Random(k)
        z1 = spec.elem(rng.randrange(1, spec.order))
        c, d, openings = double_open_attempt(spec, z1, rng)
        successes = 0
        for z2v in range(spec.order):
            z2 = spec.elem(z2v)
            ok0 = pr_unveil_verify(c, d, z1, z2, *openings[0], "bit") == spec.zero()
            ok1 = pr_unveil_verify(c, d, z1, z2, *openings[1], "bit") == spec.one()
            successes += ok0 and ok1
        exact_ok &= successes == 1  # rate exactly 2^-k over uniform z2

    box_ok = True
    spec = FieldSpec.binary(16)
    rng = random.Random(4242)
    for _ in range(1000):
        z1 = spec.elem(rng.randrange(1, spec.order))
        z2 = spec.elem(rng.randrange(1, spec.order))
        box = PRBoxInstance(0, spec, rng)
        x = box.query("B", z2.value)
        c = spec.random_elem(rng)
        target = spec.random_elem(rng)
        w1, w2 = equivocate(box, target, c, z1)
        from lemip.fields import FieldElement

        got = pr_unveil_verify(c, FieldElement(spec, x), z1, z2, w1, w2, "field")
        box_ok &= got == target
    crit(4, "binding: exactly one z2 for k <= 12; PR-box break rate 1.0",
         exact_ok and box_ok, f"{time.time() - t0:.1f}s")


def test_criterion_05_sumcheck():
    t0 = time.time()
    # perfect completeness: exhaustive over verifier randomness, m = 3, |I| = 8
    taut = arithmetize(Cnf3(3, [[1, -1, 2]]))
    complete_ok = all(
        run_sumcheck(taut, F65537, i_size=8, challenges=list(ch))[0] == "accept"
        for ch in product(range(8), repeat=3)
    )
    # cheating prover: acceptance <= d*m/|I| + 3 sigma over 10^3 seeds
    bad = arithmetize(Cnf3(2, [[1], [2]]))
    bounds = [2 * bad.var_degree(i + 1) for i in range(2)]
    i_size = 2 * max(bounds) * 2
    q = max(bounds) * 2 / i_size
    trials = 1000
    accepts = sum(
        run_sumcheck(bad, F65537, seed=s, prover_kind="cheat")[0] == "accept"
        for s in range(trials)
    )
    sigma = math.sqrt(q * (1 - q) / trials)
    cheat_ok = accepts / trials <= q + 3 * sigma
    crit(5, "sumcheck: perfect completeness (exhaustive) + cheat bound",
         complete_ok and cheat_ok,
         f"cheat {accepts / trials:.3f} <= {q + 3 * sigma:.3f} {time.time() - t0:.1f}s")


def test_criterion_06_bfl_equivalence():
    t0 = time.time()
    cases = (
        [(SAT, "honest", s) for s in range(100)]
        + [(UNSAT, "cheat", s) for s in range(50)]
        + [(UNSAT, "random-answers", s) for s in range(50)]
    )
    equal = 0
    for inst, kind, seed in cases:
        v_l, _ = run_bfl_lemip(inst, F65537, seed, prover_kind=kind)
        v_c, _ = run_bfl_classic(inst, F65537, seed, prover_kind=kind)
        equal += v_l == v_c
    crit(6, "BFL localized = classic on 200 paired-seed trials",
         equal == len(cases), f"{equal}/200 {time.time() - t0:.1f}s")


def test_criterion_07_bfl_soundness():
    t0 = time.time()
    sat_ok = all(
        run_bfl_lemip(SAT, F65537, s, reps=2)[0] == "accept" for s in range(200)
    )
    results = {}
    for kind in ("cheat", "random-answers"):
        accepts = sum(
            run_bfl_lemip(UNSAT, F65537, s, prover_kind=kind, reps=2)[0] == "accept"
            for s in range(200)
        )
        results[kind] = accepts / 200
    sigma = math.sqrt((1 / 3) * (2 / 3) / 200)
    sound_ok = all(rate < 1 / 3 + 3 * sigma for rate in results.values())
    crit(7, "BFL completeness 1.0 and amplified cheats below 1/3",
         sat_ok and sound_ok,
         f"rates {results} {time.time() - t0:.1f}s")


def test_criterion_08_zk_end_to_end(honest_zk_runs):
    t0 = time.time()
    honest_ok = all(v == "accept" for v, _ in honest_zk_runs)
    # one larger instance too (r = s = 2)
    honest_ok &= run_zk_lemip(SAT_S2, 0, DESK)[0] == "accept"
    trials = 1000
    accepts = sum(
        run_zk_lemip(UNSAT, s, DESK, prover_kind="cheat")[0] == "accept"
        for s in range(trials)
    )
    bound = 1 / 3 + 64 * 2 ** -16
    sigma = math.sqrt(bound * (1 - bound) / trials)
    cheat_ok = accepts / trials <= bound + 3 * sigma
    crit(8, "ZK protocol: honest rate 1.0; cheats <= 1/3 + 64*2^-16",
         honest_ok and cheat_ok,
         f"cheat {accepts / trials:.3f} <= {bound + 3 * sigma:.3f} {time.time() - t0:.1f}s")


def test_criterion_09_consistency():
    t0 = time.time()
    spec = F65537
    table = brute_force_oracle(SAT)
    match_ok = True
    for seed in range(10_000):
        gamma = draw_gamma(spec, seed, 0, SAT.s)
        q = (seed % 65537,)
        o1, o2 = consistency_test(spec, gamma, table, q, q)
        match_ok &= o1 == o2
    trials = 10_000
    mismatches = 0
    for seed in range(trials):
        gamma = draw_gamma(spec, seed, 1, SAT.s)
        o1, o2 = consistency_test(spec, gamma, table, (3,), (4,))
        mismatches += o1 != o2
    sigma = math.sqrt((1 / spec.order) * (1 - 1 / spec.order) / trials)
    mismatch_ok = mismatches / trials >= 1 - 1 / spec.order - 3 * sigma
    # protocol level: substituting V2 is caught
    proto_ok = all(
        run_zk_lemip(SAT, s, SAMPLING, v2_behavior="substitute-question")[0] == "reject"
        for s in range(40)
    )
    crit(9, "consistency: equal questions match always; substitution caught",
         match_ok and mismatch_ok and proto_ok,
         f"mismatch {mismatches / trials:.5f} {time.time() - t0:.1f}s")


def test_criterion_10_zero_knowledge():
    t0 = time.time()
    # exact legs at enumerable parameters: the commitment lifecycle and the
    # consistency pair enumerated over all randomness
    exact_ok = True
    for spec in (FieldSpec.prime(5), FieldSpec.prime(7), FieldSpec.binary(2), FieldSpec.binary(3)):
        for value in (0, 1):
            real = real_commit_unveil_dist(spec, 2 % spec.order or 1, spec.order - 1, value)
            sim = sim_commit_unveil_dist(spec, 2 % spec.order or 1, spec.order - 1, value)
            exact_ok &= indistinguishability_test(real, sim, mode="exact").passed
    table = brute_force_oracle(SAT)  # the one-clause instance's oracle
    for spec in (FieldSpec.prime(5), FieldSpec.prime(7)):
        for q2 in ((1,), (2,)):
            real = real_consistency_dist(spec, table[:2], (1,), q2)
            sim = sim_consistency_dist(spec, (1,), q2)
            exact_ok &= indistinguishability_test(real, sim, mode="exact").passed

    # sampled comparisons at k = 16: honest verifier and each bundled
    # malicious verifier; the broken simulator control must fail
    behaviors = [
        ("honest", "honest"),
        ("honest", "substitute-question"),
        ("early-abort", "honest"),
        ("biased-challenge", "honest"),
    ]
    sampled_ok = True
    details = []
    for v1b, v2b in behaviors:
        report = compare_real_vs_sim(
            SAT, SAMPLING, N_SAMPLES, v1_behavior=v1b, v2_behavior=v2b
        )
        sampled_ok &= report.passed
        details.append(f"{v1b}/{v2b}: p={report.p_value:.3f}")
    broken = compare_real_vs_sim(SAT, SAMPLING, N_SAMPLES, broken=True)
    broken_ok = not broken.passed
    details.append(f"broken: p={broken.p_value:.2e}")
    crit(10, "zero-knowledge: exact legs equal; chi-square passes; control fails",
         exact_ok and sampled_ok and broken_ok,
         "; ".join(details) + f" {time.time() - t0:.0f}s")


def test_criterion_11_attack_demos():
    t0 = time.time()
    rid = demo_ridiculous(trials=1000, seed=0)
    relay = demo_relay_verifier(trials=1000, seed=0)
    crit(11, "attack demos: relay accepts 1.0; contamination breaks binding",
         rid["relay_accept_rate"] == 1.0
         and relay["contaminated_break_rate"] == 1.0
         and relay["prover_to_prover_messages"] == 0,
         f"{time.time() - t0:.1f}s")


def test_criterion_12_committed_evaluation():
    t0 = time.time()
    rng = random.Random(1200)
    eval_ok = True
    for trial in range(1000):
        spec = FieldSpec.prime(65537) if trial % 2 else FieldSpec.prime(13)
        session = CommittedSession(spec, 50_000 + trial)
        session.prepare_triples(2, 1)
        x, y = rng.randrange(spec.order), rng.randrange(spec.order)
        a = rng.randrange(spec.order)
        cx, cy = session.commit(x), session.commit(y)
        out = session.committed_poly_eval(
            [Term(a, (("combo", cx), ("combo", cy))), Term(1, (("combo", cx),)), Term(5, ())]
        )
        val, ok = session.unveil(out)
        expected = spec.add(spec.add(spec.mul(a, spec.mul(x, y)), x), 5)
        eval_ok &= ok and val == expected and session.v0_audit()
        if not eval_ok:
            break

    detected = 0
    trials = 1000
    for seed in range(trials):
        spec = FieldSpec.prime(65537)
        session = CommittedSession(spec, 90_000 + seed)
        session.prepare_triples(1, 8)
        cx, cy = session.commit(5), session.commit(9)
        triple = session.survivors.pop(0)
        from lemip.committed_eval import committed_mul_verify, mul_open

        msg = list(mul_open(session.committer, cx, cy, triple))
        msg[0] = spec.add(msg[0], 1)  # lie about the masked difference
        ct, _ = committed_mul_verify(session.ledger, cx, cy, triple, msg)
        session.unveil(ct)
        detected += not session.v0_audit()
    crit(12, "committed evaluation: matches plaintext; lie detection >= 99%",
         eval_ok and detected >= 990,
         f"detected {detected}/1000 {time.time() - t0:.1f}s")
