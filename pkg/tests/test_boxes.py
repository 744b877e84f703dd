import random
from collections import Counter

import pytest
from scipy import stats

from lemip.boxes import (
    BoxError,
    BulletinBoard,
    PRBoxInstance,
    bulletin_correlator,
    bulletin_post,
    bulletin_read,
    pr_box_correlator,
    pr_box_query,
)
from lemip.fields import FieldSpec
from lemip.runtime import (
    PHAT,
    V0,
    VHAT,
    LocalityViolation,
    Recv,
    Send,
    build_topology,
    prover,
    run_protocol,
    verifier,
)

GF16 = FieldSpec.binary(4)
F13 = FieldSpec.prime(13)


def test_box_zero_input_side_a():
    rng = random.Random(0)
    for spec in (GF16, F13):
        box = PRBoxInstance(0, spec, rng)
        x = box.query("B", 7 % spec.order)
        u = box.query("A", 0)
        assert spec.sub(u, x) == 0


def test_box_identity_side_a():
    # a = 1, b = r reproduces the commitment-breaking relation u XOR x = r
    rng = random.Random(1)
    for _ in range(100):
        r = rng.randrange(GF16.order)
        box = PRBoxInstance(0, GF16, rng)
        x = box.query("B", r)
        u = box.query("A", 1)
        assert u ^ x == r


def test_correlation_law_random_boxes():
    rng = random.Random(2)
    for spec in (GF16, F13, FieldSpec.binary(16)):
        for _ in range(2000):
            a, b = rng.randrange(spec.order), rng.randrange(spec.order)
            box = PRBoxInstance(0, spec, rng)
            x = box.query("B", b)
            u = box.query("A", a)
            assert spec.sub(u, x) == spec.mul(a, b)


def test_one_shot_enforced():
    rng = random.Random(3)
    box = PRBoxInstance(0, GF16, rng)
    box.query("B", 1)
    with pytest.raises(BoxError):
        box.query("B", 2)
    box.query("A", 1)
    with pytest.raises(BoxError):
        box.query("A", 1)


def test_side_a_deferred_until_b():
    rng = random.Random(4)
    box = PRBoxInstance(0, GF16, rng)
    assert box.query("A", 3) is None
    x = box.query("B", 5)
    u = box.a_output()
    assert u is not None and u ^ x == GF16.mul(3, 5)


def test_x_marginal_uniform_chi_square():
    rng = random.Random(5)
    counts = Counter(PRBoxInstance(i, GF16, rng).x for i in range(10_000))
    observed = [counts.get(v, 0) for v in range(16)]
    _, p = stats.chisquare(observed)
    assert p > 0.01


def test_no_signaling_paired_boxes():
    # x is drawn at creation: whatever side A does (input 0, 1, or nothing),
    # side B's output in identically-seeded boxes is the same value
    for i in range(10_000):
        rng_a = random.Random(i)
        rng_b = random.Random(i)
        rng_c = random.Random(i)
        b0 = PRBoxInstance(0, GF16, rng_a)
        b1 = PRBoxInstance(0, GF16, rng_b)
        b2 = PRBoxInstance(0, GF16, rng_c)
        b0.query("A", 0)
        b1.query("A", 1)
        assert b0.query("B", 9) == b1.query("B", 9) == b2.query("B", 9)


def test_lazy_index_map():
    rng = random.Random(6)
    boxes = {}
    out_b = pr_box_query(boxes, 5, "B", 3, F13, rng)
    assert 5 in boxes and out_b == boxes[5].x
    with pytest.raises(BoxError):
        boxes[5].query("B", 1)


# ---------------------------------------------------------------------------
# correlator programs under the runtime


def test_pr_box_correlator_roundtrip():
    def p1(ctx):
        resp = yield Send(PHAT, ("box", 0, "B", 6))
        _, _, x = yield Recv(PHAT)
        yield Send(verifier(1), ("x", x))

    def p2(ctx):
        yield Send(PHAT, ("box", 0, "A", 2))
        _, _, u = yield Recv(PHAT)
        yield Send(verifier(2), ("u", u))

    def v(i):
        def prog(ctx):
            payload = yield Recv(prover(i))
            yield Send(V0, payload)

        return prog

    topo = build_topology(2, prover_correlator=True)
    t = run_protocol(
        topo,
        {
            prover(1): p1,
            prover(2): p2,
            verifier(1): v(1),
            verifier(2): v(2),
            PHAT: pr_box_correlator(F13),
        },
        seeds={"R": 1, "S": 1},
    )
    x = next(e[1] for e in t.tapes[1])
    u = next(e[1] for e in t.tapes[2])
    assert F13.sub(u, x) == F13.mul(2, 6)


def test_empty_correlator_query_is_locality_violation():
    def p1(ctx):
        yield Send(PHAT, ("box", 0, "B", 1))

    def v1(ctx):
        yield Recv(prover(1))

    topo = build_topology(1)  # Phat = empty: no such party/channel
    with pytest.raises(LocalityViolation):
        run_protocol(topo, {prover(1): p1, verifier(1): v1})


def test_bulletin_board_object():
    board = BulletinBoard()
    assert bulletin_read(board) == []
    bulletin_post(board, "a")
    bulletin_post(board, "b")
    assert bulletin_read(board) == ["a", "b"]
    assert bulletin_read(board) == ["a", "b"]  # reads never consume


def test_bulletin_correlator_program():
    def v1(ctx):
        yield Send(VHAT, ("post", "hello"))
        yield Recv(VHAT)
        yield Send(V0, ("accept",))

    def v2(ctx):
        yield Send(VHAT, ("read-wait", 1))
        _, posts = yield Recv(VHAT)
        yield Send(V0, ("posts", tuple(posts)))

    def idle(ctx):
        return
        yield

    topo = build_topology(2, verifier_correlator=True)
    t = run_protocol(
        topo,
        {
            verifier(1): v1,
            verifier(2): v2,
            prover(1): idle,
            prover(2): idle,
            VHAT: bulletin_correlator(),
        },
        seeds={"R": 0, "S": 0},
    )
    assert ("posts", ("hello",)) in t.tapes[2]
