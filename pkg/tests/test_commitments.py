import random
from collections import Counter
from itertools import product

import pytest

from lemip.boxes import PRBoxInstance
from lemip.commitments import (
    CommitmentError,
    bgkw_commit,
    bgkw_verify,
    commit_value,
    double_open_attempt,
    equivocate,
    hom_linear,
    pr_commit,
    pr_cross,
    pr_unveil_verify,
)
from lemip.fields import FieldElement, FieldSpec

F7 = FieldSpec.prime(7)
F13 = FieldSpec.prime(13)
GF16 = FieldSpec.binary(4)


# ---------------------------------------------------------------------------
# BGKW


def test_bgkw_commit_b0_is_w():
    assert bgkw_commit(0, 0b1010, 0b0110, 4) == 0b0110


def test_bgkw_commit_b1_example():
    assert bgkw_commit(1, 0b1010, 0b0110, 4) == 0b1100


def test_bgkw_length_check():
    with pytest.raises(CommitmentError):
        bgkw_commit(1, 0b10000, 0b1, 4)
    with pytest.raises(CommitmentError):
        bgkw_commit(2, 0b1, 0b1, 4)


def test_bgkw_verify_cases():
    x = bgkw_commit(1, 0b1010, 0b0110, 4)
    assert bgkw_verify(x, 0b0110, 0b1010) == 1  # w' = w, delta = r
    assert bgkw_verify(x, x, 0b1010) == 0  # delta = 0
    assert bgkw_verify(x, x ^ 0b0001, 0b1010) is None


def test_bgkw_commit_phase_uniform_both_bits():
    # k=3: over all w, x is a permutation of the field for either bit
    k, r = 3, 0b101
    for b in (0, 1):
        xs = sorted(bgkw_commit(b, r, w, k) for w in range(8))
        assert xs == list(range(8))


# ---------------------------------------------------------------------------
# PR commitment basics


def keys(spec, seed=0):
    rng = random.Random(seed)
    z1 = spec.elem(rng.randrange(1, spec.order))
    z2 = spec.elem(rng.randrange(1, spec.order))
    return z1, z2, rng


def test_pr_commit_v0_is_w1():
    z1, z2, rng = keys(GF16)
    w1 = GF16.elem(9)
    assert pr_commit(GF16.zero(), z1, w1) == w1


def test_pr_commit_v1_offset_is_z1():
    z1, z2, rng = keys(GF16)
    w1 = GF16.elem(5)
    c = pr_commit(GF16.one(), z1, w1)
    assert c - w1 == z1


def test_pr_commit_field_mode_f7():
    # v=3, z1=2, w1=5 over F_7: c = 6+5 = 4
    assert pr_commit(F7.elem(3), F7.elem(2), F7.elem(5)).value == 4


def test_pr_round_trip_bit_and_field():
    for spec in (GF16, F13):
        z1, z2, rng = keys(spec, 1)
        for mode, values in (("bit", [0, 1]), ("field", range(spec.order))):
            for v in values:
                rec = commit_value(spec.elem(v), z1, z2, rng)
                got = rec.verify(mode)
                assert got is not None and got.value == v


def test_pr_tampered_w2_rejected():
    z1, z2, rng = keys(F13, 2)
    rec = commit_value(F13.elem(0), z1, z2, rng)
    assert pr_unveil_verify(rec.c, rec.d, z1, z2, rec.w1, rec.w2 + F13.one(), "bit") is None


def test_pr_bit_mode_rejects_other_values():
    z1, z2, rng = keys(F13, 3)
    rec = commit_value(F13.elem(5), z1, z2, rng)  # not a bit
    assert rec.verify("bit") is None
    assert rec.verify("field") == F13.elem(5)


# ---------------------------------------------------------------------------
# perfect concealing (exhaustive, k <= 3)


@pytest.mark.parametrize("spec", [FieldSpec.binary(2), FieldSpec.binary(3), FieldSpec.prime(5)])
def test_commit_transcript_distribution_value_independent(spec):
    # exact distribution of (c, d) over uniform (w1, w2), per committed value
    z1 = spec.elem(1 if spec.kind == "binary" else 2)
    z2 = spec.elem(spec.order - 1)
    dists = []
    for v in range(spec.order if spec.kind == "prime" else 2):
        counter = Counter()
        for w1, w2 in product(range(spec.order), repeat=2):
            c = pr_commit(spec.elem(v), z1, spec.elem(w1))
            d = pr_cross(spec.elem(w1), z2, spec.elem(w2))
            counter[(c.value, d.value)] += 1
        dists.append(counter)
    assert all(d == dists[0] for d in dists[1:])
    # and the common distribution is uniform over F^2
    assert set(dists[0].values()) == {1}


# ---------------------------------------------------------------------------
# statistical binding (exhaustive over z2)


@pytest.mark.parametrize("k", [2, 4, 8, 12])
def test_double_open_exactly_one_z2(k):
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
    assert successes == 1  # rate exactly 2^-k over uniform z2


def test_any_fixed_behavior_at_most_one_z2():
    # arbitrary (not tuned) opening pairs admit at most one accepting z2
    spec = FieldSpec.binary(6)
    rng = random.Random(99)
    z1 = spec.elem(rng.randrange(1, spec.order))
    for _ in range(50):
        c = spec.random_elem(rng)
        d = spec.random_elem(rng)
        op0 = (c, spec.random_elem(rng))
        op1 = (c - z1, spec.random_elem(rng))
        count = 0
        for z2v in range(spec.order):
            z2 = spec.elem(z2v)
            ok0 = pr_unveil_verify(c, d, z1, z2, *op0, "bit") == spec.zero()
            ok1 = pr_unveil_verify(c, d, z1, z2, *op1, "bit") == spec.one()
            count += ok0 and ok1
        assert count <= 1


# ---------------------------------------------------------------------------
# homomorphism


def test_hom_all_zero_coeffs():
    z1, z2, rng = keys(F13, 4)
    recs = [commit_value(F13.elem(v), z1, z2, rng) for v in (3, 7)]
    derived = hom_linear(recs, [F13.zero(), F13.zero()])
    assert derived.v.is_zero() and derived.w1.is_zero() and derived.w2.is_zero()
    assert derived.verify("field") == F13.zero()


def test_hom_sum_unveils_to_sum_gf():
    spec = FieldSpec.binary(8)
    z1, z2, rng = keys(spec, 5)
    for _ in range(1000):
        a = commit_value(spec.random_elem(rng), z1, z2, rng)
        b = commit_value(spec.random_elem(rng), z1, z2, rng)
        s = hom_linear([a, b], [spec.one(), spec.one()])
        assert s.verify("field") == a.v + b.v


def test_hom_scalar_fp():
    z1, z2, rng = keys(F13, 6)
    for _ in range(200):
        a = commit_value(F13.random_elem(rng), z1, z2, rng)
        coef = F13.random_elem(rng)
        s = hom_linear([a], [coef])
        assert s.verify("field") == coef * a.v


def test_hom_key_mismatch():
    z1, z2, rng = keys(F13, 7)
    a = commit_value(F13.elem(1), z1, z2, rng)
    b = commit_value(F13.elem(2), z2, z1, rng)
    with pytest.raises(CommitmentError):
        hom_linear([a, b], [F13.one(), F13.one()])


def test_hom_self_difference_is_zero():
    z1, z2, rng = keys(F13, 8)
    a = commit_value(F13.elem(9), z1, z2, rng)
    diff = hom_linear([a, a], [F13.one(), -F13.one()])
    assert diff.verify("field") == F13.zero()


# ---------------------------------------------------------------------------
# equivocation via PR box


def equivocation_trial(spec, target, rng):
    z1 = spec.elem(rng.randrange(1, spec.order))
    z2 = spec.elem(rng.randrange(1, spec.order))
    box = PRBoxInstance(0, spec, rng)
    # commit phase: partner feeds z2 into side B, publishes d = x; c uniform
    x = box.query("B", z2.value)
    d = FieldElement(spec, x)
    c = spec.random_elem(rng)
    w1, w2 = equivocate(box, target, c, z1)
    return pr_unveil_verify(c, d, z1, z2, w1, w2, "field")


@pytest.mark.parametrize("spec", [GF16, F13, FieldSpec.binary(16), FieldSpec.prime(65537)])
def test_equivocate_any_target(spec):
    rng = random.Random(10)
    for _ in range(250):
        target = spec.random_elem(rng)
        assert equivocation_trial(spec, target, rng) == target


def test_equivocate_target_zero_and_one_same_commitment():
    # the binding break: one (c, d) opened as 0 in one run, 1 in a rerun
    spec = GF16
    for trial in range(200):
        rng1 = random.Random(1000 + trial)
        rng2 = random.Random(1000 + trial)  # same box randomness
        got0 = equivocation_trial(spec, spec.zero(), rng1)
        got1 = equivocation_trial(spec, spec.one(), rng2)
        assert got0 == spec.zero() and got1 == spec.one()


def test_equivocate_requires_fed_box():
    rng = random.Random(11)
    box = PRBoxInstance(0, F13, rng)
    with pytest.raises(CommitmentError):
        equivocate(box, F13.one(), F13.elem(3), F13.elem(2))
