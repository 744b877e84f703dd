"""Two-prover bit commitments and the field-generic PR-type commitment.

The classic scheme commits a bit b with pre-shared randomness w against a
verifier challenge r:  x = b*r XOR w, unveiled by announcing w' with
w' XOR x in {0, r}.

The PR-type scheme splits verification across two verifiers holding
independent keys z1, z2.  With pre-shared w1, w2:

    c = v*z1 + w1        (sent to V1 by the committing prover)
    d = w1*z2 + w2       (sent to V2 by the other prover)

Unveiling reveals (w1, w2); V1 reads the value from c - w1 and V0 also
requires d - w2 = w1*z2.  Bit mode is the scheme verbatim over GF(2^k);
field mode commits arbitrary field elements (c = v*z1 + w1) so that
linear combinations of commitments commit the same combinations of
values - the additive homomorphism the committed protocols run on.

Binding holds against local provers because a double opening fixes one
linear equation in the never-seen z2: exactly one key value breaks it.
A PR box (or anything that can emulate one) breaks binding outright;
`equivocate` is that attack, and also the simulator's main tool.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .boxes import PRBoxInstance
from .fields import FieldElement, FieldSpec


class CommitmentError(ValueError):
    pass


# ---------------------------------------------------------------------------
# BGKW commitment (bit x k-bit strings, XOR algebra)


def bgkw_commit(b: int, r: int, w: int, k: int) -> int:
    """Commit bit b against challenge r with shared secret w: b*r XOR w."""
    if b not in (0, 1):
        raise CommitmentError(f"committed value must be a bit, got {b}")
    if r.bit_length() > k or w.bit_length() > k or r < 0 or w < 0:
        raise CommitmentError(f"r, w must be {k}-bit strings")
    return (r if b else 0) ^ w


def bgkw_verify(x: int, w_prime: int, r: int) -> int | None:
    """Recover the bit from an unveiling, or None on reject."""
    delta = w_prime ^ x
    if delta == 0:
        return 0
    if delta == r:
        return 1
    return None


# ---------------------------------------------------------------------------
# PR-type commitment over a field


def pr_commit(v: FieldElement, z1: FieldElement, w1: FieldElement) -> FieldElement:
    """Commit phase, prover 1 side: c = v*z1 + w1."""
    return v * z1 + w1


def pr_cross(w1: FieldElement, z2: FieldElement, w2: FieldElement) -> FieldElement:
    """Commit phase, prover 2 side: d = w1*z2 + w2."""
    return w1 * z2 + w2


def pr_unveil_verify(
    c: FieldElement,
    d: FieldElement,
    z1: FieldElement,
    z2: FieldElement,
    w1: FieldElement,
    w2: FieldElement,
    mode: str = "bit",
) -> FieldElement | None:
    """Full unveiling check (both verifier tapes in hand). None = reject.

    Bit mode: c - w1 must be 0 or z1.  Field mode: any value, read as
    (c - w1) / z1.  Both modes require the cross check d - w2 = w1*z2.
    """
    if d - w2 != w1 * z2:
        return None
    lead = c - w1
    if mode == "bit":
        if lead.is_zero():
            return c.spec.zero()
        if lead == z1:
            return c.spec.one()
        return None
    if mode == "field":
        if z1.is_zero():
            raise CommitmentError("field mode needs z1 != 0")
        return lead / z1
    raise CommitmentError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class PrCommitment:
    """Full-knowledge record of one commitment (library/testing view).

    In-protocol no single party holds all of this; the runtime splits it
    across P1/P2/V1/V2.  spec/z1/z2 are the shared keys, (c, d) the
    transcript, (w1, w2) the openings, v the committed value.
    """

    spec: FieldSpec
    z1: FieldElement
    z2: FieldElement
    c: FieldElement
    d: FieldElement
    w1: FieldElement
    w2: FieldElement
    v: FieldElement

    def verify(self, mode: str = "field") -> FieldElement | None:
        return pr_unveil_verify(self.c, self.d, self.z1, self.z2, self.w1, self.w2, mode)


def commit_value(
    v: FieldElement,
    z1: FieldElement,
    z2: FieldElement,
    rng: random.Random,
) -> PrCommitment:
    """Honest commitment with fresh uniform (w1, w2)."""
    spec = v.spec
    w1 = spec.random_elem(rng)
    w2 = spec.random_elem(rng)
    return PrCommitment(
        spec, z1, z2, pr_commit(v, z1, w1), pr_cross(w1, z2, w2), w1, w2, v
    )


def hom_linear(
    commitments: list[PrCommitment], coeffs: list[FieldElement]
) -> PrCommitment:
    """Derived commitment to sum(a_i * v_i) with derived openings.

    All inputs must share (z1, z2); field mode only.  The verification law
    is preserved term by term: c - w1 = v*z1 and d - w2 = w1*z2 are linear
    in (c, d, w1, w2, v).
    """
    if not commitments:
        raise CommitmentError("empty combination")
    if len(commitments) != len(coeffs):
        raise CommitmentError("coefficient count mismatch")
    spec = commitments[0].spec
    z1, z2 = commitments[0].z1, commitments[0].z2
    acc = {"c": spec.zero(), "d": spec.zero(), "w1": spec.zero(), "w2": spec.zero(), "v": spec.zero()}
    for rec, a in zip(commitments, coeffs):
        if rec.z1 != z1 or rec.z2 != z2:
            raise CommitmentError("commitments use different keys")
        acc["c"] = acc["c"] + a * rec.c
        acc["d"] = acc["d"] + a * rec.d
        acc["w1"] = acc["w1"] + a * rec.w1
        acc["w2"] = acc["w2"] + a * rec.w2
        acc["v"] = acc["v"] + a * rec.v
    return PrCommitment(spec, z1, z2, acc["c"], acc["d"], acc["w1"], acc["w2"], acc["v"])


def equivocate(
    box: PRBoxInstance,
    target_v: FieldElement,
    c: FieldElement,
    z1: FieldElement,
) -> tuple[FieldElement, FieldElement]:
    """Open a never-committed c to target_v using one PR box.

    Precondition: at commit time the partner fed z2 into side B, took x,
    and published d = x, while c was chosen uniformly.  We set
    w1 = c - target_v*z1 and feed -w1 into side A; the box law
    u - x = (-w1)*z2 makes w2 := u satisfy d - w2 = w1*z2 exactly.
    (In GF(2^k) the side-A input is w1 itself since -w1 = w1.)
    """
    spec = c.spec
    w1 = c - target_v * z1
    u = box.query("A", spec.neg(w1.value))
    if u is None:
        raise CommitmentError("box side B not yet fed; nothing to equivocate against")
    return w1, FieldElement(spec, u)


def double_open_attempt(
    spec: FieldSpec,
    z1: FieldElement,
    rng: random.Random,
) -> tuple[FieldElement, FieldElement, dict[int, tuple[FieldElement, FieldElement]]]:
    """A local prover pair's best double-opening try (no nonlocal resources).

    Commit (c, d) uniformly and guess a key z2*; both openings are tuned
    to that guess (w2_b = d - w1_b * z2*).  The pair of cross checks
    d - w2_b = w1_b * z2 then holds iff z2 = z2*: exactly one key value
    admits the double opening, so over uniform z2 the success rate is
    exactly 1/|F|.
    """
    c = spec.random_elem(rng)
    d = spec.random_elem(rng)
    z2_guess = spec.random_elem(rng)
    w1_for = {0: c, 1: c - z1}
    openings = {b: (w1_for[b], d - w1_for[b] * z2_guess) for b in (0, 1)}
    return c, d, openings
