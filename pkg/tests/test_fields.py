import random

import pytest

from lemip.fields import (
    Cnf3,
    FieldError,
    FieldSpec,
    UnivariatePoly,
    arithmetize,
    boolean_cube,
    default_reduction_poly,
    ff_mul,
    gf2_poly_irreducible,
    is_prime,
    lagrange_interpolate,
    multilinear_extension,
    next_prime,
    poly_eval,
)

F7 = FieldSpec.prime(7)
F5 = FieldSpec.prime(5)
GF8 = FieldSpec.binary(3)  # x^3 + x + 1


# ---------------------------------------------------------------------------
# independent oracles


def clmul_reduce_oracle(a: int, b: int, poly: int) -> int:
    """Schoolbook carry-less multiply + polynomial long division."""
    prod = 0
    for i in range(a.bit_length()):
        if (a >> i) & 1:
            prod ^= b << i
    deg = poly.bit_length() - 1
    while prod.bit_length() - 1 >= deg and prod:
        prod ^= poly << (prod.bit_length() - 1 - deg)
    return prod


def mle_sum_oracle(spec, table, coords):
    """Direct summation over the Boolean cube."""
    s = len(coords)
    total = 0
    for b in range(1 << s):
        w = table[b]
        for j in range(s):
            cj = coords[j]
            w = spec.mul(w, cj if (b >> j) & 1 else spec.sub(1, cj))
        total = spec.add(total, w)
    return total


# ---------------------------------------------------------------------------
# field construction


def test_prime_check():
    assert is_prime(65537)
    assert not is_prime(65536)
    assert next_prime(1 << 16) == 65537
    with pytest.raises(FieldError):
        FieldSpec.prime(15)
    with pytest.raises(FieldError):
        FieldSpec.prime(1 << 62)


def test_reduction_table_is_irreducible():
    for k in list(range(1, 17)) + [24, 32]:
        assert gf2_poly_irreducible(default_reduction_poly(k)), k


def test_reducible_poly_rejected():
    # x^4 + x^2 + 1 = (x^2 + x + 1)^2
    with pytest.raises(FieldError):
        FieldSpec.binary(4, reduction_poly=0b10101)


def test_canonical_representation():
    assert F7.elem(10).value == 3
    with pytest.raises(FieldError):
        GF8.canonical(8)


# ---------------------------------------------------------------------------
# ff_mul examples


def test_ff_mul_gf8_example():
    # 0b010 x 0b100 mod x^3+x+1, checked against the schoolbook oracle
    expected = clmul_reduce_oracle(0b010, 0b100, 0b1011)
    assert expected == 0b011
    assert ff_mul(GF8.elem(0b010), GF8.elem(0b100)).value == expected


def test_ff_mul_f7():
    assert ff_mul(F7.elem(3), F7.elem(5)).value == 1


def test_ff_mul_identity():
    rng = random.Random(1)
    for spec in (F7, GF8, FieldSpec.binary(16)):
        for _ in range(20):
            a = spec.random_elem(rng)
            assert ff_mul(a, spec.one()) == a


def test_ff_mul_spec_mismatch():
    with pytest.raises(FieldError):
        ff_mul(F7.elem(1), F5.elem(1))


def test_binary_mul_matches_oracle():
    rng = random.Random(2)
    for k in (3, 8, 16):
        spec = FieldSpec.binary(k)
        for _ in range(200):
            a, b = rng.randrange(1 << k), rng.randrange(1 << k)
            assert spec.mul(a, b) == clmul_reduce_oracle(a, b, spec.modulus)


# ---------------------------------------------------------------------------
# field axioms + inverses


@pytest.mark.parametrize("spec", [F7, FieldSpec.binary(8), FieldSpec.prime(65537)])
def test_field_axioms_random_triples(spec):
    rng = random.Random(3)
    for _ in range(10_000):
        a, b, c = (rng.randrange(spec.order) for _ in range(3))
        assert spec.mul(spec.mul(a, b), c) == spec.mul(a, spec.mul(b, c))
        assert spec.mul(a, spec.add(b, c)) == spec.add(spec.mul(a, b), spec.mul(a, c))
        assert spec.add(spec.add(a, b), c) == spec.add(a, spec.add(b, c))


@pytest.mark.parametrize("spec", [F7, FieldSpec.prime(251), FieldSpec.binary(8), FieldSpec.binary(12)])
def test_inverse_exhaustive(spec):
    for v in range(1, spec.order):
        assert spec.mul(v, spec.inv(v)) == 1


def test_element_operators():
    a, b = F7.elem(3), F7.elem(6)
    assert (a + b).value == 2
    assert (a - b).value == 4
    assert (-a).value == 4
    assert (a / b) * b == a
    assert (a ** 3).value == 6
    assert a != b and a == F7.elem(3)


# ---------------------------------------------------------------------------
# univariate polynomials


def test_poly_eval_zero_poly():
    p = UnivariatePoly(F7, [])
    assert poly_eval(p, F7.elem(4)).value == 0
    assert p.degree == -1


def test_poly_eval_linear():
    p = UnivariatePoly(F7, [3, 2])
    assert poly_eval(p, F7.elem(2)).value == 0  # 3 + 4 mod 7


def test_degree2_fit_reproduces_quadratic():
    # sample a known quadratic at 3 points, fit, evaluate at a 4th point
    spec = FieldSpec.prime(101)
    q = UnivariatePoly(spec, [7, 11, 13])
    pts = [(x, q.eval(x)) for x in (2, 5, 9)]
    fit = lagrange_interpolate(spec, pts)
    assert fit == q
    assert fit.eval(77) == q.eval(77)


def test_poly_spec_mismatch():
    with pytest.raises(FieldError):
        poly_eval(UnivariatePoly(F7, [1]), F5.elem(1))


def test_interpolation_random_roundtrip():
    rng = random.Random(4)
    spec = FieldSpec.prime(65537)
    for _ in range(50):
        coeffs = [rng.randrange(spec.order) for _ in range(rng.randint(1, 5))]
        p = UnivariatePoly(spec, coeffs)
        xs = rng.sample(range(spec.order), len(p.coeffs) + 1 if p.coeffs else 1)
        pts = [(x, p.eval(x)) for x in xs]
        assert lagrange_interpolate(spec, pts) == p


# ---------------------------------------------------------------------------
# CNF + arithmetization


def test_cnf_validation():
    with pytest.raises(ValueError):
        Cnf3(2, [[]])
    with pytest.raises(ValueError):
        Cnf3(2, [[3]])
    with pytest.raises(ValueError):
        Cnf3(4, [[1, 2, 3, 4]])
    # duplicate literals are normalized away
    assert Cnf3(2, [[1, 1, 2]]).clauses == ((1, 2),)


def test_clause_term_values():
    f = arithmetize(Cnf3(3, [[1, 2, 3]]))
    assert f.eval(F7, [0, 0, 0]) == 1  # clause false
    assert f.eval(F7, [1, 0, 0]) == 0  # clause true


def test_tautology_arithmetization_vanishes():
    phi = Cnf3(2, [[1, -1, 2]])
    f = arithmetize(phi)
    for z in boolean_cube(2):
        assert f.eval(F7, list(z)) == 0


@pytest.mark.parametrize(
    "phi",
    [
        Cnf3(3, [[1, -2, 3], [-1, 2]]),
        Cnf3(5, [[1, 2, 3], [-3, -4, 5], [2, -5]]),
        Cnf3(12, [[1, 6, 12], [-1, -6], [3, -7, 11], [-12, 9]]),
        Cnf3(4, [[1, -1, 2], [3, 4]]),
    ],
)
def test_arithmetize_cube_equivalence(phi):
    # f(z) = 0 iff phi(z) = 1, exhaustively over the cube
    f = arithmetize(phi)
    for z in boolean_cube(phi.m):
        assert (f.eval(F7, list(z)) == 0) == (phi.eval(z) == 1)


def test_var_degree_counts_occurrences():
    f = arithmetize(Cnf3(2, [[1, -1, 2]]))
    assert f.var_degree(1) == 2
    assert f.var_degree(2) == 1
    assert f.degree == 3


# ---------------------------------------------------------------------------
# multilinear extension


def test_mle_agrees_on_cube():
    rng = random.Random(5)
    table = [rng.randrange(2) for _ in range(8)]
    for b in range(8):
        q = [F5.elem((b >> j) & 1) for j in range(3)]
        assert multilinear_extension(table, q).value == table[b]


def test_mle_s1_identity():
    # A(0)=0, A(1)=1 extends to the identity map
    for v in range(5):
        assert multilinear_extension([0, 1], [F5.elem(v)]).value == v


def test_mle_f5_example():
    table = [1, 0, 0, 1]
    q = [F5.elem(2), F5.elem(3)]
    expected = mle_sum_oracle(F5, table, [2, 3])
    assert expected == 3
    assert multilinear_extension(table, q).value == expected


def test_mle_dimension_mismatch():
    with pytest.raises(FieldError):
        multilinear_extension([0, 1, 1], [F5.elem(1)])


def test_mle_is_multilinear_on_axis_lines():
    # restricted to an axis-parallel line the extension is degree <= 1:
    # three collinear points must satisfy the two-point interpolation
    rng = random.Random(6)
    spec = FieldSpec.prime(65537)
    table = [rng.randrange(2) for _ in range(16)]
    for _ in range(50):
        base = [rng.randrange(spec.order) for _ in range(4)]
        axis = rng.randrange(4)
        c = rng.sample(range(spec.order), 3)
        ys = []
        for ci in c:
            pt = list(base)
            pt[axis] = ci
            ys.append(multilinear_extension(table, [spec.elem(v) for v in pt]).value)
        line = lagrange_interpolate(spec, [(c[0], ys[0]), (c[1], ys[1])])
        assert line.eval(c[2]) == ys[2]


def test_mle_matches_sum_oracle_random():
    rng = random.Random(7)
    spec = FieldSpec.prime(65537)
    for s in (1, 2, 3):
        table = [rng.randrange(2) for _ in range(1 << s)]
        for _ in range(20):
            coords = [rng.randrange(spec.order) for _ in range(s)]
            got = multilinear_extension(table, [spec.elem(v) for v in coords])
            assert got.value == mle_sum_oracle(spec, table, coords)
