import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tracesos.poly import (
    Affine,
    MONO_ONE,
    ParameterDegreeOverflow,
    Polynomial,
    UnboundParameter,
    affine,
    mono_from_vars,
    mono_mul,
    mono_str,
    param,
    parse_monomial,
    quadratic_form,
    relabel,
    swap_ab,
    var,
)


def test_var_canonical_order():
    assert var("a", 3, 2) == var("a", 2, 3) == ("a", 2, 3)
    assert var("b", 7, 7) == ("b", 7, 7)
    with pytest.raises(ValueError):
        var("c", 1, 1)
    with pytest.raises(ValueError):
        var("a", 0, 1)


def test_monomial_basics():
    m = mono_from_vars([var("a", 2, 1), var("b", 1, 1), var("a", 1, 2)])
    assert m == ((("a", 1, 2), 2), (("b", 1, 1), 1))
    assert mono_str(m) == "a[1,2]^2*b[1,1]"
    assert mono_str(MONO_ONE) == "1"
    assert mono_mul(m, MONO_ONE) == m
    assert parse_monomial(mono_str(m)) == m
    assert parse_monomial("1") == MONO_ONE


def test_index_canonicalization_merges_products():
    # a[2,1] * a[1,2]b[2,2] -> a[1,2]^2 b[2,2]
    p = Polynomial.variable(var("a", 2, 1))
    q = Polynomial.monomial(mono_from_vars([var("a", 1, 2), var("b", 2, 2)]))
    prod = p * q
    assert prod == Polynomial.monomial(
        mono_from_vars([var("a", 1, 2), var("a", 1, 2), var("b", 2, 2)]))


def test_add_cancels_to_zero():
    m = mono_from_vars([var("a", 1, 1), var("b", 1, 1)])
    p = Polynomial.monomial(m, 1)
    q = Polynomial.monomial(m, -1)
    assert p + q == Polynomial.zero()
    assert not (p + q)
    assert Polynomial.monomial(m, 2) + Polynomial.monomial(m, 3) == \
        Polynomial.monomial(m, 5)


def test_parametric_add_example():
    # x1*m + (32 - x1)*m collapses to 32*m
    m = mono_from_vars([var("a", 1, 1)])
    p = Polynomial.monomial(m, param(1))
    q = Polynomial.monomial(m, affine(32, {1: -1}))
    assert p + q == Polynomial.monomial(m, 32)


def test_mul_examples():
    a12, b12 = Polynomial.variable(var("a", 1, 2)), Polynomial.variable(var("b", 1, 2))
    assert a12 * b12 == Polynomial.monomial(
        mono_from_vars([var("a", 1, 2), var("b", 1, 2)]))
    z11 = Polynomial.monomial(mono_from_vars([var("a", 1, 1), var("b", 1, 1)]))
    z12 = Polynomial.monomial(mono_from_vars([var("a", 1, 2), var("b", 1, 2)]))
    assert z11 * z12 == Polynomial.monomial(mono_from_vars(
        [var("a", 1, 1), var("a", 1, 2), var("b", 1, 1), var("b", 1, 2)]))


def test_parameter_degree_overflow():
    p = Polynomial.monomial(MONO_ONE, param(1))
    q = Polynomial.monomial(MONO_ONE, param(2))
    with pytest.raises(ParameterDegreeOverflow):
        p * q
    with pytest.raises(ParameterDegreeOverflow):
        param(1) * param(1)


def test_substitute_scalar_and_partial():
    m = mono_from_vars([var("a", 1, 1)] * 2 + [var("b", 1, 1)] * 2)
    p = Polynomial.monomial(m, 6)
    assert p.substitute({("a", 1, 1): 1, ("b", 1, 1): 2}) == 24
    part = p.substitute({("a", 1, 1): 1})
    assert isinstance(part, Polynomial)
    assert part == Polynomial.monomial(
        mono_from_vars([var("b", 1, 1)] * 2), 6)


def test_substitute_unbound_parameter():
    p = Polynomial.monomial(mono_from_vars([var("a", 1, 1)]), param(3))
    with pytest.raises(UnboundParameter):
        p.substitute({("a", 1, 1): 1})


def test_affine_normalization_and_equality():
    assert affine(5, {}) == Fraction(5)
    assert affine(0, {2: 0}) == 0
    a = affine(1, {4: Fraction(1, 2)})
    assert isinstance(a, Affine)
    assert a.subs({4: 2}) == 2
    assert a.subs({}) == a
    assert a - a == 0
    assert 2 * a == affine(2, {4: 1})


def test_serialization_round_trip():
    p = Polynomial({
        mono_from_vars([var("a", 1, 2), var("b", 2, 3)]): Fraction(3, 7),
        mono_from_vars([var("b", 1, 1)]): affine(2, {5: Fraction(-1, 3)}),
        MONO_ONE: 4,
    })
    blob = json.dumps(p.to_jsonable())
    q = Polynomial.from_jsonable(json.loads(blob))
    assert p == q
    # serialization order is deterministic
    assert json.dumps(q.to_jsonable()) == blob


def test_text_form():
    p = Polynomial.monomial(
        mono_from_vars([var("a", 1, 1)] * 2 + [var("b", 1, 1)] * 2), 6)
    assert p.text() == "6*a[1,1]^2*b[1,1]^2"
    assert Polynomial.zero().text() == "0"


def test_swap_and_relabel():
    m = mono_from_vars([var("a", 1, 2), var("b", 1, 1)])
    p = Polynomial.monomial(m, 3)
    assert swap_ab(p) == Polynomial.monomial(
        mono_from_vars([var("b", 1, 2), var("a", 1, 1)]), 3)
    assert relabel(p, {1: 2, 2: 1}) == Polynomial.monomial(
        mono_from_vars([var("a", 1, 2), var("b", 2, 2)]), 3)
    assert swap_ab(swap_ab(p)) == p


def test_quadratic_form_matches_direct_expansion():
    z = [Polynomial.variable(var("a", 1, 1)), Polynomial.variable(var("b", 1, 2))]
    q = [[Fraction(2), Fraction(3)], [Fraction(3), Fraction(5)]]
    direct = (z[0] * z[0]).scale(2) + (z[0] * z[1]).scale(6) + \
        (z[1] * z[1]).scale(5)
    assert quadratic_form(q, z) == direct


@st.composite
def polynomials(draw, n=3, max_terms=4, max_deg=8):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        deg = draw(st.integers(0, max_deg))
        vs = [var(draw(st.sampled_from("ab")), draw(st.integers(1, n)),
                  draw(st.integers(1, n))) for _ in range(deg)]
        coeff = Fraction(draw(st.integers(-9, 9)), draw(st.integers(1, 5)))
        mono = mono_from_vars(vs)
        terms[mono] = terms.get(mono, 0) + coeff
    return Polynomial(terms)


@given(polynomials(), polynomials())
def test_addition_commutes(p, q):
    assert p + q == q + p


@settings(max_examples=60)
@given(polynomials(max_deg=4), polynomials(max_deg=4), polynomials(max_deg=4))
def test_multiplication_associates(p, q, r):
    assert (p * q) * r == p * (q * r)


@settings(max_examples=60)
@given(polynomials(max_deg=4), polynomials(max_deg=4), polynomials(max_deg=4))
def test_distributivity(p, q, r):
    assert p * (q + r) == p * q + p * r


@given(polynomials(), polynomials())
def test_parameter_substitution_commutes_with_add(p, q):
    # attach an affine coefficient to each polynomial, then substitute the
    # published values before/after adding
    from tracesos.cert84 import published_params

    vals = published_params()
    pa = p + Polynomial.monomial(MONO_ONE, affine(1, {9: 2}))
    qa = q + Polynomial.monomial(MONO_ONE, affine(0, {10: Fraction(1, 2)}))
    lhs = (pa + qa).substitute_params(vals)
    rhs = pa.substitute_params(vals) + qa.substitute_params(vals)
    assert lhs == rhs
