import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tracesos.necklace import (
    BudgetExceeded,
    Necklace,
    TraceProblem,
    enumerate_necklaces,
    expand_square_formula,
    letter_patterns,
    necklace_monomial,
    planned_visits,
    sum_word_traces,
    trace_coeff_matrix,
    trace_coeff_necklace,
    word_trace,
)
from tracesos.poly import Polynomial, mono_from_vars, mono_str, swap_ab, var


def test_problem_validation():
    with pytest.raises(ValueError):
        TraceProblem(3, 2, 1)
    with pytest.raises(ValueError):
        TraceProblem(4, 1, 1)
    with pytest.raises(ValueError):
        TraceProblem(4, 6, 1)
    with pytest.raises(ValueError):
        TraceProblem(4, 2, 0)


def test_enumeration_counts():
    assert sum(1 for _ in enumerate_necklaces(TraceProblem(4, 2, 3))) == 486
    assert sum(1 for _ in enumerate_necklaces(TraceProblem(4, 0, 1))) == 1
    assert TraceProblem(8, 4, 2).necklace_count() == 17920
    assert sum(1 for _ in enumerate_necklaces(TraceProblem(8, 4, 2))) == 17920


def test_enumeration_is_deterministic_and_unique():
    seen = list(enumerate_necklaces(TraceProblem(4, 2, 2)))
    assert len(set(seen)) == len(seen) == 96
    assert seen[0].letters == ("a", "a", "b", "b")
    assert seen[0].edges == (1, 1, 1, 1)
    assert seen[1].edges == (1, 1, 1, 2)  # odometer, rightmost fastest


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        list(enumerate_necklaces(TraceProblem(4, 2, 3), budget=485))
    with pytest.raises(BudgetExceeded):
        trace_coeff_necklace(TraceProblem(8, 4, 9, diagonal_a=True),
                             budget=1000)
    with pytest.raises(BudgetExceeded):
        trace_coeff_matrix(TraceProblem(8, 4, 9, diagonal_a=True),
                           budget=1000)


def test_published_figure_monomials():
    # quad cycle with letters a,a,b,b and drawn edges 2,4,5,9
    k = Necklace(("a", "a", "b", "b"), (2, 4, 5, 9))
    assert mono_str(necklace_monomial(k)) == "a[2,4]*a[2,9]*b[4,5]*b[5,9]"
    # the fifth and sixth drawn necklaces carry the same monomial without
    # being rotations or reflections of one another
    k5 = Necklace(("a", "a", "b", "b"), (5, 6, 5, 5))
    k6 = Necklace(("a", "b", "a", "b"), (5, 6, 5, 5))
    assert necklace_monomial(k5) == necklace_monomial(k6)
    assert mono_str(necklace_monomial(k5)) == "a[5,5]*a[5,6]*b[5,5]*b[5,6]"


def test_diagonal_monomials():
    k = Necklace(("a", "b", "a", "b"), (7, 7, 7, 7))
    assert mono_str(necklace_monomial(k, diagonal_a=True)) == \
        "a[7,7]^2*b[7,7]^2"
    dead = Necklace(("a", "b", "a", "b"), (1, 2, 1, 2))
    assert necklace_monomial(dead, diagonal_a=True) is None
    assert necklace_monomial(dead) is not None


def test_diagonal_count_conservation():
    p = TraceProblem(8, 4, 2, diagonal_a=True)
    kept = dropped = 0
    for k in enumerate_necklaces(p):
        if necklace_monomial(k, diagonal_a=True) is None:
            dropped += 1
        else:
            kept += 1
    assert kept + dropped == p.necklace_count() == 17920
    assert kept == planned_visits(p, skip_zero=True)
    skipped = list(enumerate_necklaces(p, skip_zero=True))
    assert len(skipped) == kept
    assert len(set(skipped)) == kept


def test_trace_coeff_scalar_case():
    p = trace_coeff_necklace(TraceProblem(4, 2, 1))
    want = Polynomial.monomial(
        mono_from_vars([var("a", 1, 1)] * 2 + [var("b", 1, 1)] * 2), 6)
    assert p == want
    assert trace_coeff_matrix(TraceProblem(4, 2, 1)) == want


def test_counterexample_evaluations():
    assign = {("a", 1, 1): 1, ("a", 1, 2): -3, ("a", 2, 2): 1,
              ("b", 1, 1): 2, ("b", 1, 2): 0, ("b", 2, 2): -1}
    assert word_trace("ABAB", 2).substitute(assign) == -31
    assert trace_coeff_necklace(TraceProblem(4, 2, 2)).substitute(assign) == 138


def test_word_trace_scalar():
    assert word_trace("AABB", 1) == Polynomial.monomial(
        mono_from_vars([var("a", 1, 1)] * 2 + [var("b", 1, 1)] * 2))


def test_word_sum_equals_coefficient():
    assert sum_word_traces(4, 2, 2) == trace_coeff_necklace(TraceProblem(4, 2, 2))


def test_dual_oracle_small():
    for m, r, n, diag in [(2, 0, 2, False), (2, 2, 2, False), (4, 2, 2, False),
                          (4, 4, 2, False), (6, 2, 2, False),
                          (8, 4, 3, True), (6, 4, 2, True)]:
        p = TraceProblem(m, r, n, diagonal_a=diag)
        assert trace_coeff_necklace(p) == trace_coeff_matrix(p), (m, r, n)


def test_square_formula_examples():
    assert expand_square_formula(2, 1) == Polynomial.monomial(
        mono_from_vars([var("a", 1, 1)] * 2))
    assert expand_square_formula(4, 2) == \
        trace_coeff_necklace(TraceProblem(4, 0, 2))
    assert expand_square_formula(6, 2) == \
        trace_coeff_matrix(TraceProblem(6, 0, 2))


def test_ab_swap_symmetry():
    for m, r, n in [(4, 0, 2), (6, 2, 2), (4, 2, 3)]:
        lhs = trace_coeff_necklace(TraceProblem(m, r, n))
        rhs = swap_ab(trace_coeff_necklace(TraceProblem(m, m - r, n)))
        assert lhs == rhs, (m, r, n)


def test_relabel_invariance():
    from tracesos.poly import relabel

    base = trace_coeff_necklace(TraceProblem(4, 2, 3))
    for perm in ({1: 2, 2: 1}, {2: 3, 3: 2}):
        assert relabel(base, perm) == base


def test_worker_count_does_not_change_result():
    p = TraceProblem(4, 2, 3)
    ref = trace_coeff_necklace(p, workers=1)
    for w in (2, 3, 5):
        assert trace_coeff_necklace(p, workers=w) == ref
    pd = TraceProblem(8, 4, 2, diagonal_a=True)
    assert trace_coeff_necklace(pd, workers=3) == trace_coeff_necklace(pd)


@given(st.integers(0, 3), st.data())
def test_rotation_leaves_monomial_fixed(shift, data):
    m, r = 4, 2
    pattern = data.draw(st.sampled_from(letter_patterns(m, r)))
    edges = tuple(data.draw(st.integers(1, 4)) for _ in range(m))
    k = Necklace(pattern, edges)
    assert necklace_monomial(k.rotate(shift)) == necklace_monomial(k)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(2, 0), (2, 2), (4, 2), (4, 0), (6, 2), (6, 6)]),
       st.integers(1, 2), st.booleans())
def test_dual_oracle_property(mr, n, diag):
    m, r = mr
    p = TraceProblem(m, r, n, diagonal_a=diag)
    assert trace_coeff_necklace(p) == trace_coeff_matrix(p)


def test_coefficient_mass():
    # without collection, every necklace contributes one unit
    p = TraceProblem(4, 2, 2)
    total = sum(c for c in trace_coeff_necklace(p).terms.values())
    assert total == p.necklace_count()
