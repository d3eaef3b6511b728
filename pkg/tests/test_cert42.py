from fractions import Fraction

import pytest

from tracesos import golden
from tracesos.cert42 import (
    AuditFailure,
    accounting_audit,
    assemble_sos_42,
    assemble_sos_42_symmetrized,
    build_certificate42,
    build_q1_gram_factor,
    classify_necklace,
    index_sets,
    q2_kron_factors,
    z2_vector,
)
from tracesos.necklace import Necklace, TraceProblem, enumerate_necklaces, \
    trace_coeff_matrix, trace_coeff_necklace
from tracesos.poly import mono_str
from tracesos.psdcert import verify_gram_factor, verify_tensor_psd


def test_index_sets_order():
    assert index_sets(3) == [(1,), (2,), (3,), (1, 2), (1, 3), (2, 3)]
    assert len(index_sets(5)) == 5 + 10


def test_q1_entries_are_intersection_counts():
    cert = build_certificate42(4)
    labels = index_sets(4)
    for i, x in enumerate(labels):
        for j, y in enumerate(labels):
            assert cert.q1[i][j] == 6 * len(set(x) & set(y))


def test_n1_certificate():
    cert = build_certificate42(1)
    assert cert.q1.rows == ((Fraction(6),),)
    assert [p.text() for p in cert.z1] == ["a[1,1]*b[1,1]"]
    assert cert.z2_family == {}


def test_n3_matches_published_tables():
    cert = build_certificate42(3)
    assert [[int(x) for x in row] for row in cert.q1.rows] == \
        golden.load("q1_n3_42")["rows"]
    assert [[int(x) for x in row] for row in cert.q2.rows] == \
        golden.load("q2_n3_42")["rows"]
    assert [list(l) for l in cert.q1.row_labels] == \
        golden.load("q1_n3_42")["labels"]
    assert [mono_str(next(iter(p.terms))) for p in cert.z1] == \
        golden.load("z1_n3_42")["entries"]
    vectors = golden.load("z2_n3_42")["vectors"]
    for (i, j), vec in cert.z2_family.items():
        assert [mono_str(next(iter(p.terms))) for p in vec] == \
            vectors[f"{i}_{j}"]


def test_assembly_identity():
    for n in range(1, 5):
        cert = build_certificate42(n)
        assert assemble_sos_42(cert) == \
            trace_coeff_necklace(TraceProblem(4, 2, n)), n
    cert3 = build_certificate42(3)
    assert assemble_sos_42(cert3) == trace_coeff_matrix(TraceProblem(4, 2, 3))


def test_symmetrized_assembly_agrees():
    for n in (2, 3):
        cert = build_certificate42(n)
        assert assemble_sos_42_symmetrized(cert) == assemble_sos_42(cert)


def test_classification_published_examples():
    # split-accounting pair: same monomial, different collections
    first = Necklace(("a", "a", "b", "b"), (2, 2, 2, 3))
    tag = classify_necklace(first)
    assert tag.collection == "C2c"
    assert tag.cell == ("Q1", (2,), (2, 3))
    second = Necklace(("a", "b", "a", "b"), (2, 2, 3, 2))
    tag2 = classify_necklace(second)
    assert tag2.collection == "C4"
    assert tag2.cell == ("Q2", (2, 3), "UR", 2, 2)
    # alternating letters, uniform edges: one of the six on a diagonal 6
    uniform = Necklace(("a", "b", "a", "b"), (4, 4, 4, 4))
    tag3 = classify_necklace(uniform)
    assert tag3.collection == "C2a"
    assert tag3.cell == ("Q1", (4,), (4,))


def test_classification_is_total_and_single_valued():
    tags = set()
    for k in enumerate_necklaces(TraceProblem(4, 2, 3)):
        tag = classify_necklace(k)
        assert tag.collection in {"C1", "C2a", "C2b", "C2c", "C2d", "C3", "C4"}
        tags.add(tag.collection)
    assert tags == {"C1", "C2a", "C2b", "C2c", "C2d", "C3", "C4"}


def test_classifier_rejects_other_shapes():
    with pytest.raises(ValueError):
        classify_necklace(Necklace(("a", "b", "b", "b"), (1, 1, 1, 1)))
    with pytest.raises(ValueError):
        classify_necklace(Necklace(("a",) * 6, (1,) * 6))


def test_c1_balanced_edge_structure():
    # collection 1: two balanced edges matching, unbalanced mismatched
    for k in enumerate_necklaces(TraceProblem(4, 2, 3)):
        if classify_necklace(k).collection != "C1":
            continue
        balanced = [k.edges[t] for t in range(4)
                    if k.letters[t] != k.letters[(t + 1) % 4]]
        unbalanced = [k.edges[t] for t in range(4)
                      if k.letters[t] == k.letters[(t + 1) % 4]]
        assert len(balanced) == 2 and balanced[0] == balanced[1]
        assert len(unbalanced) == 2 and unbalanced[0] != unbalanced[1]


def test_audit_small_sizes():
    r1 = accounting_audit(1)
    assert r1.ok and r1.total_assigned == 6
    assert r1.counts == {("Q1", (1,), (1,)): 6}
    r2 = accounting_audit(2)
    assert r2.ok and r2.total_assigned == 96
    r3 = accounting_audit(3)
    assert r3.ok and r3.total_assigned == 486
    r3.raise_if_failed()
    assert "clean" in r3.summary()


def test_audit_entry_sum_identity_n2():
    n = 2
    q_sum = 6 * (n + 2 * n * (n - 1) + 2 * (n * (n - 1) // 2) * (n - 1)) \
        + (n * (n - 1) // 2) * 12 * n**2
    assert q_sum == 96 == 6 * n**4
    cert = build_certificate42(n)
    assert cert.entry_sum() == 96


def test_audit_worker_count_invariance():
    ref = accounting_audit(3)
    for w in (2, 4):
        report = accounting_audit(3, workers=w)
        assert report.ok and report.counts == ref.counts


def test_audit_budget():
    from tracesos.necklace import BudgetExceeded

    with pytest.raises(BudgetExceeded):
        accounting_audit(3, budget=10)


def test_audit_failure_raises():
    report = accounting_audit(2)
    report.mismatches.append((("Q1", (1,), (1,)), 6, 5))
    with pytest.raises(AuditFailure):
        report.raise_if_failed()


def test_entry_sums_up_to_8():
    for n in range(1, 9):
        assert build_certificate42(n).entry_sum() == 6 * n**4


def test_gram_factor_family():
    for n in (1, 3, 4):
        cert = build_certificate42(n)
        u, scale = build_q1_gram_factor(n)
        assert scale == 6
        got = verify_gram_factor(cert.q1, u, scale)
        assert got.psd
    u3, _ = build_q1_gram_factor(3)
    assert [[int(x) for x in row] for row in u3.rows] == \
        golden.load("u_n3_42")["rows"]


def test_q2_kron_structure():
    for n in (2, 3, 4):
        cert = build_certificate42(n)
        left, right = q2_kron_factors(n)
        assert left.kron(right) == cert.q2
        assert verify_tensor_psd(cert.q2, left, right).psd


def test_z2_vector_shape():
    vec = z2_vector(3, 1, 2)
    assert len(vec) == 6
    assert vec[0].text() == "a[1,1]*b[1,2]"
    assert vec[3].text() == "a[1,2]*b[1,1]"
    with pytest.raises(ValueError):
        z2_vector(3, 2, 2)
