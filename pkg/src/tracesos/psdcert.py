"""Exact positive-semidefiniteness certificates over the rationals.

Every verifier here works in exact arithmetic and returns a replayable
certificate: the witness data is sufficient to re-run the check and
reach the same verdict.  No floating-point eigensolver sits anywhere in
the trust path; the characteristic polynomial is computed with the
division-free Berkowitz scheme, so integer matrices stay in integers.

A symmetric matrix is positive semidefinite iff every signed
characteristic coefficient e_k (the sum of its k-by-k principal minors)
is nonnegative; that is the general-purpose test.  The structured routes
(Gram factor, Kronecker product, Schur complement, LDL^T pivots) certify
the special shapes arising from the certificate constructions.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple


class FactorMismatch(ValueError):
    """scale * U^T U differs from the target matrix."""


class NotAKroneckerProduct(ValueError):
    """The target is not structurally left (x) right."""


class SingularLeadingBlock(ValueError):
    """The leading block of a Schur split is not invertible."""


class SubmatrixMismatch(ValueError):
    """A principal submatrix differs from the expected matrix."""


class RationalMatrix:
    """Dense matrix of exact rationals with optional index labels."""

    __slots__ = ("rows", "row_labels", "col_labels")

    def __init__(self, rows, row_labels=None, col_labels=None):
        self.rows = tuple(tuple(Fraction(x) for x in row) for row in rows)
        if self.rows:
            width = len(self.rows[0])
            if any(len(r) != width for r in self.rows):
                raise ValueError("ragged rows")
        self.row_labels = tuple(row_labels) if row_labels else None
        self.col_labels = (tuple(col_labels) if col_labels
                           else self.row_labels if self._square() else None)

    def _square(self) -> bool:
        return not self.rows or len(self.rows) == len(self.rows[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    @property
    def size(self) -> int:
        nr, nc = self.shape
        if nr != nc:
            raise ValueError("matrix is not square")
        return nr

    def __getitem__(self, i):
        return self.rows[i]

    def __eq__(self, other):
        if isinstance(other, RationalMatrix):
            return self.rows == other.rows
        return NotImplemented

    def __hash__(self):
        return hash(self.rows)

    def is_symmetric(self) -> bool:
        nr, nc = self.shape
        if nr != nc:
            return False
        return all(self.rows[i][j] == self.rows[j][i]
                   for i in range(nr) for j in range(i + 1, nr))

    def require_symmetric(self) -> "RationalMatrix":
        if not self.is_symmetric():
            raise ValueError("matrix is not symmetric")
        return self

    def transpose(self) -> "RationalMatrix":
        nr, nc = self.shape
        return RationalMatrix([[self.rows[i][j] for i in range(nr)]
                               for j in range(nc)])

    def matmul(self, other: "RationalMatrix") -> "RationalMatrix":
        nr, nk = self.shape
        nk2, nc = other.shape
        if nk != nk2:
            raise ValueError("shape mismatch")
        orows = other.rows
        out = []
        for i in range(nr):
            srow = self.rows[i]
            out.append([sum(srow[k] * orows[k][j] for k in range(nk))
                        for j in range(nc)])
        return RationalMatrix(out)

    def scale(self, c) -> "RationalMatrix":
        c = Fraction(c)
        return RationalMatrix([[c * x for x in row] for row in self.rows])

    def kron(self, other: "RationalMatrix") -> "RationalMatrix":
        ar, ac = self.shape
        br, bc = other.shape
        out = []
        for i in range(ar * br):
            row = []
            for j in range(ac * bc):
                row.append(self.rows[i // br][j // bc] * other.rows[i % br][j % bc])
            out.append(row)
        return RationalMatrix(out)

    def submatrix(self, keep_rows: Sequence[int],
                  keep_cols: Optional[Sequence[int]] = None) -> "RationalMatrix":
        if keep_cols is None:
            keep_cols = keep_rows
        rl = ([self.row_labels[i] for i in keep_rows]
              if self.row_labels else None)
        cl = ([self.col_labels[j] for j in keep_cols]
              if self.col_labels else None)
        return RationalMatrix([[self.rows[i][j] for j in keep_cols]
                               for i in keep_rows], rl, cl)

    def entry_sum(self) -> Fraction:
        return sum((x for row in self.rows for x in row), Fraction(0))

    def trace(self) -> Fraction:
        return sum((self.rows[i][i] for i in range(self.size)), Fraction(0))

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def to_jsonable(self):
        obj = {"rows": [[str(x) for x in row] for row in self.rows]}
        if self.row_labels:
            obj["row_labels"] = [list(l) if isinstance(l, tuple) else l
                                 for l in self.row_labels]
        if self.col_labels and self.col_labels != self.row_labels:
            obj["col_labels"] = [list(l) if isinstance(l, tuple) else l
                                 for l in self.col_labels]
        return obj

    @classmethod
    def from_jsonable(cls, obj) -> "RationalMatrix":
        def delabel(ls):
            return [tuple(l) if isinstance(l, list) else l for l in ls] if ls else None

        return cls([[Fraction(x) for x in row] for row in obj["rows"]],
                   delabel(obj.get("row_labels")),
                   delabel(obj.get("col_labels")))

    def content_hash(self) -> str:
        blob = json.dumps([[str(x) for x in row] for row in self.rows],
                          separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def charpoly(q: RationalMatrix) -> List[Fraction]:
    """Coefficients of det(xI - Q), highest power first.

    Division-free Berkowitz recursion on the leading principal
    submatrices; exact for any rational entries, and integer all the way
    through for integer matrices.
    """
    d = q.size
    rows = [list(r) for r in q.rows]
    if d == 0:
        return [Fraction(1)]
    p = [Fraction(1), -rows[0][0]]
    for k in range(2, d + 1):
        a = rows[k - 1][k - 1]
        row = rows[k - 1][: k - 1]
        col = [rows[i][k - 1] for i in range(k - 1)]
        # Toeplitz column: 1, -a, -R C, -R B C, -R B^2 C, ...
        t = [Fraction(1), -a]
        vec = row
        for _ in range(k - 1):
            t.append(-sum(vec[i] * col[i] for i in range(k - 1)))
            vec = [sum(vec[i] * rows[i][j] for i in range(k - 1))
                   for j in range(k - 1)]
        new = [Fraction(0)] * (k + 1)
        for i in range(k + 1):
            acc = Fraction(0)
            for j in range(max(0, i - k), min(i, k - 1) + 1):
                acc += t[i - j] * p[j]
            new[i] = acc
        p = new
    return p


@dataclass
class PsdCertificate:
    """Outcome of one PSD verification, with replayable witness data."""

    method: str
    psd: bool
    matrix_hash: str
    witness: dict = field(default_factory=dict)
    nullity: Optional[int] = None

    def to_jsonable(self):
        obj = {"method": self.method, "psd": self.psd,
               "matrix_hash": self.matrix_hash, "witness": self.witness}
        if self.nullity is not None:
            obj["nullity"] = self.nullity
        return obj

    @classmethod
    def from_jsonable(cls, obj) -> "PsdCertificate":
        return cls(method=obj["method"], psd=obj["psd"],
                   matrix_hash=obj["matrix_hash"], witness=obj["witness"],
                   nullity=obj.get("nullity"))


def verify_gram_factor(q: RationalMatrix, u: RationalMatrix,
                       scale) -> PsdCertificate:
    """Certify q == scale * U^T U with scale > 0."""
    scale = Fraction(scale)
    if scale <= 0:
        raise ValueError("scale must be positive")
    got = u.transpose().matmul(u).scale(scale)
    if got.shape != q.shape:
        raise FactorMismatch(f"shape {got.shape} != {q.shape}")
    for i in range(q.size):
        for j in range(q.size):
            if got[i][j] != q[i][j]:
                raise FactorMismatch(
                    f"entry ({i},{j}): expected {q[i][j]}, factor gives {got[i][j]}")
    return PsdCertificate(
        method="gram_factor", psd=True, matrix_hash=q.content_hash(),
        witness={"u": u.to_jsonable(), "scale": str(scale)})


def verify_charpoly_signs(q: RationalMatrix) -> PsdCertificate:
    """PSD test from the signs of the characteristic coefficients.

    Writing det(xI - Q) = sum_k (-1)^k e_k x^(d-k), a symmetric Q is PSD
    iff every e_k >= 0 (e_k is the sum of the k-by-k principal minors).
    The nullity is read off as the number of trailing zero coefficients.
    """
    q.require_symmetric()
    coeffs = charpoly(q)
    d = q.size
    e = [(-1) ** k * coeffs[k] for k in range(d + 1)]
    violating = next((k for k in range(d + 1) if e[k] < 0), None)
    psd = violating is None
    nullity = None
    if psd:
        last_nonzero = max(k for k in range(d + 1) if e[k] != 0)
        nullity = d - last_nonzero
    witness = {"charpoly": [str(c) for c in coeffs]}
    if violating is not None:
        witness["violating_k"] = violating
        witness["violating_e"] = str(e[violating])
    return PsdCertificate(method="charpoly_signs", psd=psd,
                          matrix_hash=q.content_hash(), witness=witness,
                          nullity=nullity)


def verify_tensor_psd(q: RationalMatrix, left: RationalMatrix,
                      right: RationalMatrix) -> PsdCertificate:
    """Certify q == left (x) right with both factors PSD."""
    built = left.kron(right)
    if built.shape != q.shape or built != q:
        raise NotAKroneckerProduct(
            f"target is not the Kronecker product of the given "
            f"{left.shape} and {right.shape} factors")
    lc = verify_charpoly_signs(left)
    rc = verify_charpoly_signs(right)
    return PsdCertificate(
        method="tensor_product", psd=lc.psd and rc.psd,
        matrix_hash=q.content_hash(),
        witness={"left": left.to_jsonable(), "right": right.to_jsonable(),
                 "left_cert": lc.to_jsonable(), "right_cert": rc.to_jsonable()})


def ldlt_pivots(q: RationalMatrix) -> List[Fraction]:
    """Pivots of the unpivoted LDL^T elimination; fails fast on a zero pivot."""
    q.require_symmetric()
    d = q.size
    a = [list(row) for row in q.rows]
    pivots = []
    for k in range(d):
        piv = a[k][k]
        if piv == 0:
            raise SingularLeadingBlock(f"zero pivot at step {k}")
        pivots.append(piv)
        for i in range(k + 1, d):
            f = a[i][k] / piv
            if f == 0:
                continue
            for j in range(k, d):
                a[i][j] -= f * a[k][j]
    return pivots


def verify_ldlt_pd(q: RationalMatrix) -> PsdCertificate:
    """Certify positive definiteness by all-positive LDL^T pivots."""
    pivots = ldlt_pivots(q)
    psd = all(p > 0 for p in pivots)
    return PsdCertificate(method="ldlt", psd=psd,
                          matrix_hash=q.content_hash(),
                          witness={"pivots": [str(p) for p in pivots]},
                          nullity=0 if psd else None)


def schur_complement(q: RationalMatrix, split: int) -> RationalMatrix:
    """S - R^T P^(-1) R for q = [[P, R], [R^T, S]] split after `split` rows."""
    q.require_symmetric()
    d = q.size
    if not 0 < split < d:
        raise ValueError(f"split must be in 1..{d - 1}")
    idx_p = list(range(split))
    idx_s = list(range(split, d))
    p_rows = [[q[i][j] for j in idx_p] for i in idx_p]
    r_rows = [[q[i][j] for j in idx_s] for i in idx_p]
    # Solve P X = R by exact Gaussian elimination with partial pivot search.
    npv = split
    aug = [p_rows[i] + r_rows[i] for i in range(npv)]
    width = len(aug[0])
    for k in range(npv):
        piv_row = next((i for i in range(k, npv) if aug[i][k] != 0), None)
        if piv_row is None:
            raise SingularLeadingBlock(f"leading block singular at column {k}")
        if piv_row != k:
            aug[k], aug[piv_row] = aug[piv_row], aug[k]
        piv = aug[k][k]
        for i in range(npv):
            if i == k or aug[i][k] == 0:
                continue
            f = aug[i][k] / piv
            for j in range(k, width):
                aug[i][j] -= f * aug[k][j]
    x = [[aug[i][split + j] / aug[i][i] for j in range(d - split)]
         for i in range(npv)]
    comp = []
    for u in range(d - split):
        row = []
        for v in range(d - split):
            acc = q[split + u][split + v]
            for k in range(npv):
                acc -= q[split + u][k] * x[k][v]
            row.append(acc)
        comp.append(row)
    return RationalMatrix(comp)


def verify_schur(q: RationalMatrix, split: int) -> PsdCertificate:
    """Certify PSD via a positive-definite leading block and PSD complement."""
    comp = schur_complement(q, split)
    p_block = q.submatrix(list(range(split)))
    try:
        pd_cert = verify_ldlt_pd(p_block)
    except SingularLeadingBlock:
        # invertible (the complement exists) but a zero unpivoted pivot
        # appeared, which a positive-definite block can never produce
        pd_cert = PsdCertificate(method="ldlt", psd=False,
                                 matrix_hash=p_block.content_hash(),
                                 witness={"pivots": [], "zero_pivot": True})
    comp_cert = verify_charpoly_signs(comp)
    psd = pd_cert.psd and comp_cert.psd
    nullity = comp_cert.nullity if psd else None
    return PsdCertificate(
        method="schur_complement", psd=psd, matrix_hash=q.content_hash(),
        witness={"split": split, "complement": comp.to_jsonable(),
                 "leading_cert": pd_cert.to_jsonable(),
                 "complement_cert": comp_cert.to_jsonable()},
        nullity=nullity)


def verify_submatrix_psd(q: RationalMatrix, keep: Sequence[int],
                         expected: Optional[RationalMatrix] = None
                         ) -> PsdCertificate:
    """PSD-certify a principal submatrix, optionally pinning its contents."""
    keep = list(keep)
    if any(not 0 <= i < q.size for i in keep):
        raise ValueError("keep indices out of range")
    sub = q.submatrix(keep)
    if expected is not None and sub != expected:
        diff = next((i, j) for i in range(sub.size) for j in range(sub.size)
                    if sub[i][j] != expected[i][j])
        raise SubmatrixMismatch(f"submatrix differs from expected at {diff}")
    inner = verify_charpoly_signs(sub)
    return PsdCertificate(
        method="submatrix", psd=inner.psd, matrix_hash=q.content_hash(),
        witness={"keep": keep, "inner_cert": inner.to_jsonable()},
        nullity=inner.nullity)


def replay(cert: PsdCertificate, q: RationalMatrix) -> PsdCertificate:
    """Re-run a certificate's check from its witness against q."""
    if cert.matrix_hash != q.content_hash():
        raise ValueError("certificate was issued for a different matrix")
    w = cert.witness
    if cert.method == "gram_factor":
        return verify_gram_factor(q, RationalMatrix.from_jsonable(w["u"]),
                                  Fraction(w["scale"]))
    if cert.method == "tensor_product":
        return verify_tensor_psd(q, RationalMatrix.from_jsonable(w["left"]),
                                 RationalMatrix.from_jsonable(w["right"]))
    if cert.method == "schur_complement":
        return verify_schur(q, w["split"])
    if cert.method == "charpoly_signs":
        return verify_charpoly_signs(q)
    if cert.method == "ldlt":
        return verify_ldlt_pd(q)
    if cert.method == "submatrix":
        return verify_submatrix_psd(q, w["keep"])
    raise ValueError(f"unknown certificate method {cert.method!r}")
