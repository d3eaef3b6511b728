"""Coefficient-matching feasibility problems and exact re-verification.

A Gram certificate search is a block-diagonal SDP: unknown symmetric
matrices, one per basis block (shared across every vector of a block's
family), constrained so that for each monomial the mapped Gram entries
sum to the monomial's exact count in the coefficient polynomial.  The
module builds such problems for arbitrary even (m, r), writes and reads
them in sparse SDPA format, and turns approximate solver output back
into exact certified certificates, or rejects it.

No numeric SDP solver is linked here, deliberately: solving happens out
of process, and everything that crosses back in is re-verified in exact
arithmetic.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .cert84 import InconsistentSystem, ParamSystem, canonical_equation, q3_grid
from .necklace import TraceProblem, trace_coeff_necklace
from .poly import Affine, Monomial, Polynomial, mono_from_vars, mono_str, var
from .psdcert import PsdCertificate, RationalMatrix, verify_charpoly_signs

SYMBOLIC = "symbolic"


class RationalizationFailed(ValueError):
    """Approximate data could not be turned into exact rationals."""


@dataclass(frozen=True)
class Ansatz:
    """Entry constraints on one Gram block: pinned values and equality classes."""

    fixed: Tuple[Tuple[Tuple[int, int], Fraction], ...] = ()
    classes: Tuple[Tuple[Tuple[int, int], str], ...] = ()

    @classmethod
    def from_grid(cls, grid) -> "Ansatz":
        """Read an affine grid: numeric entries pin, single-parameter
        entries join the class named after their parameter."""
        fixed, classes = [], []
        d = len(grid)
        for u in range(d):
            for v in range(u, d):
                x = grid[u][v]
                if isinstance(x, Affine):
                    (k, c), = x.linear.items()
                    if c != 1 or x.const != 0:
                        raise ValueError("grid entry is not a bare parameter")
                    classes.append(((u, v), f"x{k}"))
                else:
                    fixed.append(((u, v), Fraction(x)))
        return cls(tuple(fixed), tuple(classes))

    @classmethod
    def fix_all(cls, matrix: RationalMatrix) -> "Ansatz":
        d = matrix.size
        return cls(tuple(((u, v), matrix[u][v])
                         for u in range(d) for v in range(u, d)))


@dataclass(frozen=True)
class BasisBlock:
    label: str
    vectors: Tuple[Tuple[Polynomial, ...], ...]
    ansatz: Optional[Ansatz] = None

    @property
    def dim(self) -> int:
        return len(self.vectors[0]) if self.vectors else 0


@dataclass(frozen=True)
class BasisSpec:
    blocks: Tuple[BasisBlock, ...]

    def content_hash(self) -> str:
        payload = []
        for b in self.blocks:
            vecs = [[p.text() for p in vec] for vec in b.vectors]
            ans = None
            if b.ansatz:
                ans = {"fixed": [[list(k), str(v)] for k, v in b.ansatz.fixed],
                       "classes": [[list(k), c] for k, c in b.ansatz.classes]}
            payload.append({"label": b.label, "vectors": vecs, "ansatz": ans})
        blob = json.dumps(payload, separators=(",", ":"), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def auto_basis(p: TraceProblem) -> BasisSpec:
    """One block spanning every monomial of half degree: a-degree
    (m-r)/2 and b-degree r/2 (diagonal a-variables only when requested)."""
    if p.diagonal_a:
        a_vars = [var("a", i, i) for i in range(1, p.n + 1)]
    else:
        a_vars = [var("a", i, j) for i in range(1, p.n + 1)
                  for j in range(i, p.n + 1)]
    b_vars = [var("b", i, j) for i in range(1, p.n + 1)
              for j in range(i, p.n + 1)]
    monos = []
    for a_part in itertools.combinations_with_replacement(a_vars, (p.m - p.r) // 2):
        for b_part in itertools.combinations_with_replacement(b_vars, p.r // 2):
            monos.append(Polynomial.monomial(mono_from_vars(a_part + b_part)))
    return BasisSpec((BasisBlock("G", (tuple(monos),)),))


def certificate_basis_42(n: int) -> BasisSpec:
    """The two-block basis of the degree-4 certificate, Gram entries free."""
    from .cert42 import build_certificate42

    cert = build_certificate42(n)
    blocks = [BasisBlock("Q1", (tuple(cert.z1),))]
    if cert.z2_family:
        blocks.append(BasisBlock(
            "Q2", tuple(tuple(v) for _, v in sorted(cert.z2_family.items()))))
    return BasisSpec(tuple(blocks))


def certificate_basis_84(n: int) -> BasisSpec:
    """The three-block diagonal-A basis with the published entry classes:
    Q1 and Q2 pinned, Q3 pinned constants plus the 22 shared parameters."""
    from .cert84 import build_certificate84

    cert = build_certificate84(n)
    blocks = [
        BasisBlock("Q1", (tuple(cert.z1),), Ansatz.fix_all(cert.q1)),
    ]
    if cert.z2:
        blocks.append(BasisBlock("Q2", (tuple(cert.z2),),
                                 Ansatz.fix_all(cert.q2)))
    if cert.z3_family:
        blocks.append(BasisBlock(
            "Q3", tuple(tuple(v) for _, v in sorted(cert.z3_family.items())),
            Ansatz.from_grid(q3_grid(n, params=SYMBOLIC))))
    return BasisSpec(tuple(blocks))


@dataclass(frozen=True)
class Constraint:
    """One affine equation over Gram entries (block, row, col), row <= col."""

    name: str
    lhs: Tuple[Tuple[Tuple[int, int, int], Fraction], ...]
    rhs: Fraction


@dataclass(frozen=True)
class SdpProblem:
    m: int
    r: int
    n: int
    diagonal_a: bool
    blocks: Tuple[Tuple[str, int], ...]
    constraints: Tuple[Constraint, ...]
    basis_hash: str

    def match_constraints(self) -> List[Constraint]:
        return [c for c in self.constraints if c.name.startswith("match:")]

    def variable_count(self) -> int:
        return sum(d * (d + 1) // 2 for _, d in self.blocks)


def build_sdp(p: TraceProblem, basis: BasisSpec,
              budget: Optional[int] = None,
              entry_sum_constraint: bool = False) -> SdpProblem:
    """Coefficient-matching feasibility problem over the given basis.

    One match constraint per monomial spanned by the target or by any
    basis product (products outside the target are constrained to zero,
    otherwise a solver could park weight on impossible cells).  Ansatz
    data becomes explicit fix/tie constraints.
    """
    target = trace_coeff_necklace(p, budget=budget)
    rows: Dict[Monomial, Dict[Tuple[int, int, int], Fraction]] = {
        m: {} for m in target.terms
    }
    for b_idx, block in enumerate(basis.blocks):
        for vec in block.vectors:
            d = len(vec)
            for u in range(d):
                for v in range(u, d):
                    mult = Fraction(1 if u == v else 2)
                    prod = vec[u] * vec[v]
                    for mono, c in prod.terms.items():
                        row = rows.setdefault(mono, {})
                        key = (b_idx, u, v)
                        row[key] = row.get(key, Fraction(0)) + mult * c
    constraints = []
    for mono in sorted(rows):
        lhs = tuple(sorted(rows[mono].items()))
        rhs = Fraction(target.terms.get(mono, 0))
        constraints.append(Constraint(f"match:{mono_str(mono)}", lhs, rhs))
    for b_idx, block in enumerate(basis.blocks):
        if not block.ansatz:
            continue
        for (u, v), value in block.ansatz.fixed:
            constraints.append(Constraint(
                f"fix:{block.label}:{u},{v}",
                (((b_idx, u, v), Fraction(1)),), Fraction(value)))
        by_class: Dict[str, List[Tuple[int, int]]] = {}
        for (u, v), cls in block.ansatz.classes:
            by_class.setdefault(cls, []).append((u, v))
        for cls in sorted(by_class):
            members = sorted(by_class[cls])
            head = members[0]
            for idx, other in enumerate(members[1:]):
                constraints.append(Constraint(
                    f"tie:{block.label}:{cls}:{idx}",
                    (((b_idx, *head), Fraction(1)),
                     ((b_idx, *other), Fraction(-1))), Fraction(0)))
    if entry_sum_constraint:
        lhs: Dict[Tuple[int, int, int], Fraction] = {}
        for b_idx, block in enumerate(basis.blocks):
            copies = len(block.vectors)
            d = block.dim
            for u in range(d):
                for v in range(u, d):
                    lhs[(b_idx, u, v)] = Fraction(copies * (1 if u == v else 2))
        constraints.append(Constraint(
            "entrysum", tuple(sorted(lhs.items())),
            Fraction(comb(p.m, p.r) * p.n**p.m)))
    return SdpProblem(
        m=p.m, r=p.r, n=p.n, diagonal_a=p.diagonal_a,
        blocks=tuple((b.label, b.dim) for b in basis.blocks),
        constraints=tuple(constraints), basis_hash=basis.content_hash())


def _num_str(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    # documented precision for non-integers: 17 significant digits
    return repr(float(x))


def export_sdpa(prob: SdpProblem, path: str) -> None:
    """Write the problem in sparse SDPA format (constraint k as F_k with
    tr(F_k X) = c_k, X block-diagonal PSD).  Metadata and constraint
    names travel in leading comment lines so a read-back is lossless."""
    lines = ["* tracesos coefficient-matching SDP"]
    lines.append(f"* meta m={prob.m} r={prob.r} n={prob.n} "
                 f"diagonal_a={int(prob.diagonal_a)} basis_hash={prob.basis_hash}")
    for label, dim in prob.blocks:
        lines.append(f"* block {label} {dim}")
    for idx, con in enumerate(prob.constraints, start=1):
        lines.append(f"* con {idx} {con.name}")
    lines.append(str(len(prob.constraints)))
    lines.append(str(len(prob.blocks)))
    lines.append(" ".join(str(dim) for _, dim in prob.blocks))
    lines.append(" ".join(_num_str(c.rhs) for c in prob.constraints))
    for idx, con in enumerate(prob.constraints, start=1):
        for (b, u, v), coeff in con.lhs:
            lines.append(f"{idx} {b + 1} {u + 1} {v + 1} {_num_str(coeff)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def import_sdpa(path: str) -> SdpProblem:
    """Read back a problem written by :func:`export_sdpa`."""
    meta: Dict[str, str] = {}
    block_labels: List[str] = []
    con_names: Dict[int, str] = {}
    body: List[str] = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith(("*", '"')):
                parts = line[1:].split()
                if parts[:1] == ["meta"]:
                    meta = dict(kv.split("=", 1) for kv in parts[1:])
                elif parts[:1] == ["block"]:
                    block_labels.append(parts[1])
                elif parts[:1] == ["con"]:
                    con_names[int(parts[1])] = " ".join(parts[2:])
            elif line.strip():
                body.append(line.strip())
    n_con = int(body[0])
    n_block = int(body[1])
    dims = [int(t) for t in body[2].split()]
    if len(dims) != n_block:
        raise ValueError("block count mismatch")
    rhs_vals = [Fraction(t) for t in body[3].split()]
    if len(rhs_vals) != n_con:
        raise ValueError("rhs count mismatch")
    lhs_map: Dict[int, Dict[Tuple[int, int, int], Fraction]] = {
        k: {} for k in range(1, n_con + 1)}
    for line in body[4:]:
        k_s, b_s, i_s, j_s, v_s = line.split()
        k = int(k_s)
        key = (int(b_s) - 1, int(i_s) - 1, int(j_s) - 1)
        lhs_map[k][key] = lhs_map[k].get(key, Fraction(0)) + Fraction(v_s)
    constraints = []
    for k in range(1, n_con + 1):
        constraints.append(Constraint(
            con_names.get(k, f"con{k}"),
            tuple(sorted(lhs_map[k].items())), rhs_vals[k - 1]))
    labels = block_labels or [f"B{i}" for i in range(n_block)]
    return SdpProblem(
        m=int(meta.get("m", 0)), r=int(meta.get("r", 0)),
        n=int(meta.get("n", 0)),
        diagonal_a=bool(int(meta.get("diagonal_a", 0))),
        blocks=tuple(zip(labels, dims)),
        constraints=tuple(constraints),
        basis_hash=meta.get("basis_hash", ""))


def evaluate_constraint(con: Constraint,
                        blocks: Sequence[RationalMatrix]) -> Fraction:
    total = Fraction(0)
    for (b, u, v), coeff in con.lhs:
        total += coeff * blocks[b][u][v]
    return total


@dataclass
class SolutionReport:
    """Outcome of exact re-verification of a candidate solution."""

    accepted: bool
    blocks: Dict[str, RationalMatrix] = field(default_factory=dict)
    psd_certs: Dict[str, PsdCertificate] = field(default_factory=dict)
    violations: List[Tuple[str, Fraction, Fraction]] = field(default_factory=list)
    reason: str = ""


def rationalize_and_verify(prob: SdpProblem,
                           approx: Mapping[str, Sequence[Sequence]],
                           denominator_bound: int = 10**4) -> SolutionReport:
    """Round approximate block matrices to rationals and verify exactly.

    Each entry is rounded to the nearest rational with denominator at
    most the bound (continued-fraction convergents); the rounded point is
    accepted only if every constraint holds exactly and every block has
    an exact PSD certificate.
    """
    labels = [label for label, _ in prob.blocks]
    missing = [l for l in labels if l not in approx]
    if missing:
        raise RationalizationFailed(f"missing blocks {missing}")
    blocks: List[RationalMatrix] = []
    for label, dim in prob.blocks:
        raw = approx[label]
        if len(raw) != dim or any(len(row) != dim for row in raw):
            raise RationalizationFailed(
                f"block {label} has wrong shape, expected {dim}x{dim}")
        rows = []
        for i in range(dim):
            row = []
            for j in range(dim):
                x = raw[i][j] if j >= i else raw[j][i]
                try:
                    f = Fraction(x) if not isinstance(x, float) \
                        else Fraction(x).limit_denominator(denominator_bound)
                except (ValueError, OverflowError) as exc:
                    raise RationalizationFailed(
                        f"block {label} entry ({i},{j}): {exc}") from exc
                row.append(f)
            rows.append(row)
        blocks.append(RationalMatrix(rows))
    report = SolutionReport(accepted=False,
                            blocks=dict(zip(labels, blocks)))
    for con in prob.constraints:
        got = evaluate_constraint(con, blocks)
        if got != con.rhs:
            report.violations.append((con.name, got, con.rhs))
    if report.violations:
        report.reason = (f"{len(report.violations)} violated constraints, "
                         f"first: {report.violations[0][0]}")
        return report
    for label, mat in zip(labels, blocks):
        cert = verify_charpoly_signs(mat)
        report.psd_certs[label] = cert
        if not cert.psd:
            report.reason = f"block {label} is not PSD"
            return report
    report.accepted = True
    return report


def reduce_to_parameters(prob: SdpProblem,
                         basis: BasisSpec) -> Tuple[ParamSystem, int]:
    """Restate the matching constraints over the basis' parameter classes.

    Returns the resulting system plus the number of parameter-free
    matching constraints that were checked as exact constant identities.
    Raises InconsistentSystem when a constant identity fails or a free
    Gram entry survives (the ansatz then under-determines the problem).
    """
    if prob.basis_hash != basis.content_hash():
        raise ValueError("problem was built from a different basis")
    fixed: Dict[Tuple[int, int, int], Fraction] = {}
    rep_class: Dict[Tuple[int, int, int], str] = {}
    for b_idx, block in enumerate(basis.blocks):
        if not block.ansatz:
            continue
        for (u, v), value in block.ansatz.fixed:
            fixed[(b_idx, u, v)] = Fraction(value)
        for (u, v), cls in block.ansatz.classes:
            rep_class[(b_idx, u, v)] = cls
    equations = []
    checked = 0
    for con in prob.match_constraints():
        const = Fraction(0)
        coeffs: Dict[int, Fraction] = {}
        for key, coeff in con.lhs:
            if key in fixed:
                const += coeff * fixed[key]
            elif key in rep_class:
                k = int(rep_class[key].lstrip("x"))
                coeffs[k] = coeffs.get(k, Fraction(0)) + coeff
            else:
                raise InconsistentSystem(
                    f"free Gram entry {key} in {con.name}")
        coeffs = {k: c for k, c in coeffs.items() if c != 0}
        if not coeffs:
            if const != con.rhs:
                raise InconsistentSystem(
                    f"constant identity fails in {con.name}: "
                    f"{const} != {con.rhs}")
            checked += 1
        else:
            equations.append(canonical_equation(coeffs, con.rhs - const))
    return ParamSystem.from_equations(equations), checked
