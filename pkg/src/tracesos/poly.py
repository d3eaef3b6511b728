"""Exact sparse polynomials in the entries of two symmetric matrices.

Variables are the entries a[i,j] and b[i,j] of two n-by-n symmetric
matrices, stored with canonical index order i <= j so that a[2,1] and
a[1,2] denote the same variable.  Coefficients are exact rationals or
affine forms ``const + sum_k c_k*x_k`` in tuning parameters x1, x2, ...
(degree > 1 in the parameters is a construction error, not a feature).

A polynomial maps monomials to nonzero coefficients; the zero polynomial
has an empty term map.  Monomials are sorted tuples of ((kind, i, j),
exponent) pairs, so equality and hashing are structural and the
serialization order is reproducible.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple, Union

Var = Tuple[str, int, int]
Monomial = Tuple[Tuple[Var, int], ...]
Scalar = Union[int, Fraction]

MONO_ONE: Monomial = ()


class ParameterDegreeOverflow(ValueError):
    """A product would create a degree-2 term in the x-parameters."""


class UnboundParameter(ValueError):
    """A scalar was requested while x-parameters are still unresolved."""


def var(kind: str, i: int, j: int) -> Var:
    """Return the canonical variable for entry (i, j) of matrix A or B."""
    if kind not in ("a", "b"):
        raise ValueError(f"variable kind must be 'a' or 'b', got {kind!r}")
    if i < 1 or j < 1:
        raise ValueError(f"matrix indices must be >= 1, got ({i}, {j})")
    if i > j:
        i, j = j, i
    return (kind, i, j)


def var_str(v: Var) -> str:
    return f"{v[0]}[{v[1]},{v[2]}]"


def mono_from_vars(vs: Iterable[Var]) -> Monomial:
    """Monomial that is the product of the given variables (with repeats)."""
    counts: Dict[Var, int] = {}
    for v in vs:
        counts[v] = counts.get(v, 0) + 1
    return tuple(sorted(counts.items()))


def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    counts = dict(m1)
    for v, e in m2:
        counts[v] = counts.get(v, 0) + e
    return tuple(sorted(counts.items()))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_kind_degree(m: Monomial, kind: str) -> int:
    return sum(e for v, e in m if v[0] == kind)


def mono_str(m: Monomial) -> str:
    if not m:
        return "1"
    parts = []
    for v, e in m:
        parts.append(var_str(v) if e == 1 else f"{var_str(v)}^{e}")
    return "*".join(parts)


def parse_monomial(text: str) -> Monomial:
    """Parse the canonical text form, e.g. ``a[1,2]^2*b[1,1]``."""
    text = text.strip()
    if text == "1":
        return MONO_ONE
    vs = []
    for factor in text.split("*"):
        factor = factor.strip()
        if "^" in factor:
            head, _, exp_s = factor.partition("^")
            exp = int(exp_s)
        else:
            head, exp = factor, 1
        if len(head) < 6 or head[1] != "[" or head[-1] != "]":
            raise ValueError(f"bad monomial factor {factor!r}")
        kind = head[0]
        i_s, _, j_s = head[2:-1].partition(",")
        v = var(kind, int(i_s), int(j_s))
        if exp < 1:
            raise ValueError(f"bad exponent in {factor!r}")
        vs.extend([v] * exp)
    return mono_from_vars(vs)


class Affine:
    """Affine form const + sum c_k*x_k; always carries at least one x-term.

    Purely numeric values are represented by plain int/Fraction, never by
    an Affine with empty linear part (see :func:`affine`).
    """

    __slots__ = ("const", "linear")

    def __init__(self, const, linear: Mapping[int, Fraction]):
        self.const = Fraction(const)
        self.linear = {k: Fraction(c) for k, c in linear.items() if c != 0}

    def is_zero(self) -> bool:
        return self.const == 0 and not self.linear

    def __eq__(self, other):
        if isinstance(other, Affine):
            return self.const == other.const and self.linear == other.linear
        if isinstance(other, (int, Fraction)):
            return not self.linear and self.const == other
        return NotImplemented

    def __hash__(self):
        return hash((self.const, tuple(sorted(self.linear.items()))))

    def __add__(self, other):
        if isinstance(other, Affine):
            lin = dict(self.linear)
            for k, c in other.linear.items():
                lin[k] = lin.get(k, Fraction(0)) + c
            return affine(self.const + other.const, lin)
        if isinstance(other, (int, Fraction)):
            return affine(self.const + other, self.linear)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Affine(-self.const, {k: -c for k, c in self.linear.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Affine):
            raise ParameterDegreeOverflow(
                "product of two parameter-carrying coefficients"
            )
        if isinstance(other, (int, Fraction)):
            return affine(self.const * other,
                          {k: c * other for k, c in self.linear.items()})
        return NotImplemented

    __rmul__ = __mul__

    def subs(self, values: Mapping[int, Scalar]):
        total = self.const
        lin = {}
        for k, c in self.linear.items():
            if k in values:
                total += c * Fraction(values[k])
            else:
                lin[k] = c
        return affine(total, lin)

    def __str__(self):
        parts = [] if self.const == 0 else [str(self.const)]
        for k, c in sorted(self.linear.items()):
            if c == 1:
                parts.append(f"x{k}")
            else:
                parts.append(f"{c}*x{k}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"Affine({self})"


def affine(const, linear: Mapping[int, Fraction]):
    """Build an affine coefficient, collapsing to a scalar if x-free."""
    lin = {k: Fraction(c) for k, c in linear.items() if c != 0}
    if not lin:
        return Fraction(const)
    return Affine(const, lin)


def param(k: int) -> Affine:
    """The bare parameter x_k as a coefficient."""
    return Affine(0, {k: Fraction(1)})


Coeff = Union[int, Fraction, Affine]


def _coeff_is_zero(c: Coeff) -> bool:
    if isinstance(c, Affine):
        return c.is_zero()
    return c == 0


def coeff_str(c: Coeff) -> str:
    if isinstance(c, Affine):
        return str(c)
    return str(c)


def coeff_to_jsonable(c: Coeff):
    if isinstance(c, Affine):
        return {"const": str(c.const),
                "linear": {f"x{k}": str(v) for k, v in sorted(c.linear.items())}}
    return str(c)


def coeff_from_jsonable(obj) -> Coeff:
    if isinstance(obj, dict):
        lin = {int(k.lstrip("x")): Fraction(v) for k, v in obj["linear"].items()}
        return affine(Fraction(obj["const"]), lin)
    return Fraction(obj)


class Polynomial:
    """Immutable-by-convention sparse polynomial with exact coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Coeff] | None = None):
        if terms:
            self.terms = {m: c for m, c in terms.items() if not _coeff_is_zero(c)}
        else:
            self.terms = {}

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls()

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls({MONO_ONE: Fraction(c)})

    @classmethod
    def monomial(cls, m: Monomial, c: Coeff = 1) -> "Polynomial":
        return cls({m: c})

    @classmethod
    def variable(cls, v: Var) -> "Polynomial":
        return cls({((v, 1),): 1})

    @classmethod
    def from_raw(cls, terms: Dict[Monomial, Coeff]) -> "Polynomial":
        """Adopt a freshly built dict without copying (internal fast path)."""
        p = cls.__new__(cls)
        p.terms = {m: c for m, c in terms.items() if not _coeff_is_zero(c)}
        return p

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        raise TypeError("Polynomial is not hashable")

    def has_params(self) -> bool:
        return any(isinstance(c, Affine) for c in self.terms.values())

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return NotImplemented
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            if m in out:
                out[m] = out[m] + c
            else:
                out[m] = c
        return Polynomial.from_raw(out)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            if m in out:
                out[m] = out[m] - c
            else:
                out[m] = -c
        return Polynomial.from_raw(out)

    def __neg__(self) -> "Polynomial":
        return Polynomial.from_raw({m: -c for m, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        if self.has_params() and other.has_params():
            raise ParameterDegreeOverflow(
                "both factors carry x-parameters; products must stay affine"
            )
        out: Dict[Monomial, Coeff] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                c = c1 * c2
                if m in out:
                    out[m] = out[m] + c
                else:
                    out[m] = c
        return Polynomial.from_raw(out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, Affine)):
            return self.scale(other)
        return NotImplemented

    def scale(self, c: Coeff) -> "Polynomial":
        if _coeff_is_zero(c):
            return Polynomial.zero()
        return Polynomial.from_raw({m: c * cc for m, cc in self.terms.items()})

    def degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=0)

    def variables(self) -> set:
        vs = set()
        for m in self.terms:
            for v, _ in m:
                vs.add(v)
        return vs

    def substitute(self, assignment: Mapping[Var, Scalar]):
        """Evaluate variables at exact rationals.

        Returns an exact Fraction when the assignment covers every variable
        of the polynomial (raising UnboundParameter if x-parameters remain),
        and a reduced Polynomial otherwise.
        """
        assign = {var(*k) if isinstance(k, tuple) and len(k) == 3 else k: Fraction(v)
                  for k, v in assignment.items()}
        full = self.variables() <= set(assign)
        if full:
            total = Fraction(0)
            for m, c in self.terms.items():
                if isinstance(c, Affine):
                    raise UnboundParameter(
                        f"parameters {sorted(c.linear)} remain in scalar request"
                    )
                val = Fraction(c)
                for v, e in m:
                    val *= assign[v] ** e
                total += val
            return total
        out: Dict[Monomial, Coeff] = {}
        for m, c in self.terms.items():
            scalar = Fraction(1)
            rest = []
            for v, e in m:
                if v in assign:
                    scalar *= assign[v] ** e
                else:
                    rest.append((v, e))
            if scalar == 0:
                continue
            key = tuple(rest)
            cc = c * scalar
            if key in out:
                out[key] = out[key] + cc
            else:
                out[key] = cc
        return Polynomial.from_raw(out)

    def substitute_params(self, values: Mapping[int, Scalar]) -> "Polynomial":
        """Substitute numeric values for x-parameters in the coefficients."""
        out: Dict[Monomial, Coeff] = {}
        for m, c in self.terms.items():
            out[m] = c.subs(values) if isinstance(c, Affine) else c
        return Polynomial.from_raw(out)

    def coefficient(self, m: Monomial) -> Coeff:
        return self.terms.get(m, 0)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0])

    def text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            cs = coeff_str(c)
            if isinstance(c, Affine) or "/" in cs or "-" in cs[1:]:
                cs = f"({cs})"
            if m == MONO_ONE:
                parts.append(cs)
            elif cs == "1":
                parts.append(mono_str(m))
            else:
                parts.append(f"{cs}*{mono_str(m)}")
        return " + ".join(parts)

    def __repr__(self):
        return f"Polynomial({self.text()})"

    def to_jsonable(self):
        return [[mono_str(m), coeff_to_jsonable(c)] for m, c in self.sorted_terms()]

    @classmethod
    def from_jsonable(cls, obj) -> "Polynomial":
        return cls({parse_monomial(ms): coeff_from_jsonable(cs) for ms, cs in obj})


def poly_add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def substitute(p: Polynomial, assignment: Mapping[Var, Scalar]):
    return p.substitute(assignment)


def swap_ab(p: Polynomial) -> Polynomial:
    """Exchange the a- and b-variables throughout."""
    flip = {"a": "b", "b": "a"}
    out = {}
    for m, c in p.terms.items():
        m2 = tuple(sorted(((flip[k], i, j), e) for (k, i, j), e in m))
        out[m2] = c
    return Polynomial.from_raw(out)


def relabel(p: Polynomial, perm: Mapping[int, int]) -> Polynomial:
    """Apply a permutation of the index set [n] to every variable."""
    out: Dict[Monomial, Coeff] = {}
    for m, c in p.terms.items():
        vs = []
        for (k, i, j), e in m:
            vs.append((var(k, perm.get(i, i), perm.get(j, j)), e))
        key = tuple(sorted(_merge_exps(vs)))
        if key in out:
            out[key] = out[key] + c
        else:
            out[key] = c
    return Polynomial.from_raw(out)


def _merge_exps(pairs):
    counts: Dict[Var, int] = {}
    for v, e in pairs:
        counts[v] = counts.get(v, 0) + e
    return counts.items()


def quadratic_form(matrix, z: list) -> Polynomial:
    """Expand z^T M z for a symmetric coefficient grid M and vector z.

    ``matrix`` is any 2D-indexable of numeric/affine entries; ``z`` is a list
    of polynomials.  Off-diagonal entries are counted twice, which assumes
    M is symmetric (the builders only produce symmetric grids).
    """
    d = len(z)
    acc: Dict[Monomial, Coeff] = {}
    for u in range(d):
        row = matrix[u]
        zu = z[u]
        for v in range(u, d):
            q = row[v]
            if _coeff_is_zero(q):
                continue
            w = q if v == u else 2 * q
            prod = zu * z[v]
            for m, c in prod.terms.items():
                cc = w * c
                if m in acc:
                    acc[m] = acc[m] + cc
                else:
                    acc[m] = cc
    return Polynomial.from_raw(acc)
