"""Linear constraints over nonnegative annotation unknowns and an exact
rational simplex solver with Farkas certificates."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

Number = Union[int, Fraction]
RELATIONS = ("=", "<=", ">=")


@dataclass(frozen=True)
class AnnotVar:
    id: int
    origin: str = field(compare=False, default="")

    @property
    def name(self) -> str:
        return f"a{self.id}"

    def __str__(self):
        return self.name


class LinExpr:
    """constant + sum of coefficient * unknown, no zero coefficients stored."""

    __slots__ = ("const", "terms")

    def __init__(self, const: Number = 0, terms: Optional[Mapping[AnnotVar, Number]] = None):
        self.const = Fraction(const)
        self.terms: Dict[AnnotVar, Fraction] = {}
        for v, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                self.terms[v] = c

    @staticmethod
    def var(v: AnnotVar) -> "LinExpr":
        return LinExpr(0, {v: 1})

    @staticmethod
    def lift(x: "LinExpr | Number | AnnotVar") -> "LinExpr":
        if isinstance(x, LinExpr):
            return x
        if isinstance(x, AnnotVar):
            return LinExpr.var(x)
        return LinExpr(x)

    def is_const(self) -> bool:
        return not self.terms

    def __add__(self, other) -> "LinExpr":
        other = LinExpr.lift(other)
        out = LinExpr(self.const + other.const, self.terms)
        for v, c in other.terms.items():
            s = out.terms.get(v, 0) + c
            if s:
                out.terms[v] = s
            else:
                out.terms.pop(v, None)
        return out

    __radd__ = __add__

    def __neg__(self) -> "LinExpr":
        return LinExpr(-self.const, {v: -c for v, c in self.terms.items()})

    def __sub__(self, other) -> "LinExpr":
        return self + (-LinExpr.lift(other))

    def __rsub__(self, other) -> "LinExpr":
        return LinExpr.lift(other) - self

    def __mul__(self, k: Number) -> "LinExpr":
        k = Fraction(k)
        return LinExpr(self.const * k, {v: c * k for v, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        other = LinExpr.lift(other)
        return self.const == other.const and self.terms == other.terms

    def __hash__(self):
        return hash((self.const, frozenset(self.terms.items())))

    def value(self, assignment: Mapping[AnnotVar, Fraction]) -> Fraction:
        return self.const + sum((c * assignment.get(v, Fraction(0)) for v, c in self.terms.items()), Fraction(0))

    def __str__(self):
        parts = []
        for v, c in sorted(self.terms.items(), key=lambda p: p[0].id):
            if c == 1:
                parts.append(f"+ {v}")
            elif c == -1:
                parts.append(f"- {v}")
            elif c < 0:
                parts.append(f"- {-c}*{v}")
            else:
                parts.append(f"+ {c}*{v}")
        if self.const or not parts:
            parts.append(f"+ {self.const}" if self.const >= 0 else f"- {-self.const}")
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    def __repr__(self):
        return f"LinExpr({self})"


def lin_sum(xs: Iterable) -> LinExpr:
    out = LinExpr()
    for x in xs:
        out = out + x
    return out


@dataclass(frozen=True)
class Constraint:
    lhs: LinExpr
    rel: str
    rhs: LinExpr
    provenance: str = ""

    def holds(self, assignment: Mapping[AnnotVar, Fraction]) -> bool:
        a, b = self.lhs.value(assignment), self.rhs.value(assignment)
        return a == b if self.rel == "=" else (a <= b if self.rel == "<=" else a >= b)

    def normal(self) -> Tuple[Dict[AnnotVar, Fraction], Fraction]:
        """(coefficients, bound) with sum coeff*x  rel  bound."""
        d = self.lhs - self.rhs
        return d.terms, -d.const

    def __str__(self):
        tail = f"  # {self.provenance}" if self.provenance else ""
        return f"{self.lhs} {self.rel} {self.rhs}{tail}"


class ConstraintSystem:
    """Registered unknowns (all implicitly >= 0) and constraints over them."""

    def __init__(self):
        self.variables: List[AnnotVar] = []
        self.constraints: List[Constraint] = []
        self._sealed = False

    def fresh(self, origin: str) -> AnnotVar:
        if self._sealed:
            raise RuntimeError("system is sealed")
        v = AnnotVar(len(self.variables), origin)
        self.variables.append(v)
        return v

    def fresh_vec(self, n: int, origin: str) -> Tuple[LinExpr, ...]:
        return tuple(LinExpr.var(self.fresh(f"{origin}[{j}]")) for j in range(1, n + 1))

    def add(self, lhs, rel: str, rhs, provenance: str = "") -> Optional[Constraint]:
        if self._sealed:
            raise RuntimeError("system is sealed")
        if rel not in RELATIONS:
            raise ValueError(f"unknown relation {rel!r}")
        c = Constraint(LinExpr.lift(lhs), rel, LinExpr.lift(rhs), provenance)
        known = set(self.variables)
        for v in (*c.lhs.terms, *c.rhs.terms):
            if v not in known:
                raise ValueError(f"unregistered unknown {v}")
        self.constraints.append(c)
        return c

    def eq(self, lhs, rhs, provenance=""):
        return self.add(lhs, "=", rhs, provenance)

    def le(self, lhs, rhs, provenance=""):
        return self.add(lhs, "<=", rhs, provenance)

    def ge(self, lhs, rhs, provenance=""):
        return self.add(lhs, ">=", rhs, provenance)

    def extend(self, other: "ConstraintSystem") -> Dict[AnnotVar, AnnotVar]:
        """Copy ``other`` in with renumbered unknowns; returns the renaming."""
        ren = {v: self.fresh(v.origin) for v in other.variables}

        def rn(e: LinExpr) -> LinExpr:
            return LinExpr(e.const, {ren[v]: c for v, c in e.terms.items()})

        for c in other.constraints:
            self.add(rn(c.lhs), c.rel, rn(c.rhs), c.provenance)
        return ren

    def seal(self) -> "ConstraintSystem":
        self._sealed = True
        return self

    def dump(self) -> str:
        return "\n".join(str(c) for c in self.constraints) + ("\n" if self.constraints else "")

    def __len__(self):
        return len(self.constraints)


# -- solutions -------------------------------------------------------------------


@dataclass
class Certificate:
    """Farkas multipliers, one per constraint of the system (same order)."""

    multipliers: List[Fraction]

    def support(self, sys: ConstraintSystem) -> List[Tuple[Fraction, Constraint]]:
        return [(m, c) for m, c in zip(self.multipliers, sys.constraints) if m]


@dataclass
class Solution:
    status: str  # "optimal", "infeasible" or "unbounded"
    assignment: Dict[AnnotVar, Fraction] = field(default_factory=dict)
    objective: Optional[Fraction] = None
    certificate: Optional[Certificate] = None
    pivots: int = 0

    @property
    def feasible(self) -> bool:
        return self.status != "infeasible"

    def __getitem__(self, v) -> Fraction:
        if isinstance(v, LinExpr):
            return v.value(self.assignment)
        return self.assignment.get(v, Fraction(0))


def validate(sys: ConstraintSystem, assignment: Mapping[AnnotVar, Fraction]) -> bool:
    """Exact re-evaluation of every constraint plus nonnegativity."""
    if any(Fraction(assignment.get(v, 0)) < 0 for v in sys.variables):
        return False
    return all(c.holds(assignment) for c in sys.constraints)


def violated(sys: ConstraintSystem, assignment: Mapping[AnnotVar, Fraction]) -> List[Constraint]:
    return [c for c in sys.constraints if not c.holds(assignment)]


def verify_certificate(sys: ConstraintSystem, cert: Certificate) -> bool:
    """Check sum_i mu_i (a_i x - b_i) <= 0 is implied for all feasible x, while
    the combination has nonnegative coefficients and a negative constant,
    i.e. it is positive for every x >= 0."""
    if len(cert.multipliers) != len(sys.constraints):
        return False
    coeff: Dict[AnnotVar, Fraction] = {}
    bound = Fraction(0)
    for mu, c in zip(cert.multipliers, sys.constraints):
        mu = Fraction(mu)
        if (c.rel == "<=" and mu < 0) or (c.rel == ">=" and mu > 0):
            return False
        terms, b = c.normal()
        for v, a in terms.items():
            coeff[v] = coeff.get(v, Fraction(0)) + mu * a
        bound += mu * b
    return all(a >= 0 for a in coeff.values()) and bound < 0


class _Tableau:
    """Sparse tableau: basic variable of each row, rows as dicts col -> coeff."""

    def __init__(self, rows: List[Dict[int, Fraction]], rhs: List[Fraction], basis: List[int]):
        self.rows, self.rhs, self.basis = rows, rhs, basis
        self.pivots = 0

    def pivot(self, r: int, col: int, obj: Dict[int, Fraction], obj_val: List[Fraction]):
        row = self.rows[r]
        piv = row[col]
        if piv != 1:
            inv = 1 / piv
            for k in row:
                row[k] *= inv
            self.rhs[r] *= inv
        b = self.rhs[r]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other.get(col)
            if f:
                _axpy(other, -f, row)
                self.rhs[i] -= f * b
        f = obj.get(col)
        if f:
            _axpy(obj, -f, row)
            obj_val[0] -= f * b
        self.basis[r] = col
        self.pivots += 1

    def run(self, obj: Dict[int, Fraction], obj_val: List[Fraction], allowed) -> str:
        """Minimise with reduced costs ``obj``; Bland's rule."""
        while True:
            col = min((k for k, d in obj.items() if d < 0 and allowed(k)), default=None)
            if col is None:
                return "optimal"
            best, r = None, None
            for i, row in enumerate(self.rows):
                a = row.get(col)
                if a is not None and a > 0:
                    ratio = self.rhs[i] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[r]):
                        best, r = ratio, i
            if r is None:
                return "unbounded"
            self.pivot(r, col, obj, obj_val)


def _axpy(y: Dict[int, Fraction], a: Fraction, x: Dict[int, Fraction]):
    for k, v in x.items():
        s = y.get(k, 0) + a * v
        if s:
            y[k] = s
        else:
            y.pop(k, None)


def _solve(sys: ConstraintSystem, objective: Optional[LinExpr]) -> Solution:
    nv = len(sys.variables)
    index = {v: i for i, v in enumerate(sys.variables)}
    rows: List[Dict[int, Fraction]] = []
    rhs: List[Fraction] = []
    signs: List[int] = []
    ncol = nv
    for c in sys.constraints:
        terms, b = c.normal()
        row = {index[v]: a for v, a in terms.items()}
        if c.rel != "=":
            row[ncol] = Fraction(1 if c.rel == "<=" else -1)
            ncol += 1
        s = -1 if b < 0 else 1
        if s < 0:
            row = {k: -a for k, a in row.items()}
            b = -b
        rows.append(row)
        rhs.append(b)
        signs.append(s)
    art0 = ncol
    basis = []
    for i, row in enumerate(rows):
        row[art0 + i] = Fraction(1)
        basis.append(art0 + i)
    tab = _Tableau(rows, rhs, basis)
    # phase 1: minimise the sum of artificials
    obj: Dict[int, Fraction] = {art0 + i: Fraction(1) for i in range(len(rows))}
    obj_val = [Fraction(0)]
    for i, row in enumerate(rows):
        _axpy(obj, Fraction(-1), row)
        obj_val[0] -= rhs[i]
    tab.run(obj, obj_val, lambda k: True)
    infeas = -obj_val[0]
    if infeas > 0:
        y = [1 - obj.get(art0 + i, Fraction(0)) for i in range(len(rows))]
        mult = [-signs[i] * y[i] for i in range(len(rows))]
        return Solution("infeasible", certificate=Certificate(mult), pivots=tab.pivots)
    # drive remaining artificials out of the basis, dropping redundant rows
    keep = []
    for i in range(len(tab.rows)):
        if tab.basis[i] >= art0:
            col = min((k for k, a in tab.rows[i].items() if k < art0 and a), default=None)
            if col is None:
                continue
            tab.pivot(i, col, {}, [Fraction(0)])
        keep.append(i)
    tab.rows = [{k: a for k, a in tab.rows[i].items() if k < art0} for i in keep]
    tab.rhs = [tab.rhs[i] for i in keep]
    tab.basis = [tab.basis[i] for i in keep]
    status = "optimal"
    obj_val = [Fraction(0)]
    if objective is not None:
        obj = {index[v]: c for v, c in objective.terms.items()}
        for i, bcol in enumerate(tab.basis):
            f = obj.get(bcol)
            if f:
                _axpy(obj, -f, tab.rows[i])
                obj_val[0] -= f * tab.rhs[i]
        status = tab.run(obj, obj_val, lambda k: k < art0)
    values = [Fraction(0)] * nv
    for i, bcol in enumerate(tab.basis):
        if bcol < nv:
            values[bcol] = tab.rhs[i]
    assignment = {v: values[i] for i, v in enumerate(sys.variables)}
    val = None
    if objective is not None and status == "optimal":
        val = objective.value(assignment)
    return Solution(status, assignment, val, pivots=tab.pivots)


def solve_feasible(sys: ConstraintSystem) -> Solution:
    return _solve(sys, None)


def solve_minimize(sys: ConstraintSystem, objective) -> Solution:
    return _solve(sys, LinExpr.lift(objective))


def explain(sys: ConstraintSystem, sol: Solution, limit: int = 12) -> List[str]:
    """Provenance of the constraints supporting an infeasibility certificate."""
    if sol.certificate is None:
        return []
    out = []
    for mu, c in sol.certificate.support(sys)[:limit]:
        out.append(f"{mu} x ({c})")
    return out
