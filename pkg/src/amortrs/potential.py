"""Potentials of values, ground terms and substitutions, with the sharing,
subtyping and polynomial-bound checks used as oracles."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from .annot import (
    AnnotatedDecl,
    AnnotatedSignature,
    AnnotatedType,
    AnnotationError,
    ResourceVec,
    instantiate_ctor,
    vec_add,
    vec_leq,
)
from .terms import App, Enumerator, Var, is_value


class PotentialError(Exception):
    pass


def select_decl(asig: AnnotatedSignature, f: str, annot: ResourceVec, exact: bool = True) -> AnnotatedDecl:
    """Declaration of defined ``f`` with result ``annot``.

    With ``exact=False`` a missing exact match falls back to the least
    declaration whose result dominates ``annot`` (supertyping), ties broken
    by the order of declaration.
    """
    decls = asig.decls(f)
    for d in decls:
        if d.result.annot == annot:
            return d
    if not exact:
        above = [d for d in decls if vec_leq(annot, d.result.annot)]
        minimal = [d for d in above if not any(e is not d and vec_leq(e.result.annot, d.result.annot) for e in above)]
        if minimal:
            return minimal[0]
    raise PotentialError(f"no declaration of {f} with result annotation {annot}")


def decl_at(asig: AnnotatedSignature, sym: str, annot: ResourceVec, exact: bool = True) -> AnnotatedDecl:
    if sym in asig.schemes:
        try:
            return instantiate_ctor(asig.schemes[sym], annot)
        except AnnotationError as e:
            raise PotentialError(str(e)) from None
    return select_decl(asig, sym, annot, exact)


def phi_value(v: App, at: AnnotatedType, asig: AnnotatedSignature) -> Fraction:
    """Phi(v : at) = p + sum of argument potentials."""
    if not at.annot:
        return Fraction(0)
    memo: Dict[Tuple[App, AnnotatedType], Fraction] = {}

    def go(u, a: AnnotatedType) -> Fraction:
        if not a.annot:
            return Fraction(0)
        key = (u, a)
        if key in memo:
            return memo[key]
        if isinstance(u, Var) or u.sym not in asig.schemes:
            raise PotentialError(f"{u} is not a value")
        d = asig.simple.constructors[u.sym]
        if d.result != a.base:
            raise PotentialError(f"{u} has type {d.result}, not {a.base}")
        decl = decl_at(asig, u.sym, a.annot)
        out = decl.cost + sum((go(x, b) for x, b in zip(u.args, decl.args)), Fraction(0))
        memo[key] = out
        return out

    return go(v, at)


def phi_ground(t: App, at: AnnotatedType, asig: AnnotatedSignature, exact: bool = True) -> Fraction:
    """Ground-term potential: root cost plus argument potentials at the
    declared argument types (single cost component)."""
    if isinstance(t, Var):
        raise PotentialError(f"{t} is not ground")
    if t.sym in asig.schemes:
        d = asig.simple.constructors[t.sym]
    else:
        d = asig.simple.defined.get(t.sym)
        if d is None:
            raise PotentialError(f"unknown symbol {t.sym}")
    if d.result != at.base:
        raise PotentialError(f"{t} has type {d.result}, not {at.base}")
    if t.sym in asig.schemes and not at.annot and is_value(t, asig.simple):
        return Fraction(0)
    decl = decl_at(asig, t.sym, at.annot, exact)
    return decl.cost + sum((phi_ground(a, b, asig, exact) for a, b in zip(t.args, decl.args)), Fraction(0))


def phi_subst(sigma: Mapping[str, App], ctx: Mapping[str, AnnotatedType], asig: AnnotatedSignature) -> Fraction:
    total = Fraction(0)
    for x, at in ctx.items():
        if x not in sigma:
            raise PotentialError(f"substitution does not bind {x}")
        total += phi_value(sigma[x], at, asig)
    return total


def check_sharing(v: App, p: ResourceVec, p1: ResourceVec, p2: ResourceVec, base: str, asig: AnnotatedSignature) -> bool:
    if vec_add(p1, p2) != p:
        raise ValueError(f"{p1} + {p2} != {p}")
    phi = lambda q: phi_value(v, AnnotatedType(base, q), asig)  # noqa: E731
    return phi(p) == phi(p1) + phi(p2)


def check_subtyping(v: App, p: ResourceVec, q: ResourceVec, base: str, asig: AnnotatedSignature) -> bool:
    """p >= q implies Phi(v:A^p) >= Phi(v:A^q)."""
    if not vec_leq(q, p):
        raise ValueError(f"{p} does not dominate {q}")
    return phi_value(v, AnnotatedType(base, p), asig) >= phi_value(v, AnnotatedType(base, q), asig)


# -- polynomial bound criterion ---------------------------------------------------


@dataclass
class PremiseFailure:
    base: str
    annot: ResourceVec
    symbol: str
    reason: str

    def __str__(self):
        return f"{self.symbol} at {self.base}{self.annot}: {self.reason}"


@dataclass
class PolytReport:
    base: str
    w: ResourceVec
    size_bound: int
    obligations: List[Tuple[str, ResourceVec]] = field(default_factory=list)
    premise_failures: List[PremiseFailure] = field(default_factory=list)
    truncated: bool = False
    checked: int = 0
    violations: List[Tuple[App, Fraction, Fraction]] = field(default_factory=list)

    @property
    def premise_ok(self) -> bool:
        return not self.premise_failures and not self.truncated

    @property
    def ok(self) -> bool:
        return self.premise_ok and not self.violations

    @property
    def r(self) -> Fraction:
        return self.w.max()

    @property
    def k(self) -> int:
        return len(self.w)

    def lines(self) -> List[str]:
        head = f"polynomial bound at {self.base}{self.w}: r = {self.r}, k = {self.k}"
        out = [head]
        out.append(f"  premise ({len(self.obligations)} obligations): " + ("holds" if self.premise_ok else "FAILS"))
        for f in self.premise_failures[:10]:
            out.append(f"    {f}")
        if self.truncated:
            out.append("    obligation closure exceeded its cap")
        verdict = "pass" if not self.violations else f"FAIL ({len(self.violations)} violations)"
        out.append(f"  Phi(v) <= {self.r}*|v|^{self.k} for {self.checked} values of size <= {self.size_bound}: {verdict}")
        for v, phi, bound in self.violations[:5]:
            out.append(f"    {v}: {phi} > {bound}")
        return out


def _sub0(u: ResourceVec, w: ResourceVec) -> ResourceVec:
    n = max(len(u), len(w))
    return ResourceVec(max(u[i] - w[i], 0) for i in range(n))


def _min(u: ResourceVec, w: ResourceVec) -> ResourceVec:
    n = max(len(u), len(w))
    return ResourceVec(min(u[i], w[i]) for i in range(n))


def check_polyt(asig: AnnotatedSignature, w: ResourceVec, base: str, size_bound: int, cap: int = 500) -> PolytReport:
    """Premise of the polynomial-bound criterion plus an exhaustive check of
    Phi(v : base^w) <= max(w) * |v|^|w| on values of size <= size_bound.

    The witness r_i = max(u_i - w, 0) is the least one, so the existential
    is decided exactly.  Argument annotations u_i split as min(u_i, w) + r_i;
    both parts become obligations of their own, which keeps every instance
    within the declared scheme degrees.
    """
    rep = PolytReport(base, w, size_bound)
    seen = set()
    todo = [(base, w)]
    while todo:
        typ, a = todo.pop()
        if (typ, a) in seen or not a:
            continue
        if len(seen) >= cap:
            rep.truncated = True
            break
        seen.add((typ, a))
        rep.obligations.append((typ, a))
        k, r = len(a), a.max()
        for c in asig.simple.constructors_of(typ):
            try:
                decl = instantiate_ctor(asig.schemes[c], a)
            except AnnotationError as e:
                rep.premise_failures.append(PremiseFailure(typ, a, c, str(e)))
                continue
            if decl.cost > r:
                rep.premise_failures.append(PremiseFailure(typ, a, c, f"cost {decl.cost} > max w = {r}"))
            for i, arg in enumerate(decl.args, 1):
                ri = _sub0(arg.annot, a)
                if len(ri) >= k:
                    rep.premise_failures.append(
                        PremiseFailure(typ, a, c, f"argument {i}: witness {ri} needs length < {k}")
                    )
                if ri.max() > r:
                    rep.premise_failures.append(
                        PremiseFailure(typ, a, c, f"argument {i}: max witness {ri.max()} > {r}")
                    )
                todo.append((arg.base, _min(arg.annot, a)))
                todo.append((arg.base, ri))
    at = AnnotatedType(base, w)
    r, k = w.max(), len(w)
    for v in Enumerator(asig.simple).values(base, size_bound):
        rep.checked += 1
        phi = phi_value(v, at, asig)
        bound = r * v._size**k
        if phi > bound:
            rep.violations.append((v, phi, bound))
    return rep


def list_potential_closed_form(length: int, p: ResourceVec) -> Fraction:
    """sum_i p_i * C(length, i)."""
    from math import comb

    return sum((e * comb(length, i) for i, e in enumerate(p, 1)), Fraction(0))
