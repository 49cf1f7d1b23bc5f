"""Typed affine interpretations read off an annotated signature.

Every declaration f : A1..An -> C with cost p gives the map
x1 + ... + xn + p.  Ground terms are valued bottom-up, propagating the
annotations of the chosen declaration to the arguments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .annot import AnnotatedDecl, AnnotatedSignature, AnnotatedType, AnnotationError, ResourceVec, instantiate_ctor
from .engine import DivergenceSuspected, compiled, rc_oracle
from .potential import PotentialError, phi_value, select_decl
from .terms import App, Enumerator, Trs, Var, apply_subst, is_value, substitutions, variables


class InterpretationError(Exception):
    pass


@dataclass(frozen=True)
class AffineMap:
    args: Tuple[AnnotatedType, ...]
    constant: Fraction

    def __call__(self, *xs: Fraction) -> Fraction:
        return sum(xs, Fraction(0)) + self.constant

    def __str__(self):
        xs = [f"x{i}" for i in range(1, len(self.args) + 1)]
        return " + ".join(xs + [str(self.constant)]) if xs else str(self.constant)


@dataclass
class Interpretation:
    asig: AnnotatedSignature
    table: Dict[Tuple[str, ResourceVec], AffineMap] = field(default_factory=dict)

    def gamma(self, sym: str, annot: ResourceVec, exact: bool = True) -> AffineMap:
        key = (sym, annot)
        hit = self.table.get(key)
        if hit is not None:
            return hit
        if sym in self.asig.schemes:
            try:
                d = instantiate_ctor(self.asig.schemes[sym], annot)
            except AnnotationError as e:
                raise InterpretationError(str(e)) from None
            m = AffineMap(d.args, d.cost)
            self.table[key] = m
            return m
        if exact:
            raise InterpretationError(f"no declaration of {sym} with result annotation {annot}")
        try:
            d = select_decl(self.asig, sym, annot, exact=False)
        except PotentialError as e:
            raise InterpretationError(str(e)) from None
        return self.table[(sym, d.result.annot)]

    def lines(self) -> List[str]:
        out = []
        for (sym, a), m in self.table.items():
            if sym in self.asig.simple.defined:
                out.append(f"gamma({sym}, {AnnotatedType(self.asig.simple.decl(sym).result, a)}) = {m}")
        return out


def derive_interpretation(asig: AnnotatedSignature) -> Interpretation:
    """One affine entry per declaration; constructor entries are filled in
    on demand from their schemes."""
    interp = Interpretation(asig)
    for f in asig.simple.defined_sorted():
        for d in asig.decls(f):
            key = (f, d.result.annot)
            if key in interp.table:
                raise InterpretationError(f"two declarations of {f} share the result annotation {d.result.annot}")
            interp.table[key] = AffineMap(d.args, d.cost)
    return interp


def interpret_ground(t: App, at: AnnotatedType, interp: Interpretation, exact: bool = True, root: Optional[AffineMap] = None) -> Fraction:
    """[[t : at]], evaluated with an explicit stack."""
    sig = interp.asig.simple
    # frames: (term, annotation, map or None, values so far)
    result: List[Fraction] = []
    stack: List[tuple] = [(t, at.annot, root, None)]
    while stack:
        u, a, m, vals = stack.pop()
        if vals is None:
            if isinstance(u, Var):
                raise InterpretationError(f"{u} is not ground")
            if not a and u.sym in interp.asig.schemes and is_value(u, sig):
                result.append(Fraction(0))
                continue
            if m is None:
                m = interp.gamma(u.sym, a, exact)
            if len(m.args) != len(u.args):
                raise InterpretationError(f"arity mismatch at {u.sym}")
            stack.append((u, a, m, len(result)))
            for x, b in reversed(list(zip(u.args, m.args))):
                stack.append((x, b.annot, None, None))
        else:
            xs = result[vals:]
            del result[vals:]
            result.append(m(*xs))
    if sig.decl(t.sym).result != at.base:
        raise InterpretationError(f"{t} does not have type {at.base}")
    return result[0]


# -- orientation -------------------------------------------------------------------


@dataclass
class OrientationReport:
    size_bound: int
    step_size_bound: int
    instances: int = 0
    steps: int = 0
    violations: List[str] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)
    min_gap: Optional[Fraction] = None
    natural: bool = True

    @property
    def ok(self) -> bool:
        return not self.violations

    def _gap(self, g: Fraction):
        if self.min_gap is None or g < self.min_gap:
            self.min_gap = g

    def lines(self) -> List[str]:
        out = [
            f"rule instances with substitution values of size <= {self.size_bound}: {self.instances}",
            f"innermost steps from basic terms of size <= {self.step_size_bound}: {self.steps}",
            f"least decrease observed: {self.min_gap}",
            "interpretation values: " + ("all natural" if self.natural else "some non-integral (domain is the nonnegative rationals)"),
        ]
        out += [f"  VIOLATION {v}" for v in self.violations[:20]]
        out += [f"  skipped {s}" for s in self.skipped[:10]]
        out.append(f"strictly decreasing, verified up to size {self.size_bound}" if self.ok else f"{len(self.violations)} violations")
        return out


def check_orientation(trs: Trs, asig: AnnotatedSignature, size_bound: int, step_size_bound: Optional[int] = None, fuel: int = 10**6) -> OrientationReport:
    """[[l sigma : C]] > [[r sigma : C]] for every rule, declaration of its
    root and substitution, plus strict decrease along innermost derivations
    from basic terms."""
    step_size_bound = size_bound + 1 if step_size_bound is None else step_size_bound
    interp = derive_interpretation(asig)
    rep = OrientationReport(size_bound, step_size_bound)
    enum = Enumerator(asig.simple)
    for rule in trs.rules:
        for d in asig.decls(rule.root):
            at = d.result
            root = interp.table[(rule.root, at.annot)]
            for s in substitutions(variables(rule.lhs), enum, size_bound):
                l = apply_subst(rule.lhs, s)
                r = apply_subst(rule.rhs, s)
                try:
                    lv = interpret_ground(l, at, interp, root=root)
                    rv = interpret_ground(r, at, interp, exact=False)
                except InterpretationError as e:
                    rep.skipped.append(f"rule {rule.index} at {d}: {e}")
                    continue
                rep.instances += 1
                rep.natural &= lv.denominator == 1 and rv.denominator == 1
                rep._gap(lv - rv)
                if not lv > rv:
                    rep.violations.append(f"rule {rule.index} at {d}, {s}: {lv} <= {rv}")
    ct = compiled(trs)
    for t in enum.basic_terms(step_size_bound):
        for d in asig.decls(t.sym):
            cur = ct.encode(t)
            try:
                prev = interpret_ground(t, d.result, interp, root=interp.table[(t.sym, d.result.annot)])
            except InterpretationError as e:
                rep.skipped.append(f"{t} at {d}: {e}")
                continue
            n = 0
            while True:
                nxt, _ = ct.rewriter.step(cur)
                if nxt is None:
                    break
                n += 1
                if n > fuel:
                    rep.violations.append(f"{t}: no normal form within {fuel} steps")
                    break
                cur = nxt
                u = ct.decode(cur)
                try:
                    val = interpret_ground(u, d.result, interp, exact=False)
                except InterpretationError as e:
                    rep.skipped.append(f"{t} step {n} at {d}: {e}")
                    break
                rep.steps += 1
                rep._gap(prev - val)
                if not val < prev:
                    rep.violations.append(f"{t} at {d}: step {n} to {u} gives {val} >= {prev}")
                prev = val
    return rep


@dataclass
class AgreementReport:
    size_bound: int
    checked: int = 0
    mismatches: List[str] = field(default_factory=list)
    unresolved: int = 0

    @property
    def ok(self) -> bool:
        return not self.mismatches


def _potential_ground(t: App, at: AnnotatedType, asig: AnnotatedSignature, root: Optional[AnnotatedDecl] = None) -> Fraction:
    """Phi on ground terms: Phi of values on constructor terms, otherwise the
    declared cost plus argument potentials."""
    if t.sym in asig.schemes:
        if all(isinstance(a, App) and _is_ctor_term(a, asig) for a in t.args):
            return phi_value(t, at, asig)
        d = instantiate_ctor(asig.schemes[t.sym], at.annot)
    else:
        d = root or select_decl(asig, t.sym, at.annot)
    return d.cost + sum((_potential_ground(a, b, asig) for a, b in zip(t.args, d.args)), Fraction(0))


def _is_ctor_term(t, asig) -> bool:
    return t.sym in asig.schemes and all(_is_ctor_term(a, asig) for a in t.args)


def check_agreement(asig: AnnotatedSignature, size_bound: int) -> AgreementReport:
    """[[t : A]] = Phi(t : A) for all ground terms of size <= size_bound, at
    every annotation the signature mentions for the term's type."""
    interp = derive_interpretation(asig)
    rep = AgreementReport(size_bound)
    annots: Dict[str, set] = {t: {ResourceVec()} for t in asig.simple.types}
    for f in asig.simple.defined:
        for d in asig.decls(f):
            annots[d.result.base].add(d.result.annot)
            for a in d.args:
                annots[a.base].add(a.annot)
    for t in Enumerator(asig.simple).all_ground_terms(size_bound):
        typ = asig.simple.decl(t.sym).result
        for a in sorted(annots[typ], key=lambda v: v.entries):
            at = AnnotatedType(typ, a)
            try:
                phi = _potential_ground(t, at, asig)
            except (PotentialError, AnnotationError):
                try:
                    interpret_ground(t, at, interp)
                except InterpretationError:
                    rep.unresolved += 1
                    continue
                rep.mismatches.append(f"{t} : {at}: potential undefined but interpretation defined")
                continue
            try:
                iv = interpret_ground(t, at, interp)
            except InterpretationError as e:
                rep.mismatches.append(f"{t} : {at}: {e}")
                continue
            rep.checked += 1
            if iv != phi:
                rep.mismatches.append(f"{t} : {at}: [[t]] = {iv}, Phi = {phi}")
    return rep


# -- bounds ------------------------------------------------------------------------


@dataclass
class BoundRow:
    n: int
    oracle: int
    bound: Optional[Fraction]
    witness: Optional[App]


@dataclass
class BoundReport:
    rows: List[BoundRow] = field(default_factory=list)
    missing: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.bound is not None and r.oracle <= r.bound for r in self.rows) and not self.missing

    def lines(self) -> List[str]:
        out = [f"{'n':>3}  {'rc_oracle':>9}  {'bound':>7}  bound witness"]
        for r in self.rows:
            mark = "" if r.bound is not None and r.oracle <= r.bound else "  VIOLATION"
            out.append(f"{r.n:>3}  {r.oracle:>9}  {str(r.bound):>7}  {r.witness or '-'}{mark}")
        out += [f"no declaration for {m}" for m in self.missing[:10]]
        out.append("bound dominates rc_oracle" if self.ok else "bound does not dominate rc_oracle")
        return out

    def records(self) -> List[str]:
        return [f"{r.n}, {r.oracle}, {r.bound}" for r in self.rows]


def basic_bound(t: App, asig: AnnotatedSignature) -> Optional[Fraction]:
    """min over declarations of the root of Phi(args : Gamma) + p."""
    best = None
    for d in asig.decls(t.sym):
        v = d.cost + sum((phi_value(x, a, asig) for x, a in zip(t.args, d.args)), Fraction(0))
        best = v if best is None or v < best else best
    return best


def bound_report(trs: Trs, asig: AnnotatedSignature, n_max: int, fuel: int = 10**6) -> BoundReport:
    rep = BoundReport()
    enum = Enumerator(asig.simple)
    for n in range(0, n_max + 1):
        best, wit = Fraction(0), None
        for t in enum.basic_terms(n):
            b = basic_bound(t, asig)
            if b is None:
                rep.missing.append(str(t))
                continue
            if wit is None or b > best:
                best, wit = b, t
        try:
            oracle = rc_oracle(trs, n, fuel).value
        except DivergenceSuspected as e:
            raise InterpretationError(f"rc oracle ran out of fuel at n = {n}: {e}") from None
        rep.rows.append(BoundRow(n, oracle, best, wit))
    return rep


def family_bounds(terms: List[App], asig: AnnotatedSignature) -> List[Fraction]:
    return [basic_bound(t, asig) for t in terms]


def is_affine(values: List[Fraction]) -> bool:
    return all(values[i + 2] - 2 * values[i + 1] + values[i] == 0 for i in range(len(values) - 2))
