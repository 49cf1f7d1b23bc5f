"""Annotated typing of rewrite rules, compiled to linear constraints.

Checking and inference share one constraint generator.  Annotations are
vectors of linear expressions: constants when checking a given signature,
unknowns when inferring one.  Constructor schemes are always concrete, so
instantiating a scheme at a symbolic annotation stays linear.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .annot import (
    AnnotatedDecl,
    AnnotatedSignature,
    AnnotatedType,
    AnnotationError,
    ConstructorScheme,
    ResourceVec,
    auto_preset,
    preset_scheme,
)
from .constraints import (
    ConstraintSystem,
    LinExpr,
    Solution,
    explain,
    lin_sum,
    solve_feasible,
    solve_minimize,
    validate,
)
from .engine import DivergenceSuspected, Stuck, bigstep, compiled, smallstep_closure
from .potential import PotentialError, phi_ground, phi_value
from .terms import App, Enumerator, Rule, Signature, Trs, Var, apply_subst

SymVec = Tuple[LinExpr, ...]
DEFAULT_BRANCH_CAP = 4


class TypingError(Exception):
    pass


def _const_vec(v: ResourceVec, n: int) -> SymVec:
    return tuple(LinExpr(v[i]) for i in range(max(n, len(v))))


def _pad(v: SymVec, n: int) -> SymVec:
    return tuple(v) + tuple(LinExpr() for _ in range(n - len(v)))


def _concrete(v: SymVec) -> Optional[ResourceVec]:
    if all(e.is_const() for e in v):
        if any(e.const < 0 for e in v):
            return None
        return ResourceVec(e.const for e in v)
    return None


@dataclass
class SymDecl:
    args: Tuple[Tuple[str, SymVec], ...]
    result: Tuple[str, SymVec]
    cost: LinExpr
    label: str = ""


class _View:
    """Signature seen through symbolic declarations."""

    def __init__(self, simple: Signature, schemes: Mapping[str, ConstructorScheme], lengths: Mapping[str, int]):
        self.simple = simple
        self.schemes = schemes
        self.lengths = dict(lengths)
        self.decls: Dict[str, List[SymDecl]] = {}

    def length(self, typ: str) -> int:
        return self.lengths.get(typ, 0)

    @classmethod
    def of(cls, asig: AnnotatedSignature) -> "_View":
        view = cls(asig.simple, asig.schemes, {t: asig.degree(t) for t in asig.simple.types})
        for f in asig.simple.defined:
            out = []
            for i, d in enumerate(asig.decls(f)):
                out.append(
                    SymDecl(
                        tuple((a.base, _const_vec(a.annot, view.length(a.base))) for a in d.args),
                        (d.result.base, _const_vec(d.result.annot, view.length(d.result.base))),
                        LinExpr(d.cost),
                        f"{f}#{i + 1}" if len(asig.decls(f)) > 1 else f,
                    )
                )
            view.decls[f] = out
        return view


def ctor_instance(
    scheme: ConstructorScheme, result: SymVec, view: _View, sys: ConstraintSystem, prov: str
) -> Tuple[List[SymVec], LinExpr]:
    """Symbolic superposition: sum_j result_j * basis_j.  Components beyond
    the scheme degree are forced to zero."""
    for j in range(scheme.degree, len(result)):
        e = result[j]
        if e.is_const():
            if e.const != 0:
                raise TypingError(f"{prov}: annotation exceeds degree {scheme.degree} of {scheme.symbol}")
        else:
            sys.eq(e, 0, f"{prov}: {scheme.symbol} has degree {scheme.degree}")
    args: List[SymVec] = []
    for i, t in enumerate(scheme.arg_types):
        n = view.length(t)
        comps = []
        for c in range(n):
            comps.append(lin_sum(result[j] * scheme.basis[j].args[i][c] for j in range(min(scheme.degree, len(result)))))
        args.append(tuple(comps))
    cost = lin_sum(result[j] * scheme.basis[j].cost for j in range(min(scheme.degree, len(result))))
    return args, cost


# -- pattern typing --------------------------------------------------------------


@dataclass
class PatternTyping:
    bindings: Dict[str, AnnotatedType]
    cost: Fraction


def _pattern_sym(l, typ: str, annot: SymVec, view: _View, sys: ConstraintSystem, prov: str, out: Dict[str, Tuple[str, SymVec]]) -> LinExpr:
    if isinstance(l, Var):
        out[l.name] = (typ, annot)
        return LinExpr()
    if l.sym not in view.schemes:
        raise TypingError(f"{prov}: pattern symbol {l.sym} is not a constructor")
    args, cost = ctor_instance(view.schemes[l.sym], annot, view, sys, f"{prov}: pattern {l.sym}")
    decl = view.simple.constructors[l.sym]
    for a, t, v in zip(l.args, decl.args, args):
        cost = cost + _pattern_sym(a, t, v, view, sys, prov, out)
    return cost


def pattern_typing(l, at: AnnotatedType, asig: AnnotatedSignature) -> PatternTyping:
    """Canonical structural derivation for a linear constructor pattern."""
    view = _View.of(asig)
    sys = ConstraintSystem()
    out: Dict[str, Tuple[str, SymVec]] = {}
    try:
        k = _pattern_sym(l, at.base, _const_vec(at.annot, view.length(at.base)), view, sys, "pattern", out)
    except TypingError as e:
        raise AnnotationError(str(e)) from None
    return PatternTyping({x: AnnotatedType(t, _concrete(v)) for x, (t, v) in out.items()}, k.const)


# -- right-hand sides ------------------------------------------------------------


class _RhsGen:
    def __init__(self, sys: ConstraintSystem, view: _View, prov: str, choice: Mapping[Tuple[int, ...], SymDecl]):
        self.sys, self.view, self.prov, self.choice = sys, view, prov, choice
        self.occurrences: Dict[str, List[SymVec]] = {}

    def term(self, t, typ: str, expected: SymVec, pos: Tuple[int, ...] = ()) -> LinExpr:
        if isinstance(t, Var):
            self.occurrences.setdefault(t.name, []).append(expected)
            return LinExpr()
        sig = self.view.simple
        if t.sym in self.view.schemes:
            args, cost = ctor_instance(self.view.schemes[t.sym], expected, self.view, self.sys, f"{self.prov}: {t.sym} at {_pos(pos)}")
            arg_types = sig.constructors[t.sym].args
        else:
            d = self.choice[pos]
            for j, (e, r) in enumerate(zip(expected, _pad(d.result[1], len(expected))), 1):
                if e.is_const() and r.is_const():
                    if e.const != r.const:
                        raise TypingError(f"{self.prov}: {t.sym} at {_pos(pos)} declared with a different result annotation")
                    continue
                self.sys.eq(e, r, f"{self.prov}: result of {d.label} at {_pos(pos)} [{j}]")
            args = [v for _, v in d.args]
            cost = d.cost
            arg_types = sig.defined[t.sym].args
        for i, (a, at, av) in enumerate(zip(t.args, arg_types, args)):
            cost = cost + self.term(a, at, av, pos + (i,))
        return cost


def _pos(pos: Tuple[int, ...]) -> str:
    return "root" if not pos else ".".join(str(i + 1) for i in pos)


def _defined_positions(t, sig: Signature, pos=()) -> List[Tuple[Tuple[int, ...], str]]:
    if isinstance(t, Var):
        return []
    out = [(pos, t.sym)] if sig.is_defined(t.sym) else []
    for i, a in enumerate(t.args):
        out += _defined_positions(a, sig, pos + (i,))
    return out


def _choices(rule: Rule, view: _View, cap: int) -> Tuple[List[Dict[Tuple[int, ...], SymDecl]], List[str]]:
    """Declaration choices for defined-symbol occurrences in the rhs."""
    occ = _defined_positions(rule.rhs, view.simple)
    pools = []
    missing = []
    for pos, f in occ:
        ds = view.decls.get(f, [])
        if not ds:
            missing.append(f"{f} at {_pos(pos)}")
        pools.append(ds)
    if missing:
        return [], missing
    out = []
    for combo in itertools.product(*pools):
        out.append({pos: d for (pos, _), d in zip(occ, combo)})
        if len(out) >= cap:
            break
    return out, []


def gen_rule(sys: ConstraintSystem, rule: Rule, decl: SymDecl, view: _View, choice, prov: str) -> LinExpr:
    """Emit the constraints for ``rule`` against ``decl``; returns the budget."""
    ctx: Dict[str, Tuple[str, SymVec]] = {}
    k = LinExpr()
    for i, (l, (typ, annot)) in enumerate(zip(rule.lhs.args, decl.args), 1):
        k = k + _pattern_sym(l, typ, annot, view, sys, f"{prov} pattern {i}", ctx)
    budget = decl.cost - 1 + k
    rtyp, rannot = decl.result
    slack = sys.fresh_vec(view.length(rtyp), f"{prov}: slack")
    expected = tuple(a + s for a, s in zip(_pad(rannot, len(slack)), slack))
    gen = _RhsGen(sys, view, prov, choice)
    cost = gen.term(rule.rhs, rtyp, expected)
    sys.ge(budget, cost, f"{prov}: budget")
    for x, (typ, have) in ctx.items():
        demands = gen.occurrences.get(x, [])
        n = len(have)
        if len(demands) == 1:
            for j, (h, d) in enumerate(zip(have, _pad(demands[0], n)), 1):
                if not (d.is_const() and d.const == 0):
                    sys.ge(h, d, f"{prov}: sub {x} [{j}]")
        elif len(demands) > 1:
            splits = [sys.fresh_vec(n, f"{prov}: share {x}/{i}") for i in range(1, len(demands) + 1)]
            for j in range(n):
                sys.eq(lin_sum(s[j] for s in splits), have[j], f"{prov}: share {x} [{j + 1}]")
            for i, (s, d) in enumerate(zip(splits, demands), 1):
                for j, (sj, dj) in enumerate(zip(s, _pad(d, n)), 1):
                    if not (dj.is_const() and dj.const == 0):
                        sys.ge(sj, dj, f"{prov}: sub {x}/{i} [{j}]")
    return budget


# -- checking --------------------------------------------------------------------


@dataclass
class RuleVerdict:
    rule: Rule
    decl: AnnotatedDecl
    status: str  # well-typed, infeasible, negative-budget, error
    budget: Optional[Fraction] = None
    system: Optional[ConstraintSystem] = None
    solution: Optional[Solution] = None
    message: str = ""
    branches: int = 1

    @property
    def ok(self) -> bool:
        return self.status == "well-typed"

    def line(self) -> str:
        head = f"rule {self.rule.index} ({self.rule}) against {self.decl}: {self.status}"
        if self.budget is not None:
            head += f", budget {self.budget}"
        if self.message:
            head += f" -- {self.message}"
        return head


def check_rule(rule: Rule, decl: AnnotatedDecl, asig: AnnotatedSignature, cap: int = DEFAULT_BRANCH_CAP, view: Optional[_View] = None) -> RuleVerdict:
    view = view or _View.of(asig)
    sd = SymDecl(
        tuple((a.base, _const_vec(a.annot, view.length(a.base))) for a in decl.args),
        (decl.result.base, _const_vec(decl.result.annot, view.length(decl.result.base))),
        LinExpr(decl.cost),
        rule.root,
    )
    try:
        pts = [pattern_typing(l, a, asig) for l, a in zip(rule.lhs.args, decl.args)]
    except AnnotationError as e:
        return RuleVerdict(rule, decl, "error", message=str(e))
    budget = decl.cost - 1 + sum((p.cost for p in pts), Fraction(0))
    if budget < 0:
        return RuleVerdict(rule, decl, "negative-budget", budget, message="cost and pattern credits do not pay for the rule application")
    choices, missing = _choices(rule, view, cap)
    if missing:
        return RuleVerdict(rule, decl, "infeasible", budget, message="no declaration for " + ", ".join(missing))
    last = None
    for choice in choices:
        sys = ConstraintSystem()
        try:
            gen_rule(sys, rule, sd, view, choice, f"rule {rule.index}")
        except TypingError as e:
            last = RuleVerdict(rule, decl, "infeasible", budget, message=str(e), branches=len(choices))
            continue
        sys.seal()
        sol = solve_feasible(sys)
        if sol.feasible:
            if not validate(sys, sol.assignment):
                raise AssertionError("solver returned an assignment that fails validation")
            return RuleVerdict(rule, decl, "well-typed", budget, sys, sol, branches=len(choices))
        why = "; ".join(c.provenance for _, c in sol.certificate.support(sys)[:4])
        last = RuleVerdict(rule, decl, "infeasible", budget, sys, sol, message=why, branches=len(choices))
    return last


@dataclass
class TypecheckReport:
    verdicts: List[RuleVerdict] = field(default_factory=list)
    unchecked: List[Rule] = field(default_factory=list)  # root without declarations

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts)

    def lines(self) -> List[str]:
        out = [v.line() for v in self.verdicts]
        for r in self.unchecked:
            out.append(f"rule {r.index}: {r.root} has no declaration (nothing to check)")
        out.append("well-typed" if self.ok else "NOT well-typed")
        return out


def check_trs(trs: Trs, asig: AnnotatedSignature, cap: int = DEFAULT_BRANCH_CAP) -> TypecheckReport:
    view = _View.of(asig)
    rep = TypecheckReport()
    for rule in trs.rules:
        decls = asig.decls(rule.root)
        if not decls:
            rep.unchecked.append(rule)
        for d in decls:
            rep.verdicts.append(check_rule(rule, d, asig, cap, view))
    return rep


@dataclass
class TermTyping:
    system: ConstraintSystem
    cost: LinExpr
    feasible: bool
    min_budget: Optional[Fraction]


def type_term(ctx: Mapping[str, AnnotatedType], t, result: AnnotatedType, asig: AnnotatedSignature, budget=None, cap: int = DEFAULT_BRANCH_CAP) -> TermTyping:
    """Typing of ``t`` under ``ctx`` at ``result``.  With ``budget`` given the
    system includes ``budget >= cost``; the least sufficient budget is reported
    either way (None if no branch is feasible)."""
    view = _View.of(asig)
    fake = Rule(App("$", ()), t, 0)
    choices, missing = _choices(fake, view, cap)
    if missing:
        raise TypingError("no declaration for " + ", ".join(missing))
    best: Optional[TermTyping] = None
    for choice in choices:
        sys = ConstraintSystem()
        decl = SymDecl(
            tuple((a.base, _const_vec(a.annot, view.length(a.base))) for a in ctx.values()),
            (result.base, _const_vec(result.annot, view.length(result.base))),
            LinExpr(1),
        )
        ctx_vars = [Var(x, a.base) for x, a in ctx.items()]
        probe = Rule(App("$", tuple(ctx_vars)), t, 0)
        cost_holder: List[LinExpr] = []
        gen = _RhsGen(sys, view, "term", choice)
        try:
            _gen_open(sys, probe, decl, view, gen, cost_holder)
        except TypingError:
            continue
        cost = cost_holder[0]
        if budget is not None:
            sys.ge(LinExpr(budget), cost, "term: budget")
        sys.seal()
        sol = solve_minimize(sys, cost)
        tt = TermTyping(sys, cost, sol.feasible, sol.objective if sol.feasible else None)
        if best is None or (tt.feasible and (not best.feasible or tt.min_budget < best.min_budget)):
            best = tt
    if best is None:
        raise TypingError(f"{t} cannot be typed at {result}")
    return best


def _gen_open(sys, probe: Rule, decl: SymDecl, view: _View, gen: "_RhsGen", cost_holder):
    """Like gen_rule with variables as patterns and no budget constraint."""
    ctx = {x.name: a for x, a in zip(probe.lhs.args, decl.args)}
    rtyp, rannot = decl.result
    slack = sys.fresh_vec(view.length(rtyp), "term: slack")
    expected = tuple(a + s for a, s in zip(_pad(rannot, len(slack)), slack))
    cost = gen.term(probe.rhs, rtyp, expected)
    for x, (typ, have) in ctx.items():
        demands = gen.occurrences.get(x, [])
        n = len(have)
        if len(demands) == 1:
            for j, (h, d) in enumerate(zip(have, _pad(demands[0], n)), 1):
                sys.ge(h, d, f"term: sub {x} [{j}]")
        elif len(demands) > 1:
            splits = [sys.fresh_vec(n, f"term: share {x}/{i}") for i in range(1, len(demands) + 1)]
            for j in range(n):
                sys.eq(lin_sum(s[j] for s in splits), have[j], f"term: share {x} [{j + 1}]")
            for i, (s, d) in enumerate(zip(splits, demands), 1):
                for j, (sj, dj) in enumerate(zip(s, _pad(d, n)), 1):
                    sys.ge(sj, dj, f"term: sub {x}/{i} [{j}]")
    cost_holder.append(cost)


# -- inference -------------------------------------------------------------------


@dataclass
class DegreeTemplate:
    max_degree: int = 1
    presets: Dict[str, str] = field(default_factory=dict)  # constructor -> preset name

    def __post_init__(self):
        if self.max_degree < 1:
            raise ValueError("template degree must be at least 1")

    def schemes(self, sig: Signature) -> Dict[str, ConstructorScheme]:
        return {
            c: preset_scheme(self.presets.get(c) or auto_preset(c, sig), c, sig, self.max_degree)
            for c in sig.constructors
        }


@dataclass
class InferenceResult:
    signature: Optional[AnnotatedSignature]
    system: ConstraintSystem
    solution: Solution
    objective: Optional[LinExpr] = None

    @property
    def feasible(self) -> bool:
        return self.signature is not None

    def explanation(self, limit: int = 12) -> List[str]:
        return explain(self.system, self.solution, limit)


def _type_lengths(schemes: Mapping[str, ConstructorScheme], sig: Signature) -> Dict[str, int]:
    lengths = {t: 0 for t in sig.types}
    for s in schemes.values():
        lengths[s.result_type] = max(lengths[s.result_type], s.degree)
        for b in s.basis:
            for t, a in zip(s.arg_types, b.args):
                lengths[t] = max(lengths[t], len(a))
    return lengths


def infer(trs: Trs, template: DegreeTemplate, objective: Optional[str] = "total-cost", slack_weight: int = 1000) -> InferenceResult:
    """One global system over a declaration template with one declaration per
    defined symbol and fixed constructor schemes."""
    sig = trs.signature
    schemes = template.schemes(sig)
    view = _View(sig, schemes, _type_lengths(schemes, sig))
    sys = ConstraintSystem()
    for f in sig.defined:
        d = sig.defined[f]
        view.decls[f] = [
            SymDecl(
                tuple((t, sys.fresh_vec(view.length(t), f"{f} arg {i}")) for i, t in enumerate(d.args, 1)),
                (d.result, sys.fresh_vec(view.length(d.result), f"{f} result")),
                LinExpr.var(sys.fresh(f"{f} cost")),
                f,
            )
        ]
    for rule in trs.rules:
        choices, missing = _choices(rule, view, 1)
        gen_rule(sys, rule, view.decls[rule.root][0], view, choices[0], f"rule {rule.index}")
    sys.seal()
    obj = None
    if objective in (None, "none"):
        sol = solve_feasible(sys)
    elif objective == "total-cost":
        terms = []
        for f, (d,) in view.decls.items():
            terms.append(d.cost)
            for _, vec in d.args:
                terms += [e * j for j, e in enumerate(vec, 1)]
        for v in sys.variables:
            if "slack" in v.origin:
                terms.append(LinExpr.var(v) * slack_weight)
        obj = lin_sum(terms)
        sol = solve_minimize(sys, obj)
    else:
        raise ValueError(f"unknown objective {objective!r}")
    if not sol.feasible:
        return InferenceResult(None, sys, sol, obj)
    if not validate(sys, sol.assignment):
        raise AssertionError("solver returned an assignment that fails validation")

    def conc(v: SymVec) -> ResourceVec:
        return ResourceVec(sol[e] for e in v)

    decls = {}
    for f, (d,) in view.decls.items():
        decls[f] = (
            AnnotatedDecl(
                tuple(AnnotatedType(t, conc(v)) for t, v in d.args),
                AnnotatedType(d.result[0], conc(d.result[1])),
                sol[d.cost],
            ),
        )
    return InferenceResult(AnnotatedSignature(sig, schemes, decls), sys, sol, obj)


# -- soundness sweep ---------------------------------------------------------------


@dataclass
class SoundnessCase:
    term: App
    decl: AnnotatedDecl
    potential: Fraction  # Phi(sigma:Gamma) + p
    result_potential: Fraction  # Phi(v:A), or ground potential of the normal form
    steps: int
    evaluated: bool  # True when the big-step semantics produced a value

    @property
    def slack(self) -> Fraction:
        return self.potential - self.result_potential - self.steps


@dataclass
class SoundnessReport:
    size_bound: int
    cases: List[SoundnessCase] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)
    step_checks: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def tight(self) -> List[SoundnessCase]:
        return [c for c in self.cases if c.slack == 0]

    def lines(self) -> List[str]:
        ev = sum(c.evaluated for c in self.cases)
        out = [
            f"soundness sweep over basic terms of size <= {self.size_bound}: {len(self.cases)} cases "
            f"({ev} evaluated to values, {len(self.cases) - ev} with non-value normal forms), "
            f"{self.step_checks} per-step checks, {len(self.tight)} tight",
        ]
        out += [f"  VIOLATION {v}" for v in self.violations[:20]]
        out += [f"  skipped {s}" for s in self.skipped[:10]]
        out.append("zero violations" if self.ok else f"{len(self.violations)} violations")
        return out


def check_soundness_inequality(trs: Trs, asig: AnnotatedSignature, size_bound: int, fuel: int = 10**6) -> SoundnessReport:
    """Phi(sigma:Gamma) + p - Phi(v:A) >= m for every ground basic term and
    declaration of its root, and per step: the ground potential of the
    pending term drops by at least the cost of each step.

    Terms whose innermost normal form is not a value have no big-step
    derivation; for them the check runs along the innermost rewrite
    derivation with the normal form's ground potential in place of Phi(v:A).
    """
    rep = SoundnessReport(size_bound)
    ct = compiled(trs)
    for t in Enumerator(trs.signature).basic_terms(size_bound):
        decls = asig.decls(t.sym)
        if not decls:
            rep.skipped.append(f"{t}: {t.sym} has no declaration")
            continue
        xs = [f"x{i}" for i in range(1, len(t.args) + 1)]
        sigma = dict(zip(xs, t.args))
        probe = App(t.sym, tuple(Var(x, a) for x, a in zip(xs, trs.signature.defined[t.sym].args)))
        try:
            res = bigstep(sigma, probe, trs, fuel)
            trace = smallstep_closure(sigma, probe, trs, fuel)
        except Stuck:
            res = trace = None
        except DivergenceSuspected as e:
            rep.violations.append(f"{t}: {e}")
            continue
        for d in decls:
            phi_in = sum((phi_value(v, a, asig) for v, a in zip(t.args, d.args)), Fraction(0)) + d.cost
            try:
                if res is not None:
                    out = phi_value(res.value, d.result, asig)
                    case = SoundnessCase(t, d, phi_in, out, res.count, True)
                    # per-step form along the small-step trace
                    m = 0
                    prev = phi_in
                    for st, s in zip(trace.steps, trace.substitutions()[1:]):
                        m += st.cost
                        g = phi_ground(apply_subst(st.result, s), d.result, asig, exact=False)
                        rep.step_checks += 1
                        if prev - g < st.cost or phi_in - g < m:
                            rep.violations.append(f"{t} at {d}: step to {st.result} breaks the per-step bound")
                        prev = g
                else:
                    terms = [t]
                    cur = ct.encode(t)
                    while True:
                        nxt, _ = ct.rewriter.step(cur)
                        if nxt is None:
                            break
                        cur = nxt
                        terms.append(ct.decode(cur))
                    gs = [phi_ground(u, d.result, asig, exact=False) for u in terms]
                    if gs[0] != phi_in:
                        rep.violations.append(f"{t}: ground potential {gs[0]} != {phi_in}")
                    for k in range(1, len(gs)):
                        rep.step_checks += 1
                        if gs[k - 1] - gs[k] < 1:
                            rep.violations.append(f"{t} at {d}: step {k} does not decrease the potential")
                    case = SoundnessCase(t, d, phi_in, gs[-1], len(terms) - 1, False)
            except PotentialError as e:
                rep.skipped.append(f"{t} at {d}: {e}")
                continue
            rep.cases.append(case)
            if case.slack < 0:
                rep.violations.append(
                    f"{t} at {d}: Phi + p = {case.potential}, Phi(result) = {case.result_potential}, m = {case.steps}"
                )
    return rep
