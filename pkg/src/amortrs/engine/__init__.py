"""Instrumented innermost semantics: rewriting, big-step and small-step evaluation.

Derivation heights are computed by a rewriting kernel over prefix-encoded
terms.  The compiled kernel is used when the extension is built; otherwise
(or when ``AMORTRS_PURE`` is set) the pure-Python kernel is used.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Tuple

from ..terms import (
    App,
    Enumerator,
    Rule,
    Trs,
    UnboundVariable,
    Var,
    apply_subst,
    is_value,
    match_pattern,
    rename,
    replace_at,
    variables,
)
from . import _kernel_py

if os.environ.get("AMORTRS_PURE"):
    _impl = _kernel_py
    KERNEL = "python"
else:
    try:
        from . import _kernel as _impl  # type: ignore[attr-defined]

        KERNEL = "cython"
    except ImportError:
        _impl = _kernel_py
        KERNEL = "python"

DEFAULT_FUEL = 10**6
STRATEGIES = ("li", "ri")


class EvaluationError(Exception):
    pass


class DivergenceSuspected(EvaluationError):
    def __init__(self, steps: int, term=None):
        super().__init__(f"fuel exhausted after {steps} steps")
        self.steps = steps
        self.term = term


class Stuck(EvaluationError):
    """A defined symbol applied to values matches no rule."""

    def __init__(self, term, steps: int = 0):
        super().__init__(f"no rule applies to {term}")
        self.term = term
        self.steps = steps


# -- prefix encoding ---------------------------------------------------------


class CompiledTrs:
    def __init__(self, trs: Trs, impl=None):
        sig = trs.signature
        self.trs = trs
        self.symbols = sorted(sig.constructors, key=lambda c: (sig.constructors[c].arity, c))
        self.symbols += sig.defined_sorted()
        self.ids = {s: i for i, s in enumerate(self.symbols)}
        self.arities = [sig.decl(s).arity for s in self.symbols]
        self.defined = [sig.is_defined(s) for s in self.symbols]
        rules = []
        for r in trs.rules:
            slots: Dict[str, int] = {}
            lhs_args: List[int] = []
            for a in r.lhs.args:
                self._encode(a, lhs_args, slots, bind=True)
            rhs: List[int] = []
            self._encode(r.rhs, rhs, slots, bind=False)
            rules.append((self.ids[r.lhs.sym], lhs_args, rhs, len(slots)))
        self.rewriter = (impl or _impl).Rewriter(self.arities, self.defined, rules)

    def _encode(self, t, out, slots, bind):
        if isinstance(t, Var):
            if t.name not in slots:
                if not bind:
                    raise UnboundVariable(t.name)
                slots[t.name] = len(slots)
            out.append(-1 - slots[t.name])
            return
        out.append(self.ids[t.sym])
        for a in t.args:
            self._encode(a, out, slots, bind)

    def encode(self, t) -> List[int]:
        out: List[int] = []
        stack = [t]
        while stack:
            u = stack.pop()
            if isinstance(u, Var):
                raise UnboundVariable(u.name)
            out.append(self.ids[u.sym])
            stack.extend(reversed(u.args))
        return out

    def decode(self, codes, start: int = 0):
        """Rebuild the term at ``start`` (iteratively: numerals get deep)."""
        end = start
        need = 1
        while need:
            need += self.arities[codes[end]] - 1
            end += 1
        built: List[App] = []
        for i in range(end - 1, start - 1, -1):
            n = self.arities[codes[i]]
            args = tuple(built[len(built) - n :][::-1]) if n else ()
            if n:
                del built[len(built) - n :]
            built.append(App(self.symbols[codes[i]], args))
        return built[0]

    def normalize(self, t, fuel: int = DEFAULT_FUEL, strategy: str = "li"):
        """Normal form and step count; raises DivergenceSuspected on fuel exhaustion."""
        codes, steps, status = self.rewriter.normalize(self.encode(t), fuel, strategy == "ri")
        if status == _kernel_py.FUEL:
            raise DivergenceSuspected(steps, self.decode(codes))
        return self.decode(codes), steps


@lru_cache(maxsize=64)
def compiled(trs: Trs) -> CompiledTrs:
    return CompiledTrs(trs)


def _check_strategy(strategy: str):
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


# -- single innermost steps on terms ----------------------------------------


def contract(redex: App, trs: Trs) -> Optional[Tuple[object, Rule]]:
    """Reduct of ``redex`` by the first matching rule, with that rule."""
    for rule in trs.rules_for(redex.sym):
        tau = match_pattern(rule.lhs, redex)
        if tau is not None:
            return apply_subst(rule.rhs, tau), rule
    return None


def _innermost(t, trs: Trs, pos=()) -> Tuple[bool, List[Tuple[Tuple[int, ...], App]]]:
    """(is normal form, innermost redexes in left-to-right order)."""
    if isinstance(t, Var):
        return True, []
    hits: List[Tuple[Tuple[int, ...], App]] = []
    for i, a in enumerate(t.args):
        hits += _innermost(a, trs, pos + (i,))[1]
    if hits:
        return False, hits
    if trs.signature.is_defined(t.sym) and contract(t, trs) is not None:
        return False, [(pos, t)]
    return True, []


def innermost_redexes(t, trs: Trs) -> List[Tuple[Tuple[int, ...], App]]:
    return _innermost(t, trs)[1]


def is_normal_form(t, trs: Trs) -> bool:
    return _innermost(t, trs)[0]


def rewrite_step(t, trs: Trs, strategy: str = "li"):
    """Contract the leftmost (``li``) or rightmost (``ri``) innermost redex.

    Returns the reduct, or ``None`` when ``t`` is a normal form.  A defined
    symbol over normal forms that matches no rule is itself a normal form.
    """
    _check_strategy(strategy)
    hits = innermost_redexes(t, trs)
    if not hits:
        return None
    pos, redex = hits[-1] if strategy == "ri" else hits[0]
    return replace_at(t, pos, contract(redex, trs)[0])


def dheight(t, trs: Trs, fuel: int = DEFAULT_FUEL, strategy: str = "li") -> int:
    _check_strategy(strategy)
    return compiled(trs).normalize(t, fuel, strategy)[1]


def normal_form(t, trs: Trs, fuel: int = DEFAULT_FUEL, strategy: str = "li"):
    _check_strategy(strategy)
    return compiled(trs).normalize(t, fuel, strategy)[0]


def derivation(t, trs: Trs, fuel: int = DEFAULT_FUEL, strategy: str = "li") -> List[object]:
    """The innermost derivation t = t0 -> t1 -> ... -> normal form."""
    _check_strategy(strategy)
    ct = compiled(trs)
    codes = ct.encode(t)
    out = [t]
    for _ in range(fuel + 1):
        nxt, _pos = ct.rewriter.step(codes, strategy == "ri")
        if nxt is None:
            return out
        codes = nxt
        out.append(ct.decode(codes))
    raise DivergenceSuspected(fuel, out[-1])


# -- big-step semantics ------------------------------------------------------


@dataclass(frozen=True)
class BigStepResult:
    value: App
    count: int
    derivation_size: int


class _Fresh:
    def __init__(self):
        self.k = 0

    def __call__(self, base: str = "") -> str:
        self.k += 1
        return f"{base}${self.k}"


def _rule_instance(trs: Trs, f: str, vals, fresh: _Fresh):
    """Find the rule for f(vals); returns (renamed rhs, renamed matcher, rule)."""
    probe = App(f, tuple(vals))
    for rule in trs.rules_for(f):
        tau = match_pattern(rule.lhs, probe)
        if tau is None:
            continue
        mapping = {v.name: fresh(v.name) for v in variables(rule.lhs)}
        return (
            rename(rule.rhs, mapping),
            {mapping[k]: v for k, v in tau.items()},
            rule,
        )
    raise Stuck(probe)


class _BigStep:
    def __init__(self, trs: Trs, fuel: int):
        self.trs = trs
        self.sig = trs.signature
        self.fuel = fuel
        self.applied = 0
        self.fresh = _Fresh()

    def eval(self, s: Mapping[str, App], t) -> Tuple[App, int, int]:
        if isinstance(t, Var):
            if t.name not in s:
                raise UnboundVariable(t.name)
            return s[t.name], 0, 1
        if all(isinstance(a, Var) for a in t.args):
            vals = []
            for a in t.args:
                if a.name not in s:
                    raise UnboundVariable(a.name)
                vals.append(s[a.name])
            if self.sig.is_constructor(t.sym):
                return App(t.sym, tuple(vals)), 0, 1
            rhs, tau, _ = _rule_instance(self.trs, t.sym, vals, self.fresh)
            self.applied += 1
            if self.applied > self.fuel:
                raise DivergenceSuspected(self.applied - 1)
            v, m, size = self.eval({**s, **tau}, rhs)
            return v, m + 1, size + 1
        decl = self.sig.decl(t.sym)
        rho: Dict[str, App] = {}
        xs = []
        total, size = 0, 1
        for a, typ in zip(t.args, decl.args):
            v, m, sz = self.eval(s, a)
            x = self.fresh()
            rho[x] = v
            xs.append(Var(x, typ))
            total += m
            size += sz
        v, m0, sz0 = self.eval({**s, **rho}, App(t.sym, tuple(xs)))
        return v, total + m0, size + sz0


def bigstep(sigma: Mapping[str, App], t, trs: Trs, fuel: int = DEFAULT_FUEL) -> BigStepResult:
    v, m, size = _BigStep(trs, fuel).eval(dict(sigma), t)
    return BigStepResult(v, m, size)


# -- small-step semantics ----------------------------------------------------


@dataclass(frozen=True)
class SmallStep:
    term: object  # term before the step
    delta: Dict[str, App]  # bindings added by the step
    cost: int
    kind: str
    result: object  # term after the step


@dataclass
class SmallStepTrace:
    initial: Dict[str, App]
    steps: List[SmallStep] = field(default_factory=list)
    final_term: object = None

    @property
    def total(self) -> int:
        return sum(s.cost for s in self.steps)

    @property
    def final_subst(self) -> Dict[str, App]:
        out = dict(self.initial)
        for s in self.steps:
            out.update(s.delta)
        return out

    def substitutions(self) -> List[Dict[str, App]]:
        """sigma_0, sigma_1, ... with sigma_k in force before step k."""
        cur = dict(self.initial)
        out = [dict(cur)]
        for s in self.steps:
            cur.update(s.delta)
            out.append(dict(cur))
        return out

    def lines(self) -> List[str]:
        out = []
        m = 0
        for s in self.steps:
            m += s.cost
            delta = ", ".join(f"{k}={v}" for k, v in s.delta.items())
            out.append(f"{m} | {s.result} | {{{delta}}}")
        return out


class _SmallStep:
    def __init__(self, trs: Trs):
        self.trs = trs
        self.sig = trs.signature
        self.fresh = _Fresh()

    def step(self, t, s: Mapping[str, App]):
        """One Fig.3-style step: (u, delta, cost, kind)."""
        if isinstance(t, Var):
            if t.name not in s:
                raise UnboundVariable(t.name)
            return s[t.name], {}, 0, "var"
        if all(isinstance(a, Var) for a in t.args):
            vals = []
            for a in t.args:
                if a.name not in s:
                    raise UnboundVariable(a.name)
                vals.append(s[a.name])
            if self.sig.is_constructor(t.sym):
                return App(t.sym, tuple(vals)), {}, 0, "ctor"
            rhs, tau, rule = _rule_instance(self.trs, t.sym, vals, self.fresh)
            return rhs, tau, 1, f"rule {rule.index}"
        if self.sig.is_defined(t.sym) and all(is_value(a, self.sig) for a in t.args):
            decl = self.sig.decl(t.sym)
            xs, rho = [], {}
            for a, typ in zip(t.args, decl.args):
                x = self.fresh()
                rho[x] = a
                xs.append(Var(x, typ))
            return App(t.sym, tuple(xs)), rho, 0, "freeze"
        i = next(k for k, a in enumerate(t.args) if not is_value(a, self.sig))
        u, delta, cost, kind = self.step(t.args[i], s)
        args = t.args[:i] + (u,) + t.args[i + 1 :]
        return App(t.sym, args), delta, cost, kind


def smallstep_closure(
    sigma: Mapping[str, App], t, trs: Trs, fuel: int = DEFAULT_FUEL
) -> SmallStepTrace:
    """Iterate small steps from (t, sigma) until the pending term is a value."""
    ev = _SmallStep(trs)
    trace = SmallStepTrace(dict(sigma))
    s = dict(sigma)
    applied = 0
    while not is_value(t, trs.signature):
        try:
            u, delta, cost, kind = ev.step(t, s)
        except Stuck as e:
            e.steps = applied
            raise
        if cost:
            applied += 1
            if applied > fuel:
                raise DivergenceSuspected(applied - 1, t)
        trace.steps.append(SmallStep(t, delta, cost, kind, u))
        s.update(delta)
        t = u
    trace.final_term = t
    return trace


# -- runtime complexity oracle ----------------------------------------------


@dataclass(frozen=True)
class RcResult:
    n: int
    value: int
    witness: Optional[App]
    terms: int


def rc_oracle(trs: Trs, n: int, fuel: int = DEFAULT_FUEL, strategy: str = "li") -> RcResult:
    """max dheight over ground basic terms of size <= n, with a maximising witness."""
    ct = compiled(trs)
    best, witness, count = 0, None, 0
    for t in Enumerator(trs.signature).basic_terms(n):
        count += 1
        h = ct.normalize(t, fuel, strategy)[1]
        if witness is None or h > best:
            best, witness = h, t
    return RcResult(n, best, witness, count)


def rc_table(trs: Trs, n_max: int, fuel: int = DEFAULT_FUEL) -> List[RcResult]:
    """rc(0..n_max), sharing one pass over the enumeration."""
    ct = compiled(trs)
    by_size: Dict[int, Tuple[int, Optional[App]]] = {}
    counts: Dict[int, int] = {}
    for t in Enumerator(trs.signature).basic_terms(n_max):
        k = t._size
        counts[k] = counts.get(k, 0) + 1
        h = ct.normalize(t, fuel)[1]
        cur = by_size.get(k)
        if cur is None or h > cur[0]:
            by_size[k] = (h, t)
    out = []
    best, witness, count = 0, None, 0
    for n in range(n_max + 1):
        if n in by_size and (witness is None or by_size[n][0] > best):
            best, witness = by_size[n]
        count += counts.get(n, 0)
        out.append(RcResult(n, best, witness, count))
    return out


# -- completely-definedness ---------------------------------------------------


@dataclass
class DefinednessReport:
    size_bound: int
    checked: int = 0
    counterexamples: List[Tuple[App, App]] = field(default_factory=list)
    diverging: List[App] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples and not self.diverging

    def lines(self) -> List[str]:
        head = f"completely-defined (ground terms of size <= {self.size_bound}, {self.checked} checked): "
        if self.ok:
            return [head + "pass"]
        out = [head + "FAIL"]
        for t, nf in self.counterexamples[:10]:
            out.append(f"  {t} has non-value normal form {nf}")
        for t in self.diverging[:10]:
            out.append(f"  {t}: fuel exhausted")
        return out


def check_completely_defined(trs: Trs, size_bound: int = 8, fuel: int = DEFAULT_FUEL) -> DefinednessReport:
    ct = compiled(trs)
    rep = DefinednessReport(size_bound)
    for t in Enumerator(trs.signature).all_ground_terms(size_bound):
        rep.checked += 1
        try:
            nf, _ = ct.normalize(t, fuel)
        except DivergenceSuspected:
            rep.diverging.append(t)
            continue
        if not is_value(nf, trs.signature):
            rep.counterexamples.append((t, nf))
    return rep
