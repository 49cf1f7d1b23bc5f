"""Typed first-order terms, constructor TRSs and their structural checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple


class TermError(Exception):
    pass


class UnboundVariable(TermError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable {name!r}")
        self.name = name


@dataclass(frozen=True)
class SimpleDecl:
    args: Tuple[str, ...]
    result: str

    @property
    def arity(self) -> int:
        return len(self.args)


@dataclass(frozen=True, eq=False)
class Var:
    name: str
    type: str
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("var", self.name, self.type)))

    def __eq__(self, other):
        return (
            isinstance(other, Var)
            and self._hash == other._hash
            and self.name == other.name
            and self.type == other.type
        )

    def __hash__(self):
        return self._hash

    def __str__(self):
        return self.name


@dataclass(frozen=True, eq=False)
class App:
    sym: str
    args: Tuple["Term", ...] = ()
    _hash: int = field(init=False, repr=False, compare=False)
    _size: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        args = tuple(self.args)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "_hash", hash((self.sym, args)))
        object.__setattr__(self, "_size", 1 + sum(term_size(a) for a in args))

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, App):
            return False
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if not isinstance(b, type(a)):
                return False
            if isinstance(a, Var):
                if a != b:
                    return False
                continue
            if a._hash != b._hash or a.sym != b.sym or len(a.args) != len(b.args):
                return False
            stack.extend(zip(a.args, b.args))
        return True

    def __hash__(self):
        return self._hash

    def __str__(self):
        parts: List[str] = []
        stack: list = [self]
        while stack:
            u = stack.pop()
            if isinstance(u, str):
                parts.append(u)
            elif isinstance(u, Var) or not u.args:
                parts.append(str(u) if isinstance(u, Var) else u.sym)
            else:
                parts.append(u.sym + "(")
                stack.append(")")
                for i in range(len(u.args) - 1, -1, -1):
                    stack.append(u.args[i])
                    if i:
                        stack.append(", ")
        return "".join(parts)


Term = "Var | App"
Substitution = Dict[str, "Var | App"]


@dataclass(frozen=True)
class Signature:
    """Simple (unannotated) signature: base types, constructors, defined symbols."""

    types: Tuple[str, ...]
    constructors: Mapping[str, SimpleDecl]
    defined: Mapping[str, SimpleDecl]

    def __post_init__(self):
        if not self.types:
            raise TermError("signature declares no types")
        if len(set(self.types)) != len(self.types):
            raise TermError("duplicate type name")
        clash = set(self.constructors) & set(self.defined)
        if clash:
            raise TermError(f"symbols both constructor and defined: {sorted(clash)}")
        known = set(self.types)
        for name, decl in {**self.constructors, **self.defined}.items():
            for t in (*decl.args, decl.result):
                if t not in known:
                    raise TermError(f"symbol {name!r} mentions undeclared type {t!r}")

    def decl(self, sym: str) -> SimpleDecl:
        if sym in self.constructors:
            return self.constructors[sym]
        if sym in self.defined:
            return self.defined[sym]
        raise TermError(f"unknown symbol {sym!r}")

    def is_constructor(self, sym: str) -> bool:
        return sym in self.constructors

    def is_defined(self, sym: str) -> bool:
        return sym in self.defined

    def constructors_of(self, typ: str) -> List[str]:
        """Constructors with result ``typ``, ordered by (arity, name)."""
        cs = [c for c, d in self.constructors.items() if d.result == typ]
        return sorted(cs, key=lambda c: (self.constructors[c].arity, c))

    def symbols_of(self, typ: str) -> List[str]:
        syms = [f for f, d in {**self.constructors, **self.defined}.items() if d.result == typ]
        return sorted(syms, key=lambda f: (self.decl(f).arity, f))

    def defined_sorted(self) -> List[str]:
        return sorted(self.defined, key=lambda f: (self.defined[f].arity, f))


@dataclass(frozen=True)
class Rule:
    lhs: App
    rhs: "Var | App"
    index: int

    @property
    def root(self) -> str:
        return self.lhs.sym

    def __str__(self):
        return f"{self.lhs} -> {self.rhs}"


@dataclass(frozen=True, eq=False)
class Trs:
    signature: Signature
    rules: Tuple[Rule, ...]

    def rules_for(self, sym: str) -> List[Rule]:
        return [r for r in self.rules if r.root == sym]

    def rule(self, index: int) -> Rule:
        for r in self.rules:
            if r.index == index:
                return r
        raise KeyError(index)


# -- basic term functions --------------------------------------------------


def term_size(t) -> int:
    if isinstance(t, Var):
        return 1
    return t._size


def _preorder(t) -> Iterator:
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        if isinstance(u, App):
            stack.extend(reversed(u.args))


def variables(t) -> List[Var]:
    """Variables of ``t`` in left-to-right order of first occurrence."""
    return list(dict.fromkeys(u for u in _preorder(t) if isinstance(u, Var)))


def var_occurrences(t) -> List[Var]:
    return [u for u in _preorder(t) if isinstance(u, Var)]


def is_ground(t) -> bool:
    return not any(isinstance(u, Var) for u in _preorder(t))


def is_constructor_term(t, sig: Signature) -> bool:
    return all(isinstance(u, Var) or sig.is_constructor(u.sym) for u in _preorder(t))


def is_value(t, sig: Signature) -> bool:
    """Ground constructor term."""
    return all(not isinstance(u, Var) and sig.is_constructor(u.sym) for u in _preorder(t))


def is_basic(t, sig: Signature) -> bool:
    if isinstance(t, Var) or not sig.is_defined(t.sym):
        return False
    return all(is_constructor_term(a, sig) for a in t.args)


def type_of(t, sig: Signature) -> str:
    if isinstance(t, Var):
        return t.type
    return sig.decl(t.sym).result


def check_term(t, sig: Signature) -> str:
    """Simple-typing check; returns the type of ``t``."""
    if isinstance(t, Var):
        if t.type not in sig.types:
            raise TermError(f"variable {t.name} has undeclared type {t.type}")
        return t.type
    decl = sig.decl(t.sym)
    if len(t.args) != decl.arity:
        raise TermError(f"{t.sym} expects {decl.arity} arguments, got {len(t.args)}")
    for i, (a, want) in enumerate(zip(t.args, decl.args), 1):
        got = check_term(a, sig)
        if got != want:
            raise TermError(f"argument {i} of {t.sym} has type {got}, expected {want}")
    return decl.result


def apply_subst(t, s: Mapping[str, object]):
    if isinstance(t, Var):
        try:
            return s[t.name]
        except KeyError:
            raise UnboundVariable(t.name) from None
    if not t.args:
        return t
    return App(t.sym, tuple(apply_subst(a, s) for a in t.args))


def match_pattern(pattern, subject) -> Optional[Dict[str, object]]:
    """Match a linear pattern against a ground subject; ``None`` on failure."""
    out: Dict[str, object] = {}
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        if isinstance(p, Var):
            out[p.name] = s
            continue
        if isinstance(s, Var) or p.sym != s.sym or len(p.args) != len(s.args):
            return None
        stack.extend(zip(p.args, s.args))
    return out


def rename(t, mapping: Mapping[str, str]):
    if isinstance(t, Var):
        return Var(mapping.get(t.name, t.name), t.type)
    return App(t.sym, tuple(rename(a, mapping) for a in t.args))


def subterms(t) -> Iterator[Tuple[Tuple[int, ...], object]]:
    """Yield (position, subterm) pairs in pre-order."""
    stack = [((), t)]
    while stack:
        pos, u = stack.pop()
        yield pos, u
        if isinstance(u, App):
            for i in range(len(u.args) - 1, -1, -1):
                stack.append((pos + (i,), u.args[i]))


def replace_at(t, pos: Sequence[int], new):
    if not pos:
        return new
    i = pos[0]
    args = list(t.args)
    args[i] = replace_at(args[i], pos[1:], new)
    return App(t.sym, tuple(args))


# -- unification (for overlap detection) -----------------------------------


def _walk(t, s):
    while isinstance(t, Var) and t.name in s:
        t = s[t.name]
    return t


def _occurs(name, t, s) -> bool:
    t = _walk(t, s)
    if isinstance(t, Var):
        return t.name == name
    return any(_occurs(name, a, s) for a in t.args)


def unify(a, b) -> Optional[Dict[str, object]]:
    s: Dict[str, object] = {}
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x, y = _walk(x, s), _walk(y, s)
        if isinstance(x, Var) and isinstance(y, Var) and x.name == y.name:
            continue
        if isinstance(x, Var):
            if _occurs(x.name, y, s):
                return None
            s[x.name] = y
        elif isinstance(y, Var):
            if _occurs(y.name, x, s):
                return None
            s[y.name] = x
        else:
            if x.sym != y.sym or len(x.args) != len(y.args):
                return None
            stack.extend(zip(x.args, y.args))
    return s


# -- structure checks ------------------------------------------------------


@dataclass
class StructureReport:
    constructor_trs: List[int] = field(default_factory=list)
    left_linear: List[int] = field(default_factory=list)
    overlaps: List[Tuple[int, int]] = field(default_factory=list)
    typing: List[Tuple[int, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.constructor_trs or self.left_linear or self.overlaps or self.typing)

    def lines(self) -> List[str]:
        def verdict(bad):
            return "pass" if not bad else "FAIL " + ", ".join(map(str, bad))

        out = [
            f"constructor-trs: {verdict(self.constructor_trs)}",
            f"left-linear: {verdict(self.left_linear)}",
            f"non-overlapping: {verdict(self.overlaps)}",
        ]
        if self.typing:
            out.append("typing: FAIL " + "; ".join(f"rule {i}: {m}" for i, m in self.typing))
        return out


def check_rule_typing(rule: Rule, sig: Signature) -> Optional[str]:
    try:
        lt = check_term(rule.lhs, sig)
        rt = check_term(rule.rhs, sig)
    except TermError as e:
        return str(e)
    if not sig.is_defined(rule.lhs.sym):
        return f"root {rule.lhs.sym} is not a defined symbol"
    if lt != rt:
        return f"lhs has type {lt}, rhs has type {rt}"
    lv = {v.name for v in variables(rule.lhs)}
    extra = [v.name for v in variables(rule.rhs) if v.name not in lv]
    if extra:
        return f"rhs variables not in lhs: {', '.join(extra)}"
    return None


def check_structure(trs: Trs) -> StructureReport:
    sig = trs.signature
    rep = StructureReport()
    for r in trs.rules:
        msg = check_rule_typing(r, sig)
        if msg:
            rep.typing.append((r.index, msg))
        if not all(is_constructor_term(a, sig) for a in r.lhs.args):
            rep.constructor_trs.append(r.index)
        occ = [v.name for v in var_occurrences(r.lhs)]
        if len(occ) != len(set(occ)):
            rep.left_linear.append(r.index)
    # overlaps: rename apart, unify lhs pairs and lhs against non-variable
    # proper subterms of other lhs
    rules = sorted(trs.rules, key=lambda r: r.index)
    renamed = []
    for r in rules:
        mapping = {v.name: f"{v.name}#{r.index}" for v in variables(r.lhs)}
        renamed.append((r.index, rename(r.lhs, mapping)))
    pairs = set()
    for (i, li), (j, lj) in itertools.product(renamed, renamed):
        for pos, sub in subterms(lj):
            if isinstance(sub, Var):
                continue
            if i == j and not pos:
                continue
            if unify(li, sub) is not None:
                pairs.add((min(i, j), max(i, j)))
    rep.overlaps = sorted(pairs)
    rep.constructor_trs.sort()
    rep.left_linear.sort()
    rep.typing.sort()
    return rep


# -- enumeration -----------------------------------------------------------


class Enumerator:
    """Enumerates values and ground terms of each type by exact size.

    Symbols are taken in (arity, name) order so enumeration is reproducible.
    """

    def __init__(self, sig: Signature):
        self.sig = sig
        self._values: Dict[Tuple[str, int], List[App]] = {}
        self._ground: Dict[Tuple[str, int], List[App]] = {}

    def _build(self, typ: str, size: int, symbols: List[str], table, getter) -> List[App]:
        key = (typ, size)
        if key in table:
            return table[key]
        out: List[App] = []
        if size >= 1:
            for sym in symbols:
                decl = self.sig.decl(sym)
                n = decl.arity
                if n == 0:
                    if size == 1:
                        out.append(App(sym, ()))
                    continue
                for parts in _compositions(size - 1, n):
                    pools = [getter(a, k) for a, k in zip(decl.args, parts)]
                    if any(not p for p in pools):
                        continue
                    for combo in itertools.product(*pools):
                        out.append(App(sym, combo))
        table[key] = out
        return out

    def values_of_size(self, typ: str, size: int) -> List[App]:
        return self._build(typ, size, self.sig.constructors_of(typ), self._values, self.values_of_size)

    def ground_of_size(self, typ: str, size: int) -> List[App]:
        return self._build(typ, size, self.sig.symbols_of(typ), self._ground, self.ground_of_size)

    def values(self, typ: str, max_size: int) -> Iterator[App]:
        for k in range(1, max_size + 1):
            yield from self.values_of_size(typ, k)

    def ground_terms(self, typ: str, max_size: int) -> Iterator[App]:
        for k in range(1, max_size + 1):
            yield from self.ground_of_size(typ, k)

    def all_ground_terms(self, max_size: int) -> Iterator[App]:
        for k in range(1, max_size + 1):
            for typ in self.sig.types:
                yield from self.ground_of_size(typ, k)

    def basic_terms(self, max_size: int) -> Iterator[App]:
        """Ground basic terms f(v1..vn) with size <= max_size."""
        for size in range(1, max_size + 1):
            for f in self.sig.defined_sorted():
                decl = self.sig.defined[f]
                n = decl.arity
                if n == 0:
                    if size == 1:
                        yield App(f, ())
                    continue
                for parts in _compositions(size - 1, n):
                    pools = [self.values_of_size(a, k) for a, k in zip(decl.args, parts)]
                    for combo in itertools.product(*pools):
                        yield App(f, combo)


@lru_cache(maxsize=None)
def _compositions(total: int, parts: int) -> Tuple[Tuple[int, ...], ...]:
    """Ordered tuples of ``parts`` positive integers summing to ``total``."""
    if parts == 0:
        return ((),) if total == 0 else ()
    if parts == 1:
        return ((total,),) if total >= 1 else ()
    out = []
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return tuple(out)


def substitutions(vars_: Sequence[Var], enum: Enumerator, max_size: int) -> Iterator[Dict[str, App]]:
    """All normalised substitutions for ``vars_`` with value sizes <= max_size."""
    pools = [list(enum.values(v.type, max_size)) for v in vars_]
    for combo in itertools.product(*pools):
        yield {v.name: val for v, val in zip(vars_, combo)}


def check_completely_defined(trs: Trs, size_bound: int = 8):
    """Every ground term of size <= size_bound normalises to a value."""
    from .engine import check_completely_defined as run

    return run(trs, size_bound)
