"""Readers and canonical printers for ``.trs`` and ``.sig`` files."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .annot import (
    AnnotatedDecl,
    AnnotatedSignature,
    AnnotatedType,
    AnnotationError,
    BasisEntry,
    ConstructorScheme,
    ResourceVec,
    PRESETS,
    preset_scheme,
)
from .terms import App, Rule, Signature, SimpleDecl, TermError, Trs, Var, check_structure

IDENT = r"[a-zA-Z][a-zA-Z0-9_']*"
_TOKEN = re.compile(
    rf"\s*(?:(?P<arrow>->)|(?P<num>\d+(?:/\d+)?)|(?P<ident>{IDENT})|(?P<punct>[(),:\[\]])|(?P<bad>\S))"
)
FIXTURES = Path(__file__).parent / "fixtures"


class ParseError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0, path: str = ""):
        self.msg, self.line, self.col, self.path = msg, line, col, path
        where = f"{path}:" if path else ""
        super().__init__(f"{where}{line}:{col}: {msg}")


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokens(line: str, lineno: int) -> List[_Tok]:
    out = []
    pos = 0
    line = line.rstrip()
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if not m or m.end() == pos:
            break
        kind = m.lastgroup
        text = m.group(kind)
        col = m.start(kind) + 1
        if kind == "bad":
            raise ParseError(f"unexpected character {text!r}", lineno, col)
        out.append(_Tok(kind, text, col))
        pos = m.end()
    return out


class _Cursor:
    def __init__(self, toks: List[_Tok], lineno: int, end_col: int):
        self.toks, self.i, self.lineno, self.end_col = toks, 0, lineno, end_col

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def error(self, msg: str) -> ParseError:
        t = self.peek()
        return ParseError(msg, self.lineno, t.col if t else self.end_col)

    def next(self, kind: Optional[str] = None, text: Optional[str] = None) -> _Tok:
        t = self.peek()
        want = text or kind
        if t is None:
            raise self.error(f"expected {want}, found end of line")
        if (kind and t.kind != kind) or (text and t.text != text):
            raise self.error(f"expected {want}, found {t.text!r}")
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        t = self.peek()
        if t is not None and t.text == text:
            self.i += 1
            return True
        return False

    def done(self):
        if self.peek() is not None:
            raise self.error(f"unexpected {self.peek().text!r}")


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        if body.strip():
            yield lineno, body


# -- terms -------------------------------------------------------------------


@dataclass
class _Raw:
    name: str
    args: Optional[List["_Raw"]]  # None when written without parentheses
    col: int


def _raw_term(cur: _Cursor) -> _Raw:
    tok = cur.next("ident")
    if cur.accept("("):
        args: List[_Raw] = []
        if not cur.accept(")"):
            args.append(_raw_term(cur))
            while cur.accept(","):
                args.append(_raw_term(cur))
            cur.next(text=")")
        return _Raw(tok.text, args, tok.col)
    return _Raw(tok.text, None, tok.col)


def _resolve(raw: _Raw, sig: Signature, want: Optional[str], env: Dict[str, str], lineno: int):
    if raw.name in sig.constructors or raw.name in sig.defined:
        decl = sig.decl(raw.name)
        args = raw.args or []
        if len(args) != decl.arity:
            raise ParseError(
                f"{raw.name} expects {decl.arity} arguments, got {len(args)}", lineno, raw.col
            )
        if want is not None and decl.result != want:
            raise ParseError(f"{raw.name} has type {decl.result}, expected {want}", lineno, raw.col)
        return App(raw.name, tuple(_resolve(a, sig, t, env, lineno) for a, t in zip(args, decl.args)))
    if raw.args is not None:
        raise ParseError(f"unknown symbol {raw.name!r}", lineno, raw.col)
    if want is None:
        if raw.name not in env:
            raise ParseError(f"cannot determine the type of variable {raw.name!r}", lineno, raw.col)
        want = env[raw.name]
    if env.setdefault(raw.name, want) != want:
        raise ParseError(
            f"variable {raw.name!r} used at types {env[raw.name]} and {want}", lineno, raw.col
        )
    return Var(raw.name, want)


def parse_term(text: str, sig: Signature, typ: Optional[str] = None, env: Optional[Dict[str, str]] = None):
    """Parse a single term; variables need a type from position or ``env``."""
    toks = _tokens(text, 1)
    cur = _Cursor(toks, 1, len(text) + 1)
    raw = _raw_term(cur)
    cur.done()
    try:
        return _resolve(raw, sig, typ, dict(env or {}), 1)
    except TermError as e:
        raise ParseError(str(e), 1, raw.col) from None


def parse_subst(text: str, sig: Signature) -> Dict[str, App]:
    """``x=zero, xs=cons(zero, nil)``: bindings to values."""
    out: Dict[str, App] = {}
    if not text.strip():
        return out
    depth, start, parts = 0, 0, []
    for i, ch in enumerate(text):
        depth += ch == "("
        depth -= ch == ")"
        if ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    for part in parts:
        if "=" not in part:
            raise ParseError(f"expected name=value in {part.strip()!r}", 1, 1)
        name, value = part.split("=", 1)
        name = name.strip()
        if not re.fullmatch(IDENT, name):
            raise ParseError(f"bad variable name {name!r}", 1, 1)
        out[name] = parse_term(value.strip(), sig)
    return out


# -- TRS files ---------------------------------------------------------------


def _arrow_decl(cur: _Cursor, types: List[str]) -> SimpleDecl:
    cur.next(text=":")
    args = []
    while cur.peek() is not None and cur.peek().kind == "ident":
        args.append(cur.next().text)
    cur.next("arrow")
    res = cur.next("ident").text
    cur.done()
    for t in (*args, res):
        if t not in types:
            raise cur.error(f"undeclared type {t!r}")
    return SimpleDecl(tuple(args), res)


def parse_trs_text(text: str, path: str = "") -> Trs:
    types: List[str] = []
    ctors: Dict[str, SimpleDecl] = {}
    fns: Dict[str, SimpleDecl] = {}
    raw_rules: List[Tuple[int, _Raw, _Raw]] = []
    try:
        for lineno, body in _lines(text):
            cur = _Cursor(_tokens(body, lineno), lineno, len(body) + 1)
            kw = cur.next("ident")
            if kw.text == "types":
                while cur.peek() is not None:
                    name = cur.next("ident").text
                    if name in types:
                        raise ParseError(f"duplicate type {name!r}", lineno, cur.toks[cur.i - 1].col)
                    types.append(name)
            elif kw.text in ("ctor", "fn"):
                name_tok = cur.next("ident")
                if name_tok.text in ctors or name_tok.text in fns:
                    raise ParseError(f"duplicate symbol {name_tok.text!r}", lineno, name_tok.col)
                decl = _arrow_decl(cur, types)
                (ctors if kw.text == "ctor" else fns)[name_tok.text] = decl
            elif kw.text == "rule":
                lhs = _raw_term(cur)
                cur.next("arrow")
                rhs = _raw_term(cur)
                cur.done()
                raw_rules.append((lineno, lhs, rhs))
            else:
                raise ParseError(f"unknown keyword {kw.text!r}", lineno, kw.col)
        try:
            sig = Signature(tuple(types), ctors, fns)
        except TermError as e:
            raise ParseError(str(e), 1, 1) from None
        rules = []
        for idx, (lineno, lhs_raw, rhs_raw) in enumerate(raw_rules, 1):
            if lhs_raw.name not in fns:
                raise ParseError(f"rule root {lhs_raw.name!r} is not a defined symbol", lineno, lhs_raw.col)
            env: Dict[str, str] = {}
            lhs = _resolve(lhs_raw, sig, None, env, lineno)
            rhs = _resolve(rhs_raw, sig, lhs.sym and fns[lhs.sym].result, env, lineno)
            rules.append(Rule(lhs, rhs, idx))
    except ParseError as e:
        if path and not e.path:
            raise ParseError(e.msg, e.line, e.col, path) from None
        raise
    return Trs(sig, tuple(rules))


def parse_trs(path) -> Trs:
    p = resolve_path(path, ".trs")
    return parse_trs_text(p.read_text(encoding="utf-8"), str(p))


def print_trs(trs: Trs) -> str:
    sig = trs.signature
    out = ["types " + " ".join(sig.types)]
    w = max([len(s) for s in (*sig.constructors, *sig.defined)] or [0])

    def decl_line(kw, name, d):
        args = " ".join(d.args)
        return f"{kw} {name.ljust(w)} : {args + ' ' if args else ''}-> {d.result}"

    out += [decl_line("ctor", c, d) for c, d in sig.constructors.items()]
    out += [decl_line("fn  ", f, d) for f, d in sig.defined.items()]
    out += [f"rule {r.lhs} -> {r.rhs}" for r in trs.rules]
    return "\n".join(out) + "\n"


def load_trs(path, require_structure: bool = True) -> Trs:
    trs = parse_trs(path)
    if require_structure:
        rep = check_structure(trs)
        if rep.typing:
            i, msg = rep.typing[0]
            raise ParseError(f"rule {i}: {msg}", 0, 0, str(path))
    return trs


# -- signature files -----------------------------------------------------------


def _rational(cur: _Cursor) -> Fraction:
    return Fraction(cur.next("num").text)


def _annot(cur: _Cursor) -> ResourceVec:
    cur.next(text="[")
    es = []
    while not cur.accept("]"):
        es.append(_rational(cur))
    return ResourceVec(es)


def _annotated_args(cur: _Cursor, stop: str) -> List[Tuple[str, ResourceVec]]:
    """``T [..] , T [..]`` up to (not including) the ``stop`` token."""
    out = []
    t = cur.peek()
    if t is not None and t.text == stop:
        return out
    while True:
        base = cur.next("ident").text
        out.append((base, _annot(cur)))
        if not cur.accept(","):
            return out


def parse_sig_text(text: str, trs: Trs, path: str = "") -> AnnotatedSignature:
    sig = trs.signature
    schemes: Dict[str, ConstructorScheme] = {}
    decls: Dict[str, List[AnnotatedDecl]] = {}
    pending: Optional[Tuple[str, int, Dict[int, BasisEntry], int]] = None

    def close():
        nonlocal pending
        if pending is None:
            return
        name, deg, basis, lineno = pending
        missing = [j for j in range(1, deg + 1) if j not in basis]
        if missing:
            raise ParseError(f"scheme {name}: missing basis {missing[0]}", lineno, 1)
        d = sig.constructors[name]
        schemes[name] = ConstructorScheme(name, d.args, d.result, tuple(basis[j] for j in range(1, deg + 1)))
        pending = None

    try:
        for lineno, body in _lines(text):
            cur = _Cursor(_tokens(body, lineno), lineno, len(body) + 1)
            kw = cur.next("ident")
            if kw.text == "scheme":
                close()
                name_tok = cur.next("ident")
                name = name_tok.text
                if name not in sig.constructors:
                    raise ParseError(f"{name!r} is not a constructor", lineno, name_tok.col)
                if name in schemes:
                    raise ParseError(f"duplicate scheme for {name!r}", lineno, name_tok.col)
                preset = None
                if cur.accept("preset"):
                    ptok = cur.next("ident")
                    if ptok.text not in PRESETS:
                        raise ParseError(f"unknown preset {ptok.text!r}", lineno, ptok.col)
                    preset = ptok.text
                cur.next(text="deg")
                deg = int(cur.next("num").text)
                cur.done()
                if preset is not None:
                    schemes[name] = preset_scheme(preset, name, sig, deg)
                else:
                    pending = (name, deg, {}, lineno)
            elif kw.text == "basis":
                if pending is None:
                    raise ParseError("basis line outside an explicit scheme", lineno, kw.col)
                name, deg, basis, _ = pending
                jt = cur.next("num")
                j = int(jt.text)
                if not 1 <= j <= deg or j in basis:
                    raise ParseError(f"bad basis index {j} for degree {deg}", lineno, jt.col)
                cur.next(text=":")
                args = _annotated_args(cur, "cost")
                cur.next(text="cost")
                cost = _rational(cur)
                cur.done()
                want = sig.constructors[name].args
                if tuple(b for b, _ in args) != want:
                    raise ParseError(
                        f"basis {j} of {name}: argument types {' '.join(b for b, _ in args) or '()'} "
                        f"do not match {' '.join(want) or '()'}",
                        lineno,
                        kw.col,
                    )
                basis[j] = BasisEntry(tuple(a for _, a in args), cost)
            elif kw.text == "fn":
                close()
                name_tok = cur.next("ident")
                f = name_tok.text
                if f not in sig.defined:
                    raise ParseError(f"{f!r} is not a defined symbol", lineno, name_tok.col)
                cur.next(text=":")
                args = _annotated_args(cur, "->")
                cur.next("arrow")
                rbase = cur.next("ident").text
                rann = _annot(cur)
                cur.next(text="cost")
                cost = _rational(cur)
                cur.done()
                d = AnnotatedDecl(
                    tuple(AnnotatedType(b, a) for b, a in args), AnnotatedType(rbase, rann), cost
                )
                sd = sig.defined[f]
                if tuple(b for b, _ in args) != sd.args or rbase != sd.result:
                    raise ParseError(f"declaration does not fit the type of {f}", lineno, name_tok.col)
                decls.setdefault(f, []).append(d)
            else:
                raise ParseError(f"unknown keyword {kw.text!r}", lineno, kw.col)
        close()
        try:
            return AnnotatedSignature(sig, schemes, {f: tuple(ds) for f, ds in decls.items()})
        except AnnotationError as e:
            raise ParseError(str(e), 0, 0) from None
    except ParseError as e:
        if path and not e.path:
            raise ParseError(e.msg, e.line, e.col, path) from None
        raise


def parse_sig(path, trs: Trs) -> AnnotatedSignature:
    p = resolve_path(path, ".sig")
    return parse_sig_text(p.read_text(encoding="utf-8"), trs, str(p))


def format_annot(base: str, v: ResourceVec) -> str:
    return f"{base} {v}"


def print_sig(asig: AnnotatedSignature) -> str:
    out = []
    for c in asig.simple.constructors:
        s = asig.schemes[c]
        if s.preset is not None:
            out.append(f"scheme {c} preset {s.preset} deg {s.degree}")
            continue
        out.append(f"scheme {c} deg {s.degree}")
        for j, b in enumerate(s.basis, 1):
            args = " , ".join(format_annot(t, a) for t, a in zip(s.arg_types, b.args))
            out.append(f"  basis {j} : {args + ' ' if args else ''}cost {b.cost}")
    for f in asig.simple.defined:
        for d in asig.decls(f):
            args = " , ".join(format_annot(a.base, a.annot) for a in d.args)
            res = format_annot(d.result.base, d.result.annot)
            out.append(f"fn {f} : {args + ' ' if args else ''}-> {res} cost {d.cost}")
    return "\n".join(out) + "\n"


def parse_annotated_type(text: str, sig: Signature) -> AnnotatedType:
    """``List[1 3]`` or ``List [1 3]``; a bare base type means ``[]``."""
    toks = _tokens(text, 1)
    cur = _Cursor(toks, 1, len(text) + 1)
    base = cur.next("ident")
    if base.text not in sig.types:
        raise ParseError(f"unknown type {base.text!r}", 1, base.col)
    ann = _annot(cur) if cur.peek() is not None else ResourceVec()
    cur.done()
    return AnnotatedType(base.text, ann)


def resolve_path(path, suffix: str = "") -> Path:
    """A path as given, or the bundled fixture of that name (suffix optional)."""
    p = Path(path)
    if p.exists():
        return p
    for q in (FIXTURES / p.name, FIXTURES / (p.name + suffix)):
        if q.is_file():
            return q
    raise FileNotFoundError(str(path))
