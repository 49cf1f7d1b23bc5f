"""Resource annotations: exact vectors, annotated declarations and constructor schemes."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .terms import Signature


class AnnotationError(Exception):
    pass


def _frac(x) -> Fraction:
    q = x if isinstance(x, Fraction) else Fraction(x)
    if q < 0:
        raise AnnotationError(f"negative annotation entry {q}")
    return q


@dataclass(frozen=True, init=False)
class ResourceVec:
    """Vector of nonnegative rationals, stored with trailing zeros trimmed."""

    entries: Tuple[Fraction, ...]

    def __init__(self, entries: Iterable = ()):
        es = [_frac(e) for e in entries]
        while es and es[-1] == 0:
            es.pop()
        object.__setattr__(self, "entries", tuple(es))

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i: int) -> Fraction:
        """Zero-padded component access (0-based)."""
        if 0 <= i < len(self.entries):
            return self.entries[i]
        if i < 0:
            raise IndexError(i)
        return Fraction(0)

    def __iter__(self):
        return iter(self.entries)

    def padded(self, n: int) -> Tuple[Fraction, ...]:
        return tuple(self[i] for i in range(max(n, len(self))))

    def __add__(self, other: "ResourceVec") -> "ResourceVec":
        return vec_add(self, other)

    def __rmul__(self, lam) -> "ResourceVec":
        return vec_scale(lam, self)

    def __le__(self, other: "ResourceVec") -> bool:
        return vec_leq(self, other)

    def __ge__(self, other: "ResourceVec") -> bool:
        return vec_leq(other, self)

    def max(self) -> Fraction:
        return max(self.entries, default=Fraction(0))

    def __str__(self):
        return "[" + " ".join(str(e) for e in self.entries) + "]"

    def __repr__(self):
        return f"ResourceVec({self})"


ZERO = ResourceVec()


def vec(*entries) -> ResourceVec:
    return ResourceVec(entries)


def unit(j: int) -> ResourceVec:
    """(0, ..., 0, 1) of length j (1-based)."""
    return ResourceVec([0] * (j - 1) + [1])


def vec_add(p: ResourceVec, q: ResourceVec) -> ResourceVec:
    n = max(len(p), len(q))
    return ResourceVec(p[i] + q[i] for i in range(n))


def vec_scale(lam, p: ResourceVec) -> ResourceVec:
    lam = _frac(lam)
    return ResourceVec(lam * e for e in p)


def vec_leq(p: ResourceVec, q: ResourceVec) -> bool:
    n = max(len(p), len(q))
    return all(p[i] <= q[i] for i in range(n))


def shift(p: ResourceVec) -> ResourceVec:
    k = len(p)
    return ResourceVec([p[i] + p[i + 1] for i in range(k - 1)] + ([p[k - 1]] if k else []))


def interleave(p: ResourceVec, q: ResourceVec) -> ResourceVec:
    n = max(len(p), len(q))
    out: List[Fraction] = []
    for i in range(n):
        out += [p[i], q[i]]
    return ResourceVec(out)


def first(p: ResourceVec) -> Fraction:
    return p[0]


@dataclass(frozen=True)
class AnnotatedType:
    base: str
    annot: ResourceVec = ZERO

    def __str__(self):
        return f"{self.base}{self.annot}"


@dataclass(frozen=True)
class AnnotatedDecl:
    args: Tuple[AnnotatedType, ...]
    result: AnnotatedType
    cost: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        object.__setattr__(self, "cost", _frac(self.cost))

    def __str__(self):
        args = " , ".join(str(a) for a in self.args)
        return f"<{args} -> {self.result}, {self.cost}>"


def decl_add(a: AnnotatedDecl, b: AnnotatedDecl) -> AnnotatedDecl:
    return AnnotatedDecl(
        tuple(AnnotatedType(x.base, x.annot + y.annot) for x, y in zip(a.args, b.args)),
        AnnotatedType(a.result.base, a.result.annot + b.result.annot),
        a.cost + b.cost,
    )


def decl_scale(lam, a: AnnotatedDecl) -> AnnotatedDecl:
    return AnnotatedDecl(
        tuple(AnnotatedType(x.base, vec_scale(lam, x.annot)) for x in a.args),
        AnnotatedType(a.result.base, vec_scale(lam, a.result.annot)),
        _frac(lam) * a.cost,
    )


@dataclass(frozen=True)
class BasisEntry:
    """Argument annotations and cost for the unit result annotation e_j."""

    args: Tuple[ResourceVec, ...]
    cost: Fraction

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        object.__setattr__(self, "cost", _frac(self.cost))


@dataclass(frozen=True)
class ConstructorScheme:
    symbol: str
    arg_types: Tuple[str, ...]
    result_type: str
    basis: Tuple[BasisEntry, ...]
    preset: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "arg_types", tuple(self.arg_types))
        object.__setattr__(self, "basis", tuple(self.basis))
        for j, b in enumerate(self.basis, 1):
            if len(b.args) != len(self.arg_types):
                raise AnnotationError(
                    f"scheme {self.symbol}: basis {j} has {len(b.args)} arguments, "
                    f"expected {len(self.arg_types)}"
                )

    @property
    def degree(self) -> int:
        return len(self.basis)


def instantiate_ctor(scheme: ConstructorScheme, result: ResourceVec) -> AnnotatedDecl:
    """The unique declaration of ``scheme`` for result annotation ``result``."""
    if len(result) > scheme.degree:
        raise AnnotationError(
            f"annotation {result} of {scheme.symbol} exceeds scheme degree {scheme.degree}"
        )
    n = len(scheme.arg_types)
    args = [ZERO] * n
    cost = Fraction(0)
    for j, r in enumerate(result):
        if r == 0:
            continue
        b = scheme.basis[j]
        args = [a + vec_scale(r, u) for a, u in zip(args, b.args)]
        cost += r * b.cost
    return AnnotatedDecl(
        tuple(AnnotatedType(t, a) for t, a in zip(scheme.arg_types, args)),
        AnnotatedType(scheme.result_type, result),
        cost,
    )


# -- scheme presets --------------------------------------------------------


def shift_scheme(symbol: str, arg_types: Sequence[str], result_type: str, degree: int) -> ConstructorScheme:
    """Arguments of the result type receive the shifted annotation and the
    cost is the first entry; without such an argument the cost is 0."""
    recursive = result_type in arg_types
    basis = []
    for j in range(1, degree + 1):
        e = unit(j)
        sh = shift(e)
        args = tuple(sh if t == result_type else ZERO for t in arg_types)
        basis.append(BasisEntry(args, first(e) if recursive else 0))
    return ConstructorScheme(symbol, tuple(arg_types), result_type, tuple(basis), "shift")


def zero_scheme(symbol: str, arg_types: Sequence[str], result_type: str, degree: int) -> ConstructorScheme:
    """Constant-zero: every argument annotation and the cost are 0."""
    basis = [BasisEntry(tuple(ZERO for _ in arg_types), 0) for _ in range(degree)]
    return ConstructorScheme(symbol, tuple(arg_types), result_type, tuple(basis), "zero")


def interleave_scheme(symbol: str, arg_types: Sequence[str], result_type: str, degree: int) -> ConstructorScheme:
    """Result annotation is the n-way interleaving of the argument annotations; cost 0.

    ``degree`` is the per-argument degree, so the scheme degree is n * degree.
    """
    n = len(arg_types)
    if n == 0:
        return zero_scheme(symbol, arg_types, result_type, degree)
    basis = []
    for j in range(n * degree):
        pos, comp = j % n, j // n
        args = tuple(unit(comp + 1) if i == pos else ZERO for i in range(n))
        basis.append(BasisEntry(args, 0))
    return ConstructorScheme(symbol, tuple(arg_types), result_type, tuple(basis), "interleave")


PRESETS = {"shift": shift_scheme, "zero": zero_scheme, "interleave": interleave_scheme}


def preset_scheme(name: str, symbol: str, sig: Signature, degree: int) -> ConstructorScheme:
    try:
        make = PRESETS[name]
    except KeyError:
        raise AnnotationError(f"unknown scheme preset {name!r}") from None
    d = sig.constructors[symbol]
    return make(symbol, d.args, d.result, degree)


def auto_preset(symbol: str, sig: Signature) -> str:
    """Preset used when none is given: zero for constants, shift for
    recursive constructors, interleave for tuple-like ones."""
    d = sig.constructors[symbol]
    if not d.args:
        return "zero"
    if d.result in d.args:
        return "shift"
    return "interleave"


# -- annotated signatures ---------------------------------------------------


@dataclass(frozen=True)
class AnnotatedSignature:
    simple: Signature
    schemes: Mapping[str, ConstructorScheme]
    defined_decls: Mapping[str, Tuple[AnnotatedDecl, ...]]

    def __post_init__(self):
        for c in self.simple.constructors:
            if c not in self.schemes:
                raise AnnotationError(f"no annotation scheme for constructor {c!r}")
        for f, decls in self.defined_decls.items():
            if f not in self.simple.defined:
                raise AnnotationError(f"declaration for unknown defined symbol {f!r}")
            sd = self.simple.defined[f]
            seen = set()
            for d in decls:
                if tuple(a.base for a in d.args) != sd.args or d.result.base != sd.result:
                    raise AnnotationError(f"declaration {d} does not fit the type of {f}")
                if d.result.annot in seen:
                    raise AnnotationError(
                        f"{f} has more than one declaration with result {d.result}"
                    )
                seen.add(d.result.annot)

    def decls(self, f: str) -> Tuple[AnnotatedDecl, ...]:
        return tuple(self.defined_decls.get(f, ()))

    def lookup(self, sym: str, result: ResourceVec) -> AnnotatedDecl:
        """The declaration of ``sym`` for the given result annotation."""
        if sym in self.schemes:
            return instantiate_ctor(self.schemes[sym], result)
        for d in self.defined_decls.get(sym, ()):
            if d.result.annot == result:
                return d
        raise AnnotationError(f"no declaration of {sym} with result annotation {result}")

    def degree(self, typ: str) -> int:
        """Annotation length used for ``typ``: the largest scheme degree of its
        constructors or annotation length mentioned in a declaration."""
        k = 0
        for c in self.simple.constructors_of(typ):
            k = max(k, self.schemes[c].degree)
        for decls in self.defined_decls.values():
            for d in decls:
                for at in (*d.args, d.result):
                    if at.base == typ:
                        k = max(k, len(at.annot))
        for s in self.schemes.values():
            for b in s.basis:
                for t, a in zip(s.arg_types, b.args):
                    if t == typ:
                        k = max(k, len(a))
        return k
