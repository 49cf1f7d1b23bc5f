from fractions import Fraction

import pytest

from amortrs.annot import AnnotatedDecl, AnnotatedSignature, AnnotatedType, vec
from amortrs.interp import (
    InterpretationError,
    bound_report,
    check_agreement,
    check_orientation,
    derive_interpretation,
    family_bounds,
    interpret_ground,
    is_affine,
)
from amortrs.potential import phi_ground
from amortrs.terms import Enumerator
from oracle import c, lst, num

QUEUE = AnnotatedType("Queue", vec(0, 1))


def test_table_entries(qsig):
    interp = derive_interpretation(qsig)
    assert str(interp.gamma("snoc", vec(0, 1))) == "x1 + x2 + 5"
    assert str(interp.gamma("cons", vec(3))) == "x1 + x2 + 3"
    assert str(interp.gamma("queue", vec(0, 1))) == "x1 + x2 + 0"
    assert interp.gamma("zero", vec(4)).constant == 0
    assert len([k for k in interp.table if k[0] in qsig.simple.defined]) == 7


def zeroed(asig):
    decls = {}
    for f, ds in asig.defined_decls.items():
        decls[f] = tuple(
            AnnotatedDecl(tuple(AnnotatedType(a.base) for a in d.args), AnnotatedType(d.result.base), 0) for d in ds
        )
    return AnnotatedSignature(asig.simple, asig.schemes, decls)


def test_all_zero_signature(queue, qsig):
    interp = derive_interpretation(zeroed(qsig))
    assert all(m.constant == 0 for m in interp.table.values())
    for t in Enumerator(queue.signature).ground_terms("Queue", 5):
        assert interpret_ground(t, AnnotatedType("Queue"), interp) == 0


def test_check_f_example(qsig):
    interp = derive_interpretation(qsig)
    for r in range(5):
        rs = lst(*[num(1)] * r)
        t = c("checkF", c("queue", lst(), rs))
        assert interpret_ground(t, QUEUE, interp) == interpret_ground(rs, AnnotatedType("List", vec(1)), interp) + 3 == r + 3


def test_rule_one_and_ten(queue, qsig):
    interp = derive_interpretation(qsig)
    r = lst(num(0), num(0))
    lhs = c("checkF", c("queue", lst(), r))
    rhs = c("queue", c("rev", r), lst())
    assert interpret_ground(lhs, QUEUE, interp) == 5
    assert interpret_ground(rhs, QUEUE, interp) == 4
    lhs = c("head", c("queue", lst(num(0)), lst()))
    assert interpret_ground(lhs, AnnotatedType("Nat"), interp) >= 1
    assert interpret_ground(num(0), AnnotatedType("Nat"), interp) == 0


def test_values_agree_with_potential(qsig):
    interp = derive_interpretation(qsig)
    for v in Enumerator(qsig.simple).values("Queue", 8):
        assert interpret_ground(v, QUEUE, interp) == phi_ground(v, QUEUE, qsig)


def test_agreement_sweep(qsig):
    rep = check_agreement(qsig, 6)
    assert rep.ok and rep.checked > 1000


def test_missing_declaration(qsig, term):
    with pytest.raises(InterpretationError):
        interpret_ground(term("rev(nil)"), AnnotatedType("List", vec(1)), derive_interpretation(qsig))


def test_orientation(queue, qsig):
    rep = check_orientation(queue, qsig, 4, 6)
    assert rep.ok and rep.instances > 0 and rep.steps > 0
    assert rep.min_gap >= 1 and rep.natural


def test_orientation_catches_undertyping(queue, qsig):
    from dataclasses import replace

    decls = dict(qsig.defined_decls)
    decls["rev"] = tuple(replace(d, cost=1) for d in decls["rev"])
    rep = check_orientation(queue, AnnotatedSignature(qsig.simple, qsig.schemes, decls), 3, 4)
    assert not rep.ok


def test_bound_report(queue, qsig):
    rep = bound_report(queue, qsig, 8)
    assert rep.ok
    assert [r.oracle for r in rep.rows] == [0, 0, 2, 7, 10, 13, 16, 19, 22]
    assert [r.bound for r in rep.rows] == [0, 0, 4, 7, 13, 19, 25, 31, 37]
    assert rep.rows[0].oracle <= rep.rows[0].bound == 0
    assert rep.records()[3] == "3, 7, 7"


def test_enq_family_affine(qsig):
    bounds = family_bounds([c("enq", num(n)) for n in range(9)], qsig)
    assert bounds == [6 * n + 1 for n in range(9)]
    assert is_affine(bounds)
    assert not is_affine([Fraction(n * n) for n in range(4)])


def test_quadratic_bound(tri, trisig):
    rep = bound_report(tri, trisig, 9)
    assert rep.ok
    tris = family_bounds([c("tri", lst(*[num(0)] * n)) for n in range(6)], trisig)
    assert not is_affine(tris)
    assert tris == [1 + 3 * n + 2 * n * (n - 1) // 2 for n in range(6)]
