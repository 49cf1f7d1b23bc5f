from fractions import Fraction

import pytest

from amortrs.annot import (
    AnnotationError,
    ResourceVec,
    auto_preset,
    first,
    instantiate_ctor,
    interleave,
    preset_scheme,
    shift,
    shift_scheme,
    vec,
    vec_add,
    vec_leq,
    vec_scale,
)

half = Fraction(1, 2)


def test_addition():
    assert vec_add(vec(1, 2), vec(3, 4, 5)) == vec(4, 6, 5)
    assert vec_add(vec(), vec(7)) == vec(7)
    assert vec_add(vec(half, half), vec(half)) == vec(1, half)


def test_scaling_trims_zeros():
    assert vec_scale(2, vec(1, 3)) == vec(2, 6)
    assert vec_scale(0, vec(5, 7)) == vec()
    assert len(vec_scale(0, vec(5, 7))) == 0
    assert vec_scale(half, vec(4)) == vec(2)


def test_order():
    assert vec_leq(vec(1, 2), vec(3, 4, 5))
    assert not vec_leq(vec(1, 2, 1), vec(3, 4))
    assert vec_leq(vec(3, 1), vec(3, 1))


def test_shift():
    assert shift(vec(3, 7)) == vec(10, 7)
    assert shift(vec(7)) == vec(7)
    assert shift(vec(1, 2, 3)) == vec(3, 5, 3)


def test_interleave():
    assert interleave(vec(1), vec(3)) == vec(1, 3)
    assert interleave(vec(1, 2), vec(3, 4, 5)) == vec(1, 3, 2, 4, 0, 5)
    assert interleave(vec(), vec()) == vec()


def test_first():
    assert first(vec(3, 7)) == 3
    assert first(vec()) == 0
    assert first(vec(7)) == 7


def test_negative_entries_rejected():
    with pytest.raises(AnnotationError):
        ResourceVec([1, -1])


def test_cons_scheme_instances():
    cons = shift_scheme("cons", ("Nat", "List"), "List", 2)
    d = instantiate_ctor(cons, vec(7))
    assert [a.annot for a in d.args] == [vec(), vec(7)] and d.cost == 7
    d = instantiate_ctor(cons, vec(3, 7))
    assert [a.annot for a in d.args] == [vec(), vec(10, 7)] and d.cost == 3
    d = instantiate_ctor(cons, vec())
    assert all(not a.annot for a in d.args) and d.cost == 0


def test_degree_exceeded(qsig):
    with pytest.raises(AnnotationError, match="degree"):
        instantiate_ctor(qsig.schemes["cons"], vec(1, 1))


def test_presets_for_queue(queue):
    sig = queue.signature
    assert auto_preset("nil", sig) == "zero"
    assert auto_preset("cons", sig) == "shift"
    assert auto_preset("queue", sig) == "interleave"
    q = preset_scheme("interleave", "queue", sig, 1)
    d = instantiate_ctor(q, vec(1, 3))
    assert [a.annot for a in d.args] == [vec(1), vec(3)] and d.cost == 0


def test_queue_scheme_matches_fixture(qsig, queue):
    gen = preset_scheme("interleave", "queue", queue.signature, 1)
    assert gen.basis == qsig.schemes["queue"].basis
