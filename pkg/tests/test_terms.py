import pytest

from amortrs.syntax import parse_trs_text
from amortrs.terms import (
    App,
    Enumerator,
    TermError,
    Var,
    apply_subst,
    check_completely_defined,
    check_structure,
    check_term,
    is_basic,
    is_value,
    match_pattern,
    replace_at,
    substitutions,
    term_size,
    unify,
)
from oracle import c, lst, num


def test_queue_structure(queue):
    rep = check_structure(queue)
    assert rep.ok
    assert len(queue.rules) == 12


def test_values_and_basic_terms(queue, term):
    sig = queue.signature
    assert is_value(term("queue(nil, cons(zero, nil))"), sig)
    assert not is_value(term("rev(nil)"), sig)
    assert is_basic(term("rev(cons(zero, nil))"), sig)
    assert not is_basic(term("rev(rev(nil))"), sig)


def test_term_size_counts_symbols(term):
    assert term_size(term("snoc(queue(nil, nil), s(zero))")) == 6


def test_ill_typed_term_rejected(queue):
    with pytest.raises(TermError):
        check_term(App("cons", (App("nil"), App("nil"))), queue.signature)


def test_match_and_apply(term):
    pat = term("queue(cons(x, f), r)")
    subj = term("queue(cons(zero, nil), cons(s(zero), nil))")
    s = match_pattern(pat, subj)
    assert s == {"x": c("zero"), "f": lst(), "r": lst(num(1))}
    assert apply_subst(pat, s) == subj
    assert match_pattern(pat, term("queue(nil, nil)")) is None


def test_unbound_variable_names_it(term):
    from amortrs.terms import UnboundVariable

    with pytest.raises(UnboundVariable, match="xs"):
        apply_subst(term("rev(xs)", xs="List"), {})


def test_replace_at_and_unify(term):
    t = term("snoc(queue(nil, nil), zero)")
    assert replace_at(t, (1,), num(2)) == term("snoc(queue(nil, nil), s(s(zero)))")
    u = unify(term("queue(x, nil)", x="List"), term("queue(nil, y)", y="List"))
    assert u == {"x": lst(), "y": lst()}


def test_enumeration_counts(queue):
    en = Enumerator(queue.signature)
    # Nat values of size k: s^(k-1) applied to zero or errorHead
    assert [len(en.values_of_size("Nat", k)) for k in range(1, 5)] == [2, 2, 2, 2]
    basic = [sum(1 for t in en.basic_terms(n) if t._size == n) for n in range(1, 9)]
    assert basic == [0, 6, 5, 9, 12, 28, 52, 120]


def test_substitutions_cover_product(queue):
    en = Enumerator(queue.signature)
    vs = [Var("x", "Nat"), Var("xs", "List")]
    subs = list(substitutions(vs, en, 3))
    assert len(subs) == len(list(en.values("Nat", 3))) * len(list(en.values("List", 3)))


def test_queue_not_completely_defined(queue):
    # error constants are constructors of Queue and Nat that no rule consumes
    rep = check_completely_defined(queue, 7)
    assert not rep.ok
    bad = {str(t) for t, _ in rep.counterexamples}
    assert {"checkF(errorTail)", "enq(errorHead)", "head(errorTail)", "tail(errorTail)"} <= bad


def test_completely_defined_trivial_failures():
    text = "types Nat\nctor zero : -> Nat\nctor s : Nat -> Nat\nfn f : Nat -> Nat\n"
    rep = check_completely_defined(parse_trs_text(text + "rule f(s(x)) -> x\n"), 2)
    assert not rep.ok and str(rep.counterexamples[0][0]) == "f(zero)"
    rep = check_completely_defined(parse_trs_text(text), 2)
    assert [str(t) for t, _ in rep.counterexamples] == ["f(zero)"]


def test_completely_defined_pass(exp):
    assert check_completely_defined(exp, 5).ok


def test_overlap_and_nonlinearity_detected():
    text = (
        "types Nat\nctor zero : -> Nat\nctor s : Nat -> Nat\nfn f : Nat Nat -> Nat\n"
        "rule f(x, x) -> x\nrule f(zero, y) -> y\n"
    )
    rep = check_structure(parse_trs_text(text))
    assert rep.left_linear == [1]
    assert rep.overlaps == [(1, 2)]
