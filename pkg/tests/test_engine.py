import pytest

from amortrs.engine import (
    CompiledTrs,
    DivergenceSuspected,
    KERNEL,
    Stuck,
    _kernel_py,
    bigstep,
    contract,
    derivation,
    dheight,
    innermost_redexes,
    is_normal_form,
    normal_form,
    rc_oracle,
    rc_table,
    rewrite_step,
    smallstep_closure,
)
from amortrs.syntax import parse_trs_text
from amortrs.terms import Enumerator, Var, apply_subst
from oracle import c, exp_dheight, lst, num, queue_eval


def test_kernel_selected():
    assert KERNEL in ("cython", "python")


def test_rule_contraction(queue, term):
    assert contract(term("enq(zero)"), queue)[0] == term("queue(nil, nil)")
    red = term("snoc(queue(nil, nil), zero)")
    assert contract(red, queue)[0] == term("checkF(queue(nil, cons(zero, nil)))")
    assert rewrite_step(term("queue(nil, nil)"), queue) is None


def test_dheight_examples(queue, term):
    assert dheight(term("enq(zero)"), queue) == 1
    assert dheight(term("enq(s(zero))"), queue) == 7
    assert dheight(term("queue(nil, nil)"), queue) == 0


def test_enq_family_matches_oracle(queue):
    for n in range(10):
        assert dheight(c("enq", num(n)), queue) == queue_eval(c("enq", num(n)))[1]
    assert [dheight(c("enq", num(n)), queue) for n in range(1, 9)] == [3 * n + 4 for n in range(1, 9)]


def test_stuck_terms_are_normal_forms(queue, term):
    t = term("checkF(errorTail)")
    assert is_normal_form(t, queue) and innermost_redexes(t, queue) == []
    assert normal_form(term("tail(enq(zero))"), queue) == term("errorTail")
    assert derivation(term("head(tail(enq(zero)))"), queue)[-1] == term("head(errorTail)")


def test_innermost_redexes_exclude_stuck(queue, term):
    t = term("snoc(checkF(errorTail), head(enq(zero)))")
    assert [str(r) for _, r in innermost_redexes(t, queue)] == ["enq(zero)"]


def test_bigstep_examples(queue, term):
    n = Var("n", "Nat")
    r = bigstep({"n": num(0)}, c("enq", n), queue)
    assert r.value == term("queue(nil, nil)") and r.count == 1
    assert bigstep({"x": num(0)}, Var("x", "Nat"), queue).count == 0
    assert bigstep({"n": num(1)}, c("enq", n), queue).count == 7


def test_bigstep_stuck(queue, term):
    with pytest.raises(Stuck):
        bigstep({}, term("tail(tail(enq(zero)))"), queue)


def test_smallstep_examples(queue):
    n = Var("n", "Nat")
    tr = smallstep_closure({"n": num(0)}, c("enq", n), queue)
    assert tr.total == 1
    assert apply_subst(tr.final_term, tr.final_subst) == c("queue", lst(), lst())
    assert smallstep_closure({"x": num(0)}, Var("x", "Nat"), queue).total == 0
    tr = smallstep_closure({"n": num(1)}, c("enq", n), queue)
    assert tr.total == 7
    assert tr.lines()[-1].startswith("7 | ")


def test_smallstep_stuck(queue, term):
    with pytest.raises(Stuck):
        smallstep_closure({}, term("head(errorTail)"), queue)


def test_rc_values(queue):
    # rev(nil) needs two steps, more than enq(zero)
    r2 = rc_oracle(queue, 2)
    assert (r2.value, str(r2.witness), r2.terms) == (2, "rev(nil)", 6)
    r3 = rc_oracle(queue, 3)
    assert (r3.value, str(r3.witness)) == (7, "enq(s(zero))")
    assert rc_oracle(queue, 0).value == 0
    assert [r.value for r in rc_table(queue, 8)] == [0, 0, 2, 7, 10, 13, 16, 19, 22]


def test_rc_table_counts(queue):
    assert [r.terms for r in rc_table(queue, 8)] == [0, 0, 6, 11, 20, 32, 60, 112, 232]


def test_rc_matches_oracle(queue):
    en = Enumerator(queue.signature)
    for n in range(9):
        best = max((queue_eval(t)[1] for t in en.basic_terms(n)), default=0)
        assert rc_oracle(queue, n).value == best


def test_exponential_family(exp):
    assert [dheight(c("e", num(n)), exp) for n in range(11)] == [exp_dheight(n) for n in range(11)]


def test_fuel_exhaustion():
    trs = parse_trs_text("types Nat\nctor zero : -> Nat\nfn f : Nat -> Nat\nrule f(x) -> f(x)\n")
    with pytest.raises(DivergenceSuspected):
        dheight(c("f", num(0)), trs, fuel=50)
    with pytest.raises(DivergenceSuspected):
        bigstep({}, c("f", num(0)), trs, fuel=50)


def test_pure_kernel_agrees(queue):
    fast, slow = CompiledTrs(queue), CompiledTrs(queue, impl=_kernel_py)
    for t in Enumerator(queue.signature).all_ground_terms(6):
        assert fast.normalize(t) == slow.normalize(t)
        assert fast.normalize(t, strategy="ri") == slow.normalize(t, strategy="ri")


def test_strategies_agree(queue):
    for t in Enumerator(queue.signature).all_ground_terms(6):
        assert dheight(t, queue, strategy="li") == dheight(t, queue, strategy="ri")
        assert normal_form(t, queue, strategy="li") == normal_form(t, queue, strategy="ri")


def test_unknown_strategy(queue, term):
    with pytest.raises(ValueError):
        dheight(term("rev(nil)"), queue, strategy="outermost")
