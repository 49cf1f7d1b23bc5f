import pytest

from amortrs.annot import AnnotatedType, vec
from amortrs.syntax import (
    FIXTURES,
    ParseError,
    parse_annotated_type,
    parse_sig,
    parse_sig_text,
    parse_subst,
    parse_term,
    parse_trs,
    parse_trs_text,
    print_sig,
    print_trs,
)
from oracle import lst, num

TRS_FILES = ["queue.trs", "exp.trs", "tri.trs"]
SIG_FILES = [("queue.trs", "queue.sig"), ("exp.trs", "exp-nat.sig"), ("tri.trs", "tri.sig")]


@pytest.mark.parametrize("name", TRS_FILES)
def test_trs_round_trip_is_byte_exact(name):
    text = (FIXTURES / name).read_text(encoding="utf-8")
    assert print_trs(parse_trs_text(text)) == text


@pytest.mark.parametrize("trs_name,sig_name", SIG_FILES)
def test_sig_round_trip_is_byte_exact(trs_name, sig_name):
    trs = parse_trs(trs_name)
    text = (FIXTURES / sig_name).read_text(encoding="utf-8")
    assert print_sig(parse_sig_text(text, trs)) == text


def test_queue_rules_in_order(queue):
    assert [str(r) for r in queue.rules[:3]] == [
        "checkF(queue(nil, r)) -> queue(rev(r), nil)",
        "checkF(queue(cons(x, xs), r)) -> queue(cons(x, xs), r)",
        "tail(queue(cons(x, f), r)) -> checkF(queue(f, r))",
    ]


def test_queue_signature_values(qsig):
    snoc = qsig.decls("snoc")[0]
    assert snoc.cost == 5
    assert snoc.args[0] == AnnotatedType("Queue", vec(0, 1))
    assert qsig.decls("enq")[0].args[0] == AnnotatedType("Nat", vec(6))
    assert qsig.schemes["queue"].degree == 2


def test_malformed_rule_reports_position():
    with pytest.raises(ParseError) as err:
        parse_trs_text("types Nat\nctor zero : -> Nat\nfn f : Nat -> Nat\nrule f(x -> x\n")
    assert (err.value.line, err.value.col) == (4, 10)


def test_arity_error(queue):
    with pytest.raises(ParseError, match="arity|argument"):
        parse_term("cons(zero)", queue.signature)


def test_unknown_symbol(queue):
    with pytest.raises(ParseError):
        parse_term("frob(zero)", queue.signature)


def test_bad_sig_is_rejected(queue):
    with pytest.raises(ParseError):
        parse_sig_text("fn snoc : Queue [0 1] -> Queue [0 1] cost 5\n", queue)


def test_parse_subst_and_types(queue):
    s = parse_subst("x=s(zero), xs=cons(zero, nil)", queue.signature)
    assert s == {"x": num(1), "xs": lst(num(0))}
    assert parse_annotated_type("List[1 3]", queue.signature) == AnnotatedType("List", vec(1, 3))
    assert parse_annotated_type("Nat", queue.signature) == AnnotatedType("Nat")


def test_variable_types_inferred_from_position(queue):
    t = parse_term("snoc(q, n)", queue.signature)
    assert [v.type for v in t.args] == ["Queue", "Nat"]
