from hypothesis import given, settings
from hypothesis import strategies as st

from amortrs.annot import (
    AnnotatedSignature,
    AnnotatedType,
    ResourceVec,
    decl_add,
    decl_scale,
    instantiate_ctor,
    interleave,
    shift,
    shift_scheme,
    vec_add,
    vec_leq,
    vec_scale,
    zero_scheme,
)
from amortrs.constraints import ConstraintSystem, LinExpr, solve_feasible, solve_minimize, validate, verify_certificate
from amortrs.engine import CompiledTrs, Stuck, _kernel_py, bigstep, dheight, normal_form, smallstep_closure
from amortrs.interp import derive_interpretation, interpret_ground
from amortrs.potential import check_sharing, check_subtyping, phi_ground, phi_value
from amortrs.syntax import parse_sig, parse_trs
from amortrs.terms import App, Enumerator, Var, apply_subst, match_pattern, variables
from oracle import binomial_potential, length, lst, num, queue_eval

QUEUE = parse_trs("queue.trs")
QSIG = parse_sig("queue.sig", QUEUE)
GROUND = list(Enumerator(QUEUE.signature).all_ground_terms(7))
BASIC = list(Enumerator(QUEUE.signature).basic_terms(7))

rationals = st.fractions(min_value=0, max_value=8, max_denominator=4)
vectors = st.lists(rationals, max_size=4).map(ResourceVec)
small = settings(max_examples=150, deadline=None)


def list_sig(degree):
    sig = QUEUE.signature
    schemes = {k: zero_scheme(k, d.args, d.result, degree) for k, d in sig.constructors.items()}
    schemes["cons"] = shift_scheme("cons", ("Nat", "List"), "List", degree)
    schemes["s"] = shift_scheme("s", ("Nat",), "Nat", degree)
    return AnnotatedSignature(sig, schemes, {})


LIST4 = list_sig(4)


@small
@given(vectors, vectors, vectors)
def test_vector_addition_laws(p, q, r):
    assert vec_add(p, q) == vec_add(q, p)
    assert vec_add(vec_add(p, q), r) == vec_add(p, vec_add(q, r))
    assert vec_leq(p, vec_add(p, q))


@small
@given(rationals, rationals, vectors, vectors)
def test_scaling_laws(a, b, p, q):
    assert vec_scale(a, vec_add(p, q)) == vec_add(vec_scale(a, p), vec_scale(a, q))
    assert vec_scale(a + b, p) == vec_add(vec_scale(a, p), vec_scale(b, p))


@small
@given(vectors, vectors, rationals)
def test_shift_and_interleave_are_linear(p, q, a):
    assert shift(vec_add(p, q)) == vec_add(shift(p), shift(q))
    assert shift(vec_scale(a, p)) == vec_scale(a, shift(p))
    assert interleave(vec_add(p, p), vec_add(q, q)) == vec_scale(2, interleave(p, q))


@small
@given(vectors, vectors, rationals)
def test_superposition(p, q, a):
    cons = LIST4.schemes["cons"]
    assert instantiate_ctor(cons, vec_add(p, q)) == decl_add(instantiate_ctor(cons, p), instantiate_ctor(cons, q))
    assert instantiate_ctor(cons, vec_scale(a, p)) == decl_scale(a, instantiate_ctor(cons, p))


@small
@given(st.integers(0, 20), st.lists(st.integers(0, 5), max_size=4))
def test_list_potential_closed_form(n, p):
    v = lst(*[num(0)] * n)
    assert phi_value(v, AnnotatedType("List", ResourceVec(p)), LIST4) == binomial_potential(n, p)


@small
@given(st.integers(0, 12), vectors, st.data())
def test_sharing_and_subtyping(n, p, data):
    v = lst(*[num(i % 3) for i in range(n)])
    p1 = ResourceVec(data.draw(st.fractions(0, x, max_denominator=4)) if x else 0 for x in p)
    p2 = ResourceVec(x - y for x, y in zip(p.padded(len(p)), p1.padded(len(p))))
    assert check_sharing(v, p, p1, p2, "List", LIST4)
    assert check_subtyping(v, p, p1, "List", LIST4)


@small
@given(st.sampled_from(GROUND))
def test_match_apply_round_trip(t):
    for rule in QUEUE.rules:
        s = match_pattern(rule.lhs, t)
        if s is not None:
            assert apply_subst(rule.lhs, s) == t
            assert set(s) == {v.name for v in variables(rule.lhs)}


@small
@given(st.sampled_from(GROUND))
def test_kernels_and_oracle_agree(t):
    fast = CompiledTrs(QUEUE).normalize(t)
    slow = CompiledTrs(QUEUE, impl=_kernel_py).normalize(t)
    assert fast == slow == queue_eval(t)


@small
@given(st.sampled_from(GROUND))
def test_strategy_confluence(t):
    assert normal_form(t, QUEUE, strategy="li") == normal_form(t, QUEUE, strategy="ri")
    assert dheight(t, QUEUE, strategy="li") == dheight(t, QUEUE, strategy="ri")


@small
@given(st.sampled_from(BASIC))
def test_semantics_agree_on_basic_terms(t):
    xs = [Var(f"x{i}", a) for i, a in enumerate(QUEUE.signature.defined[t.sym].args)]
    sigma = {x.name: v for x, v in zip(xs, t.args)}
    probe = App(t.sym, tuple(xs))
    try:
        big = bigstep(sigma, probe, QUEUE)
    except Stuck:
        return
    small_ = smallstep_closure(sigma, probe, QUEUE)
    assert big.count == small_.total == dheight(t, QUEUE)
    assert apply_subst(small_.final_term, small_.final_subst) == big.value


@small
@given(st.sampled_from(BASIC))
def test_potential_pays_for_each_step(t):
    # ground potential drops by at least one per innermost step
    d = QSIG.decls(t.sym)[0]
    ct = CompiledTrs(QUEUE)
    cur = ct.encode(t)
    prev = phi_ground(t, d.result, QSIG)
    while True:
        nxt, _ = ct.rewriter.step(cur)
        if nxt is None:
            break
        cur = nxt
        g = phi_ground(ct.decode(cur), d.result, QSIG, exact=False)
        assert g <= prev - 1
        prev = g


@small
@given(st.sampled_from(GROUND))
def test_interpretation_equals_potential(t):
    interp = derive_interpretation(QSIG)
    typ = QUEUE.signature.decl(t.sym).result
    for a in (ResourceVec(), ResourceVec([0, 1]), ResourceVec([1]), ResourceVec([6])):
        at = AnnotatedType(typ, a)
        try:
            phi = phi_ground(t, at, QSIG)
        except Exception:
            continue
        assert interpret_ground(t, at, interp) == phi


linear = st.lists(st.integers(-3, 3), min_size=2, max_size=2)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(linear, st.sampled_from(["<=", ">=", "="]), st.integers(-5, 5)), min_size=1, max_size=5))
def test_solver_verdicts_are_checkable(rows):
    sys = ConstraintSystem()
    xs = [LinExpr.var(sys.fresh(n)) for n in ("x", "y")]
    for coeffs, rel, b in rows:
        lhs = xs[0] * coeffs[0] + xs[1] * coeffs[1]
        sys.add(lhs, rel, b, f"{coeffs} {rel} {b}")
    sys.seal()
    sol = solve_feasible(sys)
    if sol.feasible:
        assert validate(sys, sol.assignment)
    else:
        assert verify_certificate(sys, sol.certificate)
    opt = solve_minimize(sys, xs[0] + xs[1])
    assert opt.feasible == sol.feasible
    if opt.feasible:
        assert validate(sys, opt.assignment)
        assert opt.objective <= sol[xs[0]] + sol[xs[1]]


@small
@given(st.sampled_from(list(Enumerator(QUEUE.signature).values("List", 8))))
def test_queue_list_potential(v):
    assert phi_value(v, AnnotatedType("List", ResourceVec([1])), QSIG) == length(v)
