from fractions import Fraction

import pytest

from amortrs.constraints import (
    ConstraintSystem,
    LinExpr,
    explain,
    lin_sum,
    solve_feasible,
    solve_minimize,
    validate,
    verify_certificate,
)


def system(*vars_):
    sys = ConstraintSystem()
    return (sys, *[LinExpr.var(sys.fresh(v)) for v in vars_])


def test_linexpr_algebra():
    sys, x, y = system("x", "y")
    e = (x + 1) * 2 - y * 3
    assert e.const == 2
    vx, vy = sys.variables
    assert e.value({vx: Fraction(1), vy: Fraction(2)}) == -2
    assert lin_sum([x, y, LinExpr(4)]) == x + y + 4
    assert (x - x).is_const()


def test_feasible_system():
    sys, x, y = system("x", "y")
    sys.eq(x + y, 3)
    sys.ge(x, 1)
    sys.ge(y, 1)
    sol = solve_feasible(sys.seal())
    assert sol.feasible and validate(sys, sol.assignment)
    assert sol[x] + sol[y] == 3


def test_infeasible_with_certificate():
    sys, x = system("x")
    sys.le(x, 1, "upper")
    sys.ge(x, 2, "lower")
    sol = solve_feasible(sys.seal())
    assert not sol.feasible
    assert verify_certificate(sys, sol.certificate)
    assert {c.provenance for _, c in sol.certificate.support(sys)} == {"upper", "lower"}
    assert any("upper" in line for line in explain(sys, sol))


def test_minimize():
    sys, x = system("x")
    sys.ge(x, 5)
    sol = solve_minimize(sys.seal(), x)
    assert sol.objective == 5
    sys, x, y = system("x", "y")
    sys.ge(x + y * 2, 4)
    sol = solve_minimize(sys.seal(), x + y)
    assert sol.objective == 2 and (sol[x], sol[y]) == (0, 2)


def test_unbounded():
    sys, x = system("x")
    sys.ge(x, 1)
    sol = solve_minimize(sys.seal(), -x)
    assert sol.status == "unbounded"


def test_perturbed_assignment_fails_validation():
    sys, x, y = system("x", "y")
    sys.eq(x + y, 3)
    sys.ge(x, 1)
    sol = solve_minimize(sys.seal(), x)
    bumped = dict(sol.assignment)
    v = list(x.terms)[0]
    bumped[v] += 1
    assert validate(sys, sol.assignment) and not validate(sys, bumped)


def test_rational_solution():
    sys, x = system("x")
    sys.eq(x * 3, 1)
    sol = solve_feasible(sys.seal())
    assert sol[x] == Fraction(1, 3)


def test_constant_contradiction():
    sys = ConstraintSystem()
    sys.ge(LinExpr(1), LinExpr(2), "one >= two")
    sol = solve_feasible(sys.seal())
    assert not sol.feasible and verify_certificate(sys, sol.certificate)


def test_dump_format():
    sys, x = system("x")
    sys.ge(x, 5, "lower bound")
    assert sys.dump() == "a0 >= 5  # lower bound\n"


def test_sealed_system_rejects_changes():
    sys, x = system("x")
    sys.seal()
    with pytest.raises(RuntimeError):
        sys.fresh("y")
