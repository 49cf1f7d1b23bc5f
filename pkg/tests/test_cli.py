import io
import json

import pytest

from amortrs.cli import run
from amortrs.syntax import FIXTURES


def cli(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


def test_check_accepts_queue():
    code, out = cli("check", "queue.trs", "--sig", "queue.sig")
    assert code == 0 and out.rstrip().endswith("well-typed")


def test_infer_then_check(tmp_path):
    sig = tmp_path / "out.sig"
    code, _ = cli("infer", "queue.trs", "--deg", "2", "-o", str(sig))
    assert code == 0 and sig.exists()
    assert cli("check", "queue.trs", "--sig", str(sig))[0] == 0


def test_broken_signature(tmp_path):
    text = (FIXTURES / "queue.sig").read_text().replace("Nat [] -> Queue [0 1] cost 5", "Nat [] -> Queue [0 1] cost 0")
    sig = tmp_path / "broken.sig"
    sig.write_text(text)
    code, out = cli("check", "queue.trs", "--sig", str(sig))
    assert code == 1
    assert "rule 4" in out and "NOT well-typed" in out


def test_infer_exp_infeasible():
    code, out = cli("infer", "exp.trs", "--deg", "2")
    assert code == 1 and out.startswith("infeasible")


def test_malformed_rule_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.trs"
    bad.write_text("types Nat\nctor zero : -> Nat\nfn f : Nat -> Nat\nrule f(x -> x\n")
    assert cli("dheight", str(bad), "--term", "zero")[0] == 2
    assert "4:10" in capsys.readouterr().err


def test_usage_error():
    assert cli("frobnicate")[0] == 2
    assert cli("rc", "queue.trs", "--n-max", "-3")[0] == 2


def test_eval_with_trace():
    code, out = cli("eval", "queue.trs", "--term", "enq(n)", "--subst", "n=s(zero)", "--count", "--trace")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "queue(cons(zero, nil), nil)" and lines[1] == "cost 7"
    assert lines[-1].startswith("7 | ")


def test_eval_unbound_variable():
    assert cli("eval", "queue.trs", "--term", "rev(xs)")[0] == 2


def test_eval_stuck():
    code, out = cli("eval", "queue.trs", "--term", "tail(errorTail)")
    assert code == 1 and "stuck" in out


def test_dheight_and_rc():
    code, out = cli("dheight", "queue.trs", "--term", "enq(s(zero))")
    assert code == 0 and out.splitlines()[0] == "7"
    code, out = cli("rc", "queue.trs", "--n-max", "3", "--format", "json-lines")
    recs = [json.loads(x) for x in out.splitlines()]
    assert [r["rc"] for r in recs] == [0, 0, 2, 7]


def test_phi():
    code, out = cli("phi", "queue.trs", "--sig", "queue.sig", "--term", "rev(cons(zero, nil))", "--type", "List")
    assert (code, out.strip()) == (0, "3")


def test_orient_and_bound(tmp_path):
    code, out = cli("orient", "queue.trs", "--sig", "queue.sig", "--max-size", "3", "--step-size", "5")
    assert code == 0 and "gamma(snoc, Queue[0 1]) = x1 + x2 + 5" in out
    report = tmp_path / "bound.txt"
    code, out = cli("bound", "queue.trs", "--sig", "queue.sig", "--n-max", "5", "-o", str(report))
    assert code == 0 and "5, 13, 19" in out
    assert report.read_text() == out


def test_soundness_and_polyt():
    assert cli("soundness", "queue.trs", "--sig", "queue.sig", "--max-size", "5")[0] == 0
    assert cli("polyt", "queue.trs", "--sig", "queue.sig", "--type", "Queue[0 1]", "--max-size", "8")[0] == 0
    assert cli("polyt", "exp.trs", "--sig", "exp-nat.sig", "--type", "Nat[1]", "--max-size", "6")[0] == 1


def test_structure_reports_error_constants():
    code, out = cli("structure", "queue.trs", "--max-size", "3")
    assert code == 1 and "checkF(errorTail)" in out
    assert cli("structure", "exp.trs", "--max-size", "4")[0] == 0


def test_determinism():
    assert cli("rc", "queue.trs", "--n-max", "5") == cli("rc", "queue.trs", "--n-max", "5")


def test_json_lines_check():
    code, out = cli("check", "queue.trs", "--sig", "queue.sig", "--format", "json-lines")
    recs = [json.loads(x) for x in out.splitlines()]
    assert code == 0 and len(recs) == 12 and all(r["status"] == "well-typed" for r in recs)
