"""Command-line front end.

Exit status: 0 pass/feasible, 1 fail/infeasible/violation, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from .annot import AnnotatedType
from .engine import DivergenceSuspected, Stuck, bigstep, compiled, rc_table, smallstep_closure
from .interp import bound_report, check_orientation, derive_interpretation
from .potential import PotentialError, check_polyt, phi_ground
from .syntax import ParseError, load_trs, parse_annotated_type, parse_sig, parse_subst, parse_term, print_sig
from .terms import TermError, check_completely_defined, check_structure, is_value, variables
from .typecheck import DegreeTemplate, TypingError, check_soundness_inequality, check_trs, infer


@dataclass
class Outcome:
    status: int
    lines: List[str] = field(default_factory=list)
    records: List[Dict] = field(default_factory=list)
    artifact: Optional[str] = None  # written to -o instead of the report when set


def _positive(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="amortrs", description="Amortised runtime-complexity analysis of typed constructor rewrite systems.")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, help_, sig=False, sig_required=False):
        c = sub.add_parser(name, help=help_)
        c.add_argument("trs", help="TRS file (or the name of a bundled fixture)")
        if sig:
            c.add_argument("--sig", required=sig_required, help="annotated signature file")
        c.add_argument("-o", "--output", help="write the report (or inferred signature) here")
        c.add_argument("--format", choices=["text", "json-lines"], default="text")
        c.add_argument("--fuel", type=_positive, default=10**6, help="step limit per evaluation")
        return c

    cmd("check", "check a TRS against an annotated signature", sig=True, sig_required=True)

    c = cmd("infer", "infer an annotated signature")
    c.add_argument("--deg", type=_positive, default=2, help="maximal potential degree")
    c.add_argument("--minimize", choices=["total-cost", "none"], default="total-cost")

    c = cmd("eval", "evaluate a term with the big-step semantics")
    c.add_argument("--term", required=True)
    c.add_argument("--subst", default="", help="x=value, y=value")
    c.add_argument("--count", action="store_true", help="print the cost")
    c.add_argument("--trace", action="store_true", help="print the small-step trace")

    c = cmd("dheight", "innermost derivation height of a ground term")
    c.add_argument("--term", required=True)
    c.add_argument("--strategy", choices=["li", "ri"], default="li")

    c = cmd("rc", "runtime complexity by exhaustive enumeration")
    c.add_argument("--n-max", type=_positive, default=8)

    c = cmd("phi", "potential of a ground term", sig=True, sig_required=True)
    c.add_argument("--term", required=True)
    c.add_argument("--type", required=True, help="annotated type, e.g. 'Queue[0 1]'")

    c = cmd("orient", "check orientation by the derived interpretation", sig=True, sig_required=True)
    c.add_argument("--max-size", type=_positive, default=6)
    c.add_argument("--step-size", type=_positive, default=None, help="basic-term size for the step sweep")

    c = cmd("bound", "compare the potential bound with rc", sig=True, sig_required=True)
    c.add_argument("--n-max", type=_positive, default=8)

    c = cmd("soundness", "sweep the soundness inequality", sig=True, sig_required=True)
    c.add_argument("--max-size", type=_positive, default=7)

    c = cmd("polyt", "polynomial bound criterion for an annotated type", sig=True, sig_required=True)
    c.add_argument("--type", required=True)
    c.add_argument("--max-size", type=_positive, default=12)

    c = cmd("structure", "structural checks and bounded completely-definedness")
    c.add_argument("--max-size", type=_positive, default=8)
    return p


def _load(args):
    trs = load_trs(args.trs)
    asig = parse_sig(args.sig, trs) if getattr(args, "sig", None) else None
    return trs, asig


def _ground(args, trs, text):
    t = parse_term(text, trs.signature)
    if variables(t):
        raise TermError(f"{text} is not ground")
    return t


def run_check(args) -> Outcome:
    trs, asig = _load(args)
    rep = check_trs(trs, asig)
    recs = [
        {"rule": v.rule.index, "decl": str(v.decl), "status": v.status, "budget": str(v.budget), "detail": v.message}
        for v in rep.verdicts
    ]
    return Outcome(0 if rep.ok else 1, rep.lines(), recs)


def run_infer(args) -> Outcome:
    trs, _ = _load(args)
    res = infer(trs, DegreeTemplate(max(args.deg, 1)), objective=args.minimize)
    if not res.feasible:
        lines = [f"infeasible at degree {args.deg}; contradicting constraints:"] + res.explanation()
        return Outcome(1, lines, [{"status": "infeasible", "deg": args.deg}])
    text = print_sig(res.signature)
    lines = [f"feasible at degree {args.deg}", text.rstrip("\n")]
    return Outcome(0, lines, [{"status": "feasible", "deg": args.deg}], artifact=text)


def run_eval(args) -> Outcome:
    trs, _ = _load(args)
    sigma = parse_subst(args.subst, trs.signature)
    env = {x: trs.signature.decl(v.sym).result for x, v in sigma.items()}
    t = parse_term(args.term, trs.signature, env=env)
    missing = [v.name for v in variables(t) if v.name not in sigma]
    if missing:
        raise TermError(f"unbound variable {missing[0]}")
    lines = []
    try:
        res = bigstep(sigma, t, trs, args.fuel)
    except Stuck as e:
        return Outcome(1, [f"stuck: {e}"], [{"status": "stuck", "term": str(e.term)}])
    except DivergenceSuspected as e:
        return Outcome(1, [f"no value within fuel: {e}"], [{"status": "fuel"}])
    lines.append(str(res.value))
    if args.count:
        lines.append(f"cost {res.count}")
    if args.trace:
        lines += smallstep_closure(sigma, t, trs, args.fuel).lines()
    return Outcome(0, lines, [{"value": str(res.value), "cost": res.count}])


def run_dheight(args) -> Outcome:
    trs, _ = _load(args)
    t = _ground(args, trs, args.term)
    try:
        nf, h = compiled(trs).normalize(t, args.fuel, args.strategy)
    except DivergenceSuspected as e:
        return Outcome(1, [f"no normal form within fuel: {e}"], [{"status": "fuel"}])
    note = "" if is_value(nf, trs.signature) else "  (normal form is not a value)"
    return Outcome(0, [f"{h}", f"normal form {nf}{note}"], [{"dheight": h, "normal_form": str(nf)}])


def run_rc(args) -> Outcome:
    trs, _ = _load(args)
    rows = rc_table(trs, args.n_max, args.fuel)
    lines = [f"{'n':>3}  {'rc':>5}  {'terms':>6}  witness"]
    lines += [f"{r.n:>3}  {r.value:>5}  {r.terms:>6}  {r.witness or '-'}" for r in rows]
    return Outcome(0, lines, [{"n": r.n, "rc": r.value, "terms": r.terms} for r in rows])


def run_phi(args) -> Outcome:
    trs, asig = _load(args)
    at = parse_annotated_type(args.type, trs.signature)
    t = _ground(args, trs, args.term)
    phi = phi_ground(t, at, asig)
    return Outcome(0, [str(phi)], [{"term": str(t), "type": str(at), "phi": str(phi)}])


def run_orient(args) -> Outcome:
    trs, asig = _load(args)
    interp = derive_interpretation(asig)
    rep = check_orientation(trs, asig, args.max_size, args.step_size)
    lines = interp.lines() + rep.lines()
    return Outcome(0 if rep.ok else 1, lines, [{"violation": v} for v in rep.violations] or [{"status": "ok"}])


def run_bound(args) -> Outcome:
    trs, asig = _load(args)
    rep = bound_report(trs, asig, args.n_max)
    recs = [{"n": r.n, "rc_oracle": r.oracle, "bound": str(r.bound)} for r in rep.rows]
    return Outcome(0 if rep.ok else 1, rep.lines() + rep.records(), recs)


def run_soundness(args) -> Outcome:
    trs, asig = _load(args)
    rep = check_soundness_inequality(trs, asig, args.max_size, args.fuel)
    return Outcome(0 if rep.ok else 1, rep.lines(), [{"violation": v} for v in rep.violations] or [{"status": "ok"}])


def run_polyt(args) -> Outcome:
    trs, asig = _load(args)
    at = parse_annotated_type(args.type, trs.signature)
    rep = check_polyt(asig, at.annot, at.base, args.max_size)
    return Outcome(0 if rep.ok else 1, rep.lines(), [{"premise": rep.premise_ok, "violations": len(rep.violations)}])


def run_structure(args) -> Outcome:
    trs, _ = _load(args)
    st = check_structure(trs)
    cd = check_completely_defined(trs, args.max_size)
    return Outcome(0 if st.ok and cd.ok else 1, st.lines() + cd.lines(), [{"structure": st.ok, "completely_defined": cd.ok}])


COMMANDS = {
    "check": run_check,
    "infer": run_infer,
    "eval": run_eval,
    "dheight": run_dheight,
    "rc": run_rc,
    "phi": run_phi,
    "orient": run_orient,
    "bound": run_bound,
    "soundness": run_soundness,
    "polyt": run_polyt,
    "structure": run_structure,
}


def run(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        res = COMMANDS[args.command](args)
    except (ParseError, TermError, TypingError, PotentialError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.format == "json-lines":
        for r in res.records:
            print(json.dumps(r, sort_keys=True), file=out)
    else:
        for line in res.lines:
            print(line, file=out)
    if args.output:
        if res.artifact is not None:
            Path(args.output).write_text(res.artifact, encoding="utf-8")
        else:
            body = "\n".join(json.dumps(r, sort_keys=True) for r in res.records) if args.format == "json-lines" else "\n".join(res.lines)
            Path(args.output).write_text(body + "\n", encoding="utf-8")
    return res.status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
