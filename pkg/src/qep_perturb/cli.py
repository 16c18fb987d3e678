"""Command line entry point ``qep-perturb``."""

from __future__ import annotations

import argparse
import os
import sys

from .harness.campaign import TrialCampaign, run_campaign
from .harness.problems import EXAMPLES, ProblemSpec, TripleProblem
from .harness.report import FORMATS, emit_report
from .qep import load_triple
from .sylvester import audit


def _print_summary(report, stream):
    print(f"{report.problem}: eta={report.eta:g} seed={report.seed} trials={report.trials}", file=stream)
    for s in report.summary():
        ref = f" ref={s['reference']:.4e} ratio={s['ratio_to_reference']:.3g}" if s["reference"] else ""
        print(f"  {s['bound']:<20} {s['label']:<18} valid={s['valid']:>3}/{s['rows']:<3} "
              f"median={s['value_median']:.4e} exact={s['exact_median']:.4e}{ref} "
              f"violations={s['violations']}", file=stream)


def _report_violations(report, stream) -> int:
    bad = report.violations()
    for r in bad:
        print(f"VIOLATION trial={r.trial} bound={r.bound} label={r.label} value={r.value!r} "
              f"exact={r.exact!r} factors={r.factors}", file=stream)
    return 0 if not bad else 1


def cmd_reproduce(args) -> int:
    params = {}
    if args.nu is not None:
        params["nu"] = args.nu
    if args.gamma is not None:
        params["gamma"] = args.gamma
    spec = ProblemSpec(args.example, args.n, params)
    report = run_campaign(TrialCampaign(spec, args.eta, args.seed, args.trials))
    if args.out:
        for fmt in args.format:
            path = emit_report(report, fmt, os.path.join(args.out, f"{args.example}.{fmt}"))
            print(f"wrote {path}")
    _print_summary(report, sys.stdout)
    return _report_violations(report, sys.stderr)


def _group(text):
    if not text:
        return None
    return tuple(int(v) for v in text.split(","))


def cmd_bound(args) -> int:
    t = load_triple(args.manifest)
    prob = TripleProblem(os.path.basename(os.path.dirname(os.path.abspath(args.manifest))) or "manifest", t)
    tc = TrialCampaign(prob, args.eta, args.seed, args.trials, _group(args.group1),
                       linearization=args.linearization)
    report = run_campaign(tc)
    if args.out:
        for fmt in args.format:
            print(f"wrote {emit_report(report, fmt, os.path.join(args.out, f'bound.{fmt}'))}")
    _print_summary(report, sys.stdout)
    return _report_violations(report, sys.stderr)


def cmd_sylvester_audit(args) -> int:
    res = audit(args.cases, args.max_size, args.seed)
    print(f"cases={len(res.cases)} min_slack={res.min_slack:.3e} "
          f"max_identity_defect={res.max_identity_defect:.3e} failures={len(res.failures)}")
    for case, c in sorted(res.per_case.items()):
        print(f"  {case:<7} count={c['count']:>4} min_slack={c['min_slack']:.3e}")
    for f in res.failures:
        print(f"FAILED case={f.case} block={f.block} block_p={f.block_p} "
              f"w1={f.w1} est1={f.est1} w2={f.w2} est2={f.est2} y={f.y_norm} y_bound={f.y_bound}",
              file=sys.stderr)
    return 0 if res.passed else 1


def _formats(text):
    out = text.split(",")
    for f in out:
        if f not in FORMATS:
            raise argparse.ArgumentTypeError(f"unknown format {f!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qep-perturb", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reproduce", help="run a trial campaign on a built-in example")
    r.add_argument("--example", choices=EXAMPLES, required=True)
    r.add_argument("--n", type=int)
    r.add_argument("--nu", type=float)
    r.add_argument("--gamma", type=float)
    r.add_argument("--eta", type=float, default=1e-8)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--trials", type=int, default=100)
    r.add_argument("--out")
    r.add_argument("--format", type=_formats, default=["md"], help="comma-separated: csv,json,md")
    r.set_defaults(func=cmd_reproduce)

    b = sub.add_parser("bound", help="bounds for a triple stored as Matrix Market files")
    b.add_argument("--manifest", required=True)
    b.add_argument("--eta", type=float, default=1e-8)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--trials", type=int, default=1)
    b.add_argument("--linearization", choices=("L1", "L2"), default="L1")
    b.add_argument("--group1", help="comma-separated eigenvalue indices (descending modulus)")
    b.add_argument("--out")
    b.add_argument("--format", type=_formats, default=["json"])
    b.set_defaults(func=cmd_bound)

    a = sub.add_parser("sylvester-audit", help="check the coefficient bounds on random block pairs")
    a.add_argument("--cases", type=int, default=1000)
    a.add_argument("--max-size", type=int, default=4)
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=cmd_sylvester_audit)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
