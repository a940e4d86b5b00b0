"""Command-line entry point: ``crossover {plan,construct,verify,simulate,analyze}``.

Exit status: 0 on success, 1 for invalid input (flags, files, schemas),
2 when a computation fails (e.g. tau not estimable).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import analysis, construction, data as datamod, design as designmod
from . import information, matrices, planning, simulation

log = logging.getLogger("crossover")

FILE_FORMATS = """\
file formats:
  design JSON   {"weeks": w, "plans": [{"patient_id": "1", "sessions_per_week": 3,
                 "weeks": [["H","A","H"], ...]}, ...]}
                thrice-weekly days are Mon/Wed/Fri, twice-weekly Mon/Fri (implicit;
                an optional "days" list must match).
  trial CSV     header patient_id,week,day,treatment,y ; day in {Mon,Wed,Fri};
                treatment in {A,H}; y empty when missing.
"""

COMPUTATION_ERRORS = (
    analysis.NotEstimableError,
    analysis.TransformError,
    analysis.RandomizationError,
    information.InconsistentDesignError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _text(obj: dict) -> str:
    return "".join(f"{k}={v}\n" for k, v in obj.items())


def _render(obj: dict, fmt: str) -> str:
    if fmt == "json":
        return _json(obj)
    if fmt == "csv":
        flat = {k: v for k, v in obj.items() if not isinstance(v, (dict, list))}
        return ",".join(flat) + "\n" + ",".join(str(v) for v in flat.values()) + "\n"
    return _text(obj)


# -- subcommands ------------------------------------------------------------------

def cmd_plan(args) -> int:
    inputs = planning.PlanInputs(args.tau0, args.sigma, args.alpha, args.power, args.n3, args.n2)
    plan = planning.plan_trial(inputs, round_even=args.even)
    _emit(_render({"m": plan.m, "w": plan.weeks, "planned_m": plan.planned_m,
                   "variance": plan.variance}, args.format), args.out)
    return 0


def cmd_construct(args) -> int:
    weights = construction.weights_by_name(args.weights)
    d = construction.construct_design(args.n3, args.n2, args.weeks, weights, seed=args.seed)
    _emit(designmod.design_to_json(d), args.out)
    return 0


def cmd_verify(args) -> int:
    d = designmod.read_design(args.design)
    report = designmod.validate_design(d)
    if not report.valid:
        raise ValueError("invalid design: " + "; ".join(report.violations))
    for warning in report.warnings:
        log.info(warning)
    result = information.verdict(d)
    if args.dump_matrices:
        outdir = Path(args.dump_matrices)
        outdir.mkdir(parents=True, exist_ok=True)
        for name, mat in (("A", matrices.build_A(d)), ("B1", matrices.build_B1(d)),
                          ("B2", matrices.build_B2(d))):
            matrices.write_matrix_csv(mat, outdir / f"{name}.csv")
    body = result.as_dict()
    if args.format == "text":
        body = {k: v for k, v in body.items() if k not in ("q", "patient_imbalance")}
        body["q"] = result.q.as_dict()["contracted"]
    _emit(_render(body, args.format), args.out)
    return 0


def cmd_simulate(args) -> int:
    d = designmod.read_design(args.design)
    report = designmod.validate_design(d)
    if not report.valid:
        raise ValueError("invalid design: " + "; ".join(report.violations))
    params = designmod.ModelParams(tau=args.tau, pi=tuple(args.pi), sigma=args.sigma)
    err = (simulation.ErrorModel("ar1", args.sigma, args.rho) if args.rho
           else simulation.ErrorModel("iid", args.sigma))
    if args.reps == 1:
        miss = simulation.MissingnessSpec(final_period_loss=args.miss_final,
                                          random_loss_prob=args.miss_prob)
        trial = simulation.simulate_trial(d, params, err, miss, seed=args.seed)
        if args.format == "json":
            recs = [{"patient_id": r.patient_id, "week": r.week, "day": r.day,
                     "treatment": r.treatment.value, "y": r.y} for r in trial.records]
            _emit(_json({"records": recs}), args.out)
        else:
            _emit(datamod.trial_csv_text(trial), args.out)
        return 0
    if args.miss_final or args.miss_prob:
        raise ValueError("missingness flags apply only to a single simulated trial (--reps 1)")
    est = simulation.simulate_estimates(d, params, err, args.reps, seed=args.seed)
    info = information.info_full(d)
    summary = {
        "reps": args.reps,
        "tau": args.tau,
        "mean_tau_hat": float(np.mean(est)),
        "var_tau_hat": float(np.var(est, ddof=1)),
        "model_variance": args.sigma ** 2 / info,
        "info_full": info,
        "errors": err.kind,
        "rho": err.rho,
    }
    _emit(_render(summary, "json" if args.format == "csv" else args.format), args.out)
    return 0


def cmd_analyze(args) -> int:
    trial = datamod.read_trial_csv(args.data)
    fit = analysis.fit_model(trial, log_shift=args.log_shift)
    body = fit.as_dict()
    if args.residuals:
        analysis.export_residuals(fit, args.residuals)
    if args.randomization:
        if args.seed is None:
            raise UsageError("analyze: --seed is required with --randomization")
        scheme = analysis.RandomizationScheme.for_data(
            trial, construction.weights_by_name(args.weights))
        rt = analysis.randomization_test(trial, scheme, args.randomization, args.seed,
                                         log_shift=args.log_shift)
        body["randomization"] = rt.as_dict()
    if args.format != "json":
        flat = {k: v for k, v in body.items() if k != "randomization"}
        if "randomization" in body:
            flat["randomization_p"] = body["randomization"]["p_value"]
            flat["randomization_failed"] = body["randomization"]["n_failed"]
        body = flat
    _emit(_render(body, args.format), args.out)
    return 0


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = _Parser(prog="crossover", description=__doc__, epilog=FILE_FORMATS,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("plan", parents=[common], help="sample size and trial length")
    p.add_argument("--tau0", type=float, required=True, help="semi-difference to detect")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--power", type=float, default=0.80)
    p.add_argument("--n3", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--even", action="store_true", help="round the number of weeks up to even")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("construct", parents=[common], help="randomized optimal design (design JSON)",
                       epilog=FILE_FORMATS, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--n3", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--weeks", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--weights", choices=("paper", "uniform"), default="paper")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", parents=[common], help="information and optimality of a design",
                       epilog=FILE_FORMATS, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("design")
    p.add_argument("--dump-matrices", metavar="DIR", help="write A, B1, B2 as CSV")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", parents=[common], help="simulate trial data or tau_hat variance",
                       epilog=FILE_FORMATS, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--design", required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--pi", type=float, nargs=4, default=[0.0, 0.0, 0.0, 0.0],
                   metavar=("PI1", "PI2", "PI3", "PI4"))
    p.add_argument("--rho", type=float, default=0.0, help="AR(1) within-patient correlation")
    p.add_argument("--miss-final", action="store_true",
                   help="drop the final session of every thrice-weekly patient")
    p.add_argument("--miss-prob", type=float, default=0.0)
    p.add_argument("--reps", type=int, default=1,
                   help="1: emit one trial as CSV; >1: emit a JSON variance summary")
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", parents=[common], help="fit the model, optionally re-randomize",
                       epilog=FILE_FORMATS, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--data", required=True)
    p.add_argument("--log-shift", type=float, default=None, metavar="K", help="analyse log(y + K)")
    p.add_argument("--randomization", type=int, default=0, metavar="N")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--weights", choices=("paper", "uniform"), default="paper")
    p.add_argument("--residuals", metavar="FILE", help="export residuals for probability plots")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except COMPUTATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
