"""Command-line front end.

    votewelfare bound    --input data.csv
    votewelfare decide   --input summary.json --prior point-mass:0.55
    votewelfare compare  --input population.csv --supermajority 0.6,0.6667
    votewelfare simulate --family two-block:0.6,0.5,0.6,0.9,0.0:10 --trials 100
    votewelfare verify   --family independent-uniform::500 --input observed.csv

Reports go to standard output and diagnostics to standard error. Exit codes:
0 success, 1 a verification check failed, 2 invalid input, 3 input that no
population could have produced.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from typing import Sequence

from . import io as vio
from .bounds import sharp_bound
from .decisions import DEFAULT_SUPERMAJORITIES, PriorSpec, _versus, decide_all
from .errors import InfeasibleInput, ValidationError
from .lab import (
    DEFAULT_DELTA,
    _check_feasible,
    feasible_extremes,
    monte_carlo_disagreement,
    verify_bound_containment,
)
from .model import TIE_POLICIES, FamilySpec, ObservedDataset, Population, observe, summarize, true_welfare

log = logging.getLogger("votewelfare")

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2, 3
SUBCOMMANDS = ("bound", "decide", "simulate", "verify", "compare")


def _thresholds(text: str) -> tuple[float, ...]:
    if not text.strip():
        return ()
    values = []
    for part in text.split(","):
        part = part.strip()
        try:
            if "/" in part:
                num, den = part.split("/")
                values.append(float(num) / float(den))
            else:
                values.append(float(part))
        except (ValueError, ZeroDivisionError):
            raise argparse.ArgumentTypeError(f"bad supermajority threshold {part!r}") from None
    return tuple(values)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="votewelfare",
        description="Welfare bounds and policy choice from a status-quo vs proposal vote.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", help="data file, or - for standard input")
        p.add_argument("--kind", choices=vio.INPUT_KINDS, help="input kind (inferred when omitted)")
        p.add_argument("--tie-policy", choices=TIE_POLICIES, default="strict")
        p.add_argument("--assume-constant-a", action="store_true",
                       help="summary JSON without conditional means: treat u_a as constant")
        p.add_argument("--prior", help="kind[:params], e.g. point-mass:0.85, uniform-on-bound, truncated-beta:2,3")
        p.add_argument("--supermajority", type=_thresholds,
                       default=DEFAULT_SUPERMAJORITIES, help="comma-separated thresholds, e.g. 3/5,2/3")
        p.add_argument("--family", help="generator family kind:params:n, e.g. binary-proposal:0.4:1000")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trials", type=int, default=1000)
        p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--format", choices=("json", "csv"),
                       default="csv" if name == "compare" else "json")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


class _Input:
    """Loaded input plus its provenance digest."""

    def __init__(self, args):
        text, source, raw = vio.read_text(args.input)
        self.digest = vio.digest(raw)
        self.kind = args.kind or vio.infer_kind(text, source)
        self.population: Population | None = None
        self.observed: ObservedDataset | None = None
        if self.kind == "population-csv":
            self.population = vio.parse_population_csv(text, source, args.tie_policy)
            self.observed = observe(self.population)
            self.stats = summarize(self.observed)
        elif self.kind == "observed-csv":
            self.observed = vio.parse_observed_csv(text, source)
            _check_feasible(self.observed)
            self.stats = summarize(self.observed)
        else:
            self.stats = vio.parse_summary_json(text, source, args.assume_constant_a)


def _require_input(args) -> _Input:
    if not args.input:
        raise ValidationError(f"{args.subcommand} requires --input")
    return _Input(args)


def _require_family(args) -> FamilySpec:
    if not args.family:
        raise ValidationError(f"{args.subcommand} requires --family")
    return FamilySpec.parse(args.family)


def _config_digest(args) -> str:
    fields = {
        "subcommand": args.subcommand,
        "family": args.family,
        "prior": args.prior,
        "supermajority": list(args.supermajority),
        "seed": args.seed,
        "trials": args.trials,
        "delta": args.delta,
    }
    return vio.digest(json.dumps(fields, sort_keys=True).encode("utf-8"))


def _emit_json(obj, out) -> None:
    out.write(json.dumps(obj, indent=2, allow_nan=False))
    out.write("\n")


def _emit_csv(header: Sequence[str], rows: Sequence[Sequence], out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])


def _provenance(args, digest: str) -> dict:
    return {"input_digest": digest, "seed": args.seed}


def cmd_bound(args, out) -> int:
    data = _require_input(args)
    bound = sharp_bound(data.stats)
    report = {**bound.to_dict(), "width": bound.upper - bound.lower, **_provenance(args, data.digest)}
    if args.format == "csv":
        _emit_csv(list(report), [list(report.values())], out)
    else:
        _emit_json(report, out)
    return EXIT_OK


def _decision_rows(args, data: _Input, with_truth: bool = False):
    prior = PriorSpec.parse(args.prior) if args.prior else None
    report = decide_all(data.stats, prior, args.supermajority)
    rows = report.to_list()
    if with_truth and data.population is not None:
        mean_a, mean_b = true_welfare(data.population)
        chosen, tie = _versus(mean_b, mean_a)
        rows.append({
            "criterion": "utilitarian-optimum",
            "chosen": chosen.value,
            "tie": tie,
            "threshold_used": None,
            "regret_a": None,
            "regret_b": None,
            "prior_mean": None,
        })
    return rows


def cmd_decide(args, out) -> int:
    data = _require_input(args)
    rows = _decision_rows(args, data)
    if args.format == "csv":
        header = list(rows[0]) + ["input_digest", "seed"]
        _emit_csv(header, [[*r.values(), data.digest, args.seed] for r in rows], out)
    else:
        _emit_json({
            **_provenance(args, data.digest),
            "summary": data.stats.to_dict(),
            "bound": sharp_bound(data.stats).to_dict(),
            "decisions": rows,
        }, out)
    return EXIT_OK


def cmd_compare(args, out) -> int:
    data = _require_input(args)
    rows = _decision_rows(args, data, with_truth=True)
    if args.format == "json":
        _emit_json({**_provenance(args, data.digest), "rows": rows}, out)
        return EXIT_OK
    header = ["criterion", "chosen", "tie", "threshold_used", "regret_a", "regret_b", "prior_mean"]
    _emit_csv(header + ["input_digest", "seed"], [[r[h] for h in header] + [data.digest, args.seed] for r in rows], out)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    spec = _require_family(args)
    prior = PriorSpec.parse(args.prior) if args.prior else None
    report = monte_carlo_disagreement(
        spec, args.trials, args.seed, prior, args.supermajority, workers=args.workers
    )
    digest = _config_digest(args)
    if args.format == "csv":
        header, row = report.csv_columns()
        _emit_csv(header + ["input_digest"], [row + [digest]], out)
    else:
        _emit_json({**report.to_dict(), "input_digest": digest}, out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    if not args.input and not args.family:
        raise ValidationError("verify requires --input, --family, or both")
    result: dict = {"seed": args.seed}
    passed = True
    violations = 0
    if args.input:
        data = _Input(args)
        if data.observed is None:
            raise ValidationError("verify needs a population or observed dataset, not a summary")
        ext = feasible_extremes(data.observed, args.delta)
        reproduced = all(
            observe(w).identical_to(data.observed) for w in (ext.inf_population, ext.sup_population)
        )
        sharp = abs(ext.lower_gap) <= args.delta and abs(ext.upper_gap) <= args.delta
        inside = ext.lower_gap >= 0.0 and ext.upper_gap >= 0.0
        ok = reproduced and sharp and inside
        violations += not ok
        passed &= ok
        result["input_digest"] = data.digest
        result["feasible_extremes"] = {
            **ext.to_dict(), "reproduces_input": reproduced, "within_delta": sharp, "passed": ok,
        }
    if args.family:
        spec = _require_family(args)
        summary = verify_bound_containment(spec, args.trials, args.seed)
        violations += summary.violations
        passed &= summary.passed
        result["containment"] = summary.to_dict()
    result.setdefault("input_digest", _config_digest(args))
    result["passed"] = passed
    result["summary"] = f"{violations} violations"
    if args.format == "csv":
        flat = {"passed": passed, "violations": violations, "seed": args.seed,
                "input_digest": result["input_digest"]}
        for section in ("feasible_extremes", "containment"):
            for key, value in result.get(section, {}).items():
                flat[f"{section}.{key}"] = value
        _emit_csv(list(flat), [list(flat.values())], out)
    else:
        _emit_json(result, out)
    return EXIT_OK if passed else EXIT_FAILED


COMMANDS = {
    "bound": cmd_bound,
    "decide": cmd_decide,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "compare": cmd_compare,
}


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    buf = io.StringIO()
    try:
        code = COMMANDS[args.subcommand](args, buf)
    except InfeasibleInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out.write(buf.getvalue())
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())


def main_entry() -> None:
    sys.exit(main())
