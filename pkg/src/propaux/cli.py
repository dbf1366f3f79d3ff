"""Command-line surface.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 numerical
error (singular optimality system, negative MSE). Diagnostics go to stderr;
reports written with ``--output`` ending in ``.json`` are valid JSON.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import io, montecarlo, theory
from .config import T3Config, TableConfig, TcConfig, T1Config, T2Config
from .errors import DataError, NumericalError, ParseError
from .estimators import EstimatorConfig, evaluate
from .montecarlo import SyntheticSpec, generate_population, run_experiment
from .population import Design, compute_population_params, sample_stats


class CliUsageError(Exception):
    """Bad flags or arguments (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliUsageError(message)


def _table_config(args) -> TableConfig:
    kwargs = {}
    if getattr(args, "tc", None):
        kwargs["tc"] = _parse_config(TcConfig, args.tc)
    if getattr(args, "t3", None):
        t3 = _parse_config(T3Config, args.t3)
        kwargs["t3_gamma"] = t3.gamma
    return TableConfig(**kwargs)


def _parse_config(cls, text: str):
    try:
        return cls.from_kv(text)
    except ValueError as exc:
        raise CliUsageError(str(exc)) from None


def _estimator_config(args) -> EstimatorConfig:
    kind = args.estimator
    kwargs = {}
    for slot, cls in (("tc", TcConfig), ("t1", T1Config), ("t2", T2Config),
                      ("t3", T3Config)):
        text = getattr(args, slot, None)
        if text:
            if slot != kind:
                raise CliUsageError(f"--{slot} does not apply to estimator {kind!r}")
            kwargs[slot] = _parse_config(cls, text)
    return EstimatorConfig(kind=kind, **kwargs)


def _parse_indices(spec: str) -> list[int]:
    path = Path(spec)
    if path.exists():
        text = path.read_text(encoding="utf-8")
    else:
        text = spec
    parts = text.replace(",", " ").split()
    try:
        return [int(part) for part in parts]
    except ValueError:
        raise ParseError(f"cannot parse sample indices from {spec!r}") from None


def _census_dash(value) -> str:
    return "—" if value is None else f"{value:.2f}"


# --- commands -------------------------------------------------------------------


def _cmd_params(args) -> int:
    frame = io.read_population_csv(args.input)
    params = compute_population_params(frame)
    n = args.n if args.n is not None else frame.size
    doc = io.ParamsDocument(params=params, design=Design(n=n, N=frame.size),
                            provenance=io.PROVENANCE_FRAME)
    io.write_params_json(args.output, doc)
    return 0


def _cmd_theory(args) -> int:
    doc = io.read_params_json(args.params)
    config = _table_config(args)
    report = theory.theory_report(doc.params, doc.design, config)
    conditions = None
    if doc.design.f > 0.0:
        conditions = io.conditions_dict(
            theory.comparison_conditions(doc.params, doc.design.f, config))
    document = io.build_report_document(
        input_digest=io.file_digest(args.params),
        configurations={"tc": vars(config.tc), "t3_gamma": config.t3_gamma,
                        "t3_variants": list(config.t3_variants)},
        sections={"theory": io.theory_report_dict(report),
                  "comparison_conditions": conditions},
    )
    io.write_report_json(args.output, document)
    return 0


def _cmd_pre(args) -> int:
    doc = io.read_params_json(args.params)
    config = _table_config(args)
    report = theory.theory_report(doc.params, doc.design, config)
    names = [entry.name for entry in report.entries]
    values = [entry.pre for entry in report.entries]
    if args.format == "json":
        payload = {name: value for name, value in zip(names, values)}
        print(json.dumps(payload, indent=2))
    elif args.format == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(names)
        writer.writerow([_census_dash(value) for value in values])
    else:
        cells = [_census_dash(value) for value in values]
        widths = [max(len(n), len(c)) for n, c in zip(names, cells)]
        print("  ".join(n.rjust(w) for n, w in zip(names, widths)))
        print("  ".join(c.rjust(w) for c, w in zip(cells, widths)))
    return 0


def _cmd_estimate(args) -> int:
    frame = io.read_population_csv(args.input)
    pop = compute_population_params(frame)
    stats = sample_stats(frame, _parse_indices(args.indices))
    cfg = _estimator_config(args)
    estimate = evaluate(stats, pop, cfg)
    payload = {
        "estimator": estimate.config_used.name,
        "value": estimate.value,
        "sample": {"n": stats.n, "p": stats.p, "xbar_s": stats.xbar_s,
                   "sx2_s": stats.sx2_s},
        "config_used": _config_dict(estimate.config_used),
    }
    print(json.dumps(payload, indent=2))
    return 0


def _config_dict(cfg: EstimatorConfig) -> dict:
    out = {"kind": cfg.kind}
    for slot in ("tb", "tc", "t1", "t2", "t3"):
        sub = getattr(cfg, slot)
        if sub is not None:
            out[slot] = vars(sub)
    return out


def _cmd_simulate(args) -> int:
    frame = io.read_population_csv(args.input)
    configs = list(montecarlo.DEFAULT_CONFIGS)
    if args.tc:
        configs = [EstimatorConfig(kind="tc", tc=_parse_config(TcConfig, args.tc))
                   if cfg.kind == "tc" else cfg for cfg in configs]
    if args.t3:
        configs = [EstimatorConfig(kind="t3", t3=_parse_config(T3Config, args.t3))
                   if cfg.kind == "t3" else cfg for cfg in configs]
    report = run_experiment(frame, args.n, configs, reps=args.reps, seed=args.seed,
                            workers=args.workers)
    document = io.build_report_document(
        input_digest=io.file_digest(args.input),
        configurations={"n": args.n, "reps": args.reps, "seed": args.seed,
                        "estimators": [_config_dict(cfg) for cfg in configs]},
        sections={"simulation": io.simulation_report_dict(report)},
    )
    io.write_report_json(args.output, document)
    return 0


def _cmd_generate(args) -> int:
    if args.spec:
        with open(args.spec, encoding="utf-8") as handle:
            try:
                raw = json.load(handle)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{args.spec}: invalid JSON ({exc})") from None
        if not isinstance(raw, dict):
            raise ParseError(f"{args.spec}: expected a JSON object")
        raw["size"] = args.size
        try:
            spec = SyntheticSpec(**raw)
        except TypeError as exc:
            raise ParseError(f"{args.spec}: {exc}") from None
    else:
        spec = SyntheticSpec(size=args.size)
    frame = generate_population(spec, seed=args.seed)
    io.write_population_csv(args.output, frame)
    return 0


def _cmd_sensitivity(args) -> int:
    doc = io.read_params_json(args.params)
    config = _table_config(args)
    report = theory.sensitivity(doc.params, doc.design.f, config, digits=args.digits)
    document = io.build_report_document(
        input_digest=io.file_digest(args.params),
        configurations={"digits": args.digits, "tc": vars(config.tc),
                        "t3_gamma": config.t3_gamma,
                        "t3_variants": list(config.t3_variants)},
        sections={"sensitivity": io.sensitivity_report_dict(report)},
    )
    io.write_report_json(args.output, document)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="propaux",
                     description="Proportion estimation with auxiliary information")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="compute a parameter document from a frame")
    p.add_argument("--input", required=True)
    p.add_argument("--n", type=int, default=None,
                   help="intended sample size (defaults to a census)")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_params)

    p = sub.add_parser("theory", help="biases, MSEs, optimal constants")
    p.add_argument("--params", required=True)
    p.add_argument("--tc", default=None, metavar="a=1,b=0,alpha=1,beta=0")
    p.add_argument("--t3", default=None, metavar="gamma=1,g=1,delta=1")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_theory)

    p = sub.add_parser("pre", help="percent-relative-efficiency table")
    p.add_argument("--params", required=True)
    p.add_argument("--tc", default=None, metavar="a=1,b=0,alpha=1,beta=0")
    p.add_argument("--t3", default=None, metavar="gamma=1,g=1,delta=1")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.set_defaults(func=_cmd_pre)

    p = sub.add_parser("estimate", help="single-sample point estimate")
    p.add_argument("--input", required=True)
    p.add_argument("--indices", required=True,
                   help="file of indices, or inline like '0,3,5'")
    p.add_argument("--estimator", required=True,
                   choices=("usual", "ta", "tb", "tc", "t1", "t2", "t3"))
    p.add_argument("--tc", default=None)
    p.add_argument("--t1", default=None)
    p.add_argument("--t2", default=None)
    p.add_argument("--t3", default=None)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("simulate", help="seeded Monte Carlo experiment")
    p.add_argument("--input", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--tc", default=None)
    p.add_argument("--t3", default=None)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("generate", help="synthetic population")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--spec", default=None, help="JSON file of generator settings")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("sensitivity", help="efficiency intervals under input rounding")
    p.add_argument("--params", required=True)
    p.add_argument("--digits", type=int, required=True)
    p.add_argument("--tc", default=None)
    p.add_argument("--t3", default=None)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_sensitivity)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliUsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
