"""Command-line interface.

Exit codes are a stable scripting contract:
  0  success
  2  validation failure (model loads but is ill-posed or misconfigured)
  3  solver failure (no convergence, unphysical solution)
  4  file error (missing, unparseable)
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import (
    CycleError,
    NonPhysicalSizing,
    NotWellPosed,
    OverrideNotBoundary,
    ParseError,
    PressureRise,
    ReversePressureGradient,
    SolverError,
    UnknownComponentFamily,
    UnknownSpecies,
)
from .modelio import (
    bundled_models,
    export_results,
    load_model,
    save_model,
)
from .network import validate
from .solver import SolverConfig, sweep
from .workflow import run_design, run_offdesign

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_FILE = 4

_FILE_ERRORS = (ParseError, UnknownComponentFamily, UnknownSpecies,
                FileNotFoundError, IsADirectoryError, PermissionError)
_SOLVER_ERRORS = (SolverError, NonPhysicalSizing, PressureRise,
                  ReversePressureGradient)


def _parse_sets(pairs):
    out = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep:
            raise OverrideNotBoundary(f"--set expects key=value, got {pair!r}")
        out[key] = float(value)
    return out


def _emit(data: bytes, out_path):
    if out_path:
        with open(out_path, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data.decode())


def cmd_validate(args) -> int:
    model = load_model(args.model)
    report = validate(model)
    if args.format == "json":
        print(json.dumps(report.as_dict(), indent=2))
    else:
        print(f"{model.name}: {report.status} "
              f"({report.n_vars} unknowns, {report.n_eqs} equations)")
        for d in report.diagnostics:
            print(f"  - {d}")
    return EXIT_OK if report.is_well_posed else EXIT_VALIDATION


def cmd_design(args) -> int:
    model = load_model(args.model)
    sized = run_design(model, specs=_parse_sets(args.set) or None,
                       config=_config(args))
    save_model(sized.model, args.out)
    metrics = sized.design_metrics.as_dict()
    if args.format == "json":
        print(json.dumps({
            "status": sized.design_result.status,
            "iterations": sized.design_result.iterations,
            "residual_norm": sized.design_result.residual_norm,
            "metrics": metrics,
            "sized_model": args.out,
            "provenance": sized.provenance,
        }, indent=2))
    else:
        print(f"design converged in {sized.design_result.iterations} iterations "
              f"(residual {sized.design_result.residual_norm:.2e})")
        print(f"thrust {metrics['thrust']:.1f} N, isp {metrics['isp']:.1f} s")
        solved = [k for k, v in sized.provenance.items() if v == "solved"]
        for k in solved:
            comp, _, param = k.partition(".")
            print(f"  sized {k} = {sized.model.component(comp).params[param]:.6g}")
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    model = load_model(args.model)
    outcome = run_offdesign(model, boundary_overrides=_parse_sets(args.set),
                            config=_config(args))
    _emit(export_results(outcome, args.format), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    model = load_model(args.model)
    if args.steps < 1:
        raise NotWellPosed("--steps must be >= 1")
    if args.steps == 1:
        values = [args.from_]
    else:
        step = (args.to - args.from_) / (args.steps - 1)
        values = [args.from_ + i * step for i in range(args.steps)]
    table = sweep(model, args.param, values, config=_config(args),
                  free=args.free)
    _emit(export_results(table, args.format), args.out)
    failed = [p for p in table.points if not p.converged]
    return EXIT_SOLVER if len(failed) == len(table.points) else EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def cmd_examples(args) -> int:
    models = bundled_models()
    if args.name:
        if args.name not in models:
            raise FileNotFoundError(f"no bundled model {args.name!r}")
        sys.stdout.write(models[args.name].read_text())
        return EXIT_OK
    for name, path in models.items():
        print(f"{name}\t{path}")
    return EXIT_OK


def _config(args) -> SolverConfig | None:
    opts = {}
    if getattr(args, "tol", None) is not None:
        opts["tol_residual"] = args.tol
    if getattr(args, "max_iters", None) is not None:
        opts["max_iters"] = args.max_iters
    return SolverConfig(**opts) if opts else None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cyclesim",
        description="Steady-state 0D rocket engine cycle modeling and simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt_default="csv"):
        p.add_argument("--format", choices=("csv", "json"), default=fmt_default)
        p.add_argument("--tol", type=float, default=None,
                       help="scaled residual tolerance")
        p.add_argument("--max-iters", dest="max_iters", type=int, default=None)

    p = sub.add_parser("validate", help="degrees-of-freedom check")
    p.add_argument("model")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("design", help="size a model at its design point")
    p.add_argument("model")
    p.add_argument("--out", required=True, help="sized model file to write")
    p.add_argument("--set", action="append", metavar="comp.qty=value",
                   help="additional design spec")
    common(p, fmt_default="text")
    p.set_defaults(fn=cmd_design)

    p = sub.add_parser("simulate", help="off-design simulation of a sized model")
    p.add_argument("model")
    p.add_argument("--set", action="append", metavar="comp.param=value",
                   help="boundary override")
    p.add_argument("--out", default=None, help="results file (default stdout)")
    common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("sweep", help="continuation sweep over a parameter")
    p.add_argument("model")
    p.add_argument("--param", required=True)
    p.add_argument("--from", dest="from_", type=float, required=True)
    p.add_argument("--to", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--free", default=None,
                   help="boundary to release when pinning a spec quantity")
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("examples", help="list or print bundled example models")
    p.add_argument("name", nargs="?", default=None)
    p.set_defaults(fn=cmd_examples)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _FILE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FILE
    except _SOLVER_ERRORS as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except CycleError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
