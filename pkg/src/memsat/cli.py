"""Command-line front end.

Exit codes: 0 success (or solved), 10 unsolved within the step budget,
2 usage error, 3 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path

from . import dynamics, fixedpoint, harness
from .barthel import GeneratorConfig, as_fraction, generate
from .formula import DimacsError, FormulaError, emit_dimacs, parse_dimacs

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_UNSOLVED = 10


class InputError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty size list")
    return values


def _count(text: str) -> int:
    # accepts 1e7 style budgets
    try:
        value = float(text) if any(c in text for c in ".eE") else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if value < 0 or value != int(value):
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return int(value)


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def _read_formula(path: str):
    try:
        data = sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return parse_dimacs(data)
    except (DimacsError, FormulaError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def cmd_generate(args) -> int:
    cfg = GeneratorConfig(args.num_vars, args.ratio, args.seed)
    inst = generate(cfg)
    dimacs = emit_dimacs(inst.formula)
    if args.out is None:
        if args.json:
            _emit(args, {**inst.sidecar(), "dimacs": dimacs.decode("ascii")}, "")
        else:
            sys.stdout.buffer.write(dimacs)
        return EXIT_OK
    out = Path(args.out)
    sidecar = out.with_suffix(".json")
    out.write_bytes(dimacs)
    sidecar.write_text(inst.sidecar_json())
    meta = inst.sidecar()
    _emit(args, {**{k: meta[k] for k in ("seed", "N", "M", "ratio")},
                 "cnf": str(out), "sidecar": str(sidecar)},
          f"wrote {out} (N={meta['N']}, M={meta['M']}) and {sidecar}")
    return EXIT_OK


def _params(args):
    if args.engine == "fixed":
        return replace(fixedpoint.FixedParams(), max_steps=args.max_steps, dt_shift=args.dt_shift)
    return replace(dynamics.Params(), max_steps=args.max_steps)


def cmd_solve(args) -> int:
    f = _read_formula(args.file)
    if args.engine == "fixed":
        res = fixedpoint.solve_q14(f, _params(args), args.seed, trace_path=args.trace)
    else:
        if args.trace:
            raise InputError("--trace is only available with --engine fixed")
        res = dynamics.solve(f, _params(args), args.seed)
    payload = res.to_dict()
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    if res.solved:
        lits = " ".join(str(i + 1 if b else -(i + 1)) for i, b in enumerate(res.assignment))
        text = f"s SATISFIABLE\nc steps {res.steps}\nc wall_time {res.wall_time:.6f}\nv {lits} 0"
    else:
        text = f"s UNKNOWN\nc steps {res.steps} (budget exhausted)"
    _emit(args, payload, text)
    return EXIT_OK if res.solved else EXIT_UNSOLVED


def cmd_bench(args) -> int:
    report = harness.run_ensemble(
        sizes=args.sizes,
        runs_per_size=args.runs_per_size,
        base_seed=args.seed,
        engine=args.engine,
        ratio=args.ratio,
        max_steps=args.max_steps,
        params=_params(args),
        jobs=args.jobs,
        trace_dir=args.trace,
    )
    if args.out:
        out = Path(args.out)
        fmt = "csv" if out.suffix.lower() == ".csv" else "json"
        out.write_bytes(harness.export(report, fmt))
    lines = [f"{'N':>6} {'runs':>6} {'solved':>7} {'median_steps':>13}"]
    for s in report.sizes:
        lines.append(f"{s.n_vars:>6} {s.runs:>6} {s.solved:>7} {str(s.median_steps):>13}")
    if report.fit is not None:
        err = "" if report.fit.exponent_stderr is None else f" +/- {report.fit.exponent_stderr:.3f}"
        lines.append(f"fit: steps ~ {report.fit.prefactor:.4g} * N^{report.fit.exponent:.3f}{err}")
    if report.excluded_sizes:
        lines.append(f"excluded (no solved runs): {report.excluded_sizes}")
    _emit(args, report.to_dict(), "\n".join(lines))
    return EXIT_OK


def cmd_fit(args) -> int:
    try:
        text = Path(args.file).read_text()
        points = harness.read_size_medians_csv(text)
        fit = harness.fit_power_law(points)
    except OSError as exc:
        raise InputError(f"cannot read {args.file}: {exc.strerror}") from exc
    except (ValueError, IndexError) as exc:
        raise InputError(f"{args.file}: {exc}") from exc
    err = "n/a" if fit.exponent_stderr is None else f"{fit.exponent_stderr:.4f}"
    _emit(args, {"points": [list(p) for p in points], **asdict(fit)},
          f"exponent {fit.exponent:.4f} (stderr {err}), prefactor {fit.prefactor:.6g}, "
          f"{fit.num_points} points")
    return EXIT_OK


def cmd_resources(args) -> int:
    est = harness.estimate_resources(args.num_vars, args.steps)
    payload = {**asdict(est), "projected_time_s": est.projected_time_s}
    lines = [
        f"N={est.n_vars}: LUTs {est.luts}, DSPs {est.dsps}, "
        f"fits VCU118: {'yes' if est.fits_vcu118 else 'no'}",
    ]
    if not est.in_domain:
        lines.append(f"warning: LUT fit is only linear for N >= {harness.LUT_FIT_MIN_N}")
    if est.projected_time_ns is not None:
        lines.append(f"projected FPGA time: {est.projected_time_ns / 1e6:g} ms "
                     f"({args.steps} steps x {est.projected_step_ns} ns)")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memsat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, engine=True):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        if engine:
            p.add_argument("--engine", choices=harness.ENGINES, default="fixed")
            p.add_argument("--max-steps", type=_count, default=10**8)
            p.add_argument("--dt-shift", type=int, default=4,
                           help="Euler step 2**-k for the fixed engine")

    p = sub.add_parser("generate", help="write a planted Barthel instance")
    p.add_argument("-n", "--num-vars", type=int, required=True)
    p.add_argument("--ratio", type=as_fraction, default=as_fraction("4.3"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out")
    common(p, engine=False)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="solve a DIMACS 3-CNF file")
    p.add_argument("file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", help="write the RunResult JSON here")
    p.add_argument("--trace", help="binary per-step state dump (fixed engine)")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="median steps-to-solution over generated ensembles")
    p.add_argument("--sizes", type=_int_list, default=[20, 40, 60])
    p.add_argument("--runs-per-size", type=int, default=10)
    p.add_argument("--ratio", type=as_fraction, default=as_fraction("4.3"))
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--out", help="report file (.csv or .json)")
    p.add_argument("--trace", help="directory for per-run traces (fixed engine)")
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fit", help="power-law fit of (N, median) CSV data")
    p.add_argument("file")
    common(p, engine=False)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("resources", help="FPGA LUT/DSP and time projection")
    p.add_argument("-n", "--num-vars", type=int, required=True)
    p.add_argument("--steps", type=_count)
    common(p, engine=False)
    p.set_defaults(func=cmd_resources)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"memsat: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"memsat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
