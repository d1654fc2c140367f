"""Command-line interface.

Subcommands: ``solve`` (closed-form answer as JSON), ``oracle`` (brute-force
answer), ``verify`` (cross-check, PASS/FAIL report), ``field`` (objective or
gradient CSV export), ``levels`` (single-sensor level-radius table).

Exit codes: 0 success/PASS, 1 analytic answer unresolved (oracle fallback
embedded), 2 invalid input, 3 verification FAIL.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import analytic, fieldgen, oracle
from .geom import GeometryError
from .model import ScenarioError, load_scenario

EXIT_OK = 0
EXIT_UNRESOLVED = 1
EXIT_BAD_INPUT = 2
EXIT_VERIFY_FAIL = 3


def _emit(payload: dict, out_path: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _read_scenario(path: str):
    try:
        return load_scenario(path)
    except FileNotFoundError:
        raise ScenarioError(f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        )


def _cmd_solve(args) -> int:
    scenario = _read_scenario(args.input)
    solution = analytic.solve(scenario)
    _emit(solution.to_json(), args.output)
    return EXIT_OK if solution.resolved else EXIT_UNRESOLVED


def _cmd_oracle(args) -> int:
    scenario = _read_scenario(args.input)
    grid = oracle.default_grid(scenario, resolution=args.res)
    sol = oracle.solve_oracle(scenario, grid)
    _emit(sol.to_json(), args.output)
    return EXIT_OK


def _cmd_verify(args) -> int:
    scenario = _read_scenario(args.input)
    solution = analytic.solve(scenario)
    grid = oracle.default_grid(scenario, resolution=args.res)
    oracle_sol = oracle.solve_oracle(scenario, grid)
    report = oracle.verify(solution, oracle_sol, scenario, tol=args.tol)
    sys.stdout.write(f"case: {solution.case}\n")
    sys.stdout.write(report.to_text() + "\n")
    if report.status == "ORACLE-ONLY":
        return EXIT_UNRESOLVED
    return EXIT_OK if report.passed else EXIT_VERIFY_FAIL


def _cmd_field(args) -> int:
    scenario = _read_scenario(args.input)
    grid = oracle.default_grid(scenario, resolution=args.res)
    if args.what == "objective":
        fieldgen.write_objective_csv(args.output, scenario, grid)
    else:
        fieldgen.write_gradient_csv(args.output, scenario, grid)
    return EXIT_OK


def _cmd_levels(args) -> int:
    scenario = _read_scenario(args.input)
    if scenario.count != 1:
        raise ScenarioError("levels requires a single-sensor scenario")
    try:
        levels = [float(tok) for tok in args.levels.split(",") if tok.strip()]
    except ValueError:
        raise ScenarioError(f"bad --levels list: {args.levels!r}")
    rows = fieldgen.level_radii(scenario.sensors[0].d, scenario.model, levels)
    sys.stdout.write("level,inner,outer\n")
    for row in rows:
        inner = "" if row["inner"] is None else f"{row['inner']:.17g}"
        sys.stdout.write(f"{row['level']:.17g},{inner},{row['outer']:.17g}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="locus",
        description="Exact argmin sets for range-based source localization, "
                    "with brute-force verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="closed-form solution set as JSON")
    p_solve.add_argument("-i", "--input", required=True, help="scenario JSON file")
    p_solve.add_argument("-o", "--output", help="output JSON path (default stdout)")
    p_solve.set_defaults(func=_cmd_solve)

    p_oracle = sub.add_parser("oracle", help="brute-force minimizer output as JSON")
    p_oracle.add_argument("-i", "--input", required=True)
    p_oracle.add_argument("-o", "--output")
    p_oracle.add_argument("--res", type=int, default=None, help="grid points per axis")
    p_oracle.add_argument("--tol", type=float, default=1e-5, help="(accepted for symmetry)")
    p_oracle.set_defaults(func=_cmd_oracle)

    p_verify = sub.add_parser("verify", help="run solver and oracle, report PASS/FAIL")
    p_verify.add_argument("-i", "--input", required=True)
    p_verify.add_argument("--tol", type=float, default=1e-5, help="position tolerance")
    p_verify.add_argument("--res", type=int, default=None)
    p_verify.set_defaults(func=_cmd_verify)

    p_field = sub.add_parser("field", help="export objective/gradient grid as CSV")
    p_field.add_argument("-i", "--input", required=True)
    p_field.add_argument("--what", choices=("objective", "gradient"), required=True)
    p_field.add_argument("--res", type=int, default=None)
    p_field.add_argument("-o", "--output", required=True)
    p_field.set_defaults(func=_cmd_field)

    p_levels = sub.add_parser("levels", help="single-sensor level-radius table")
    p_levels.add_argument("-i", "--input", required=True)
    p_levels.add_argument("--levels", required=True, help="comma-separated level values")
    p_levels.set_defaults(func=_cmd_levels)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, GeometryError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
