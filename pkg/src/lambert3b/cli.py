"""Command-line front end.

Exit codes: 0 success, 1 malformed or unreadable input, 2 the closed form
cannot be built (solvability or domain), 3 runtime breakdown (singularity,
collision, step budget), 4 ``check`` found a violated validity condition.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .compare import closed_form_trajectory, format_number, oracle_channels, oracle_initial_state, run_comparison
from .errors import (
    ApproximationBreakdown,
    CollisionError,
    ConvergenceError,
    DegenerateError,
    DomainError,
    ScenarioError,
    SingularityError,
    SolvabilityError,
    StepLimitError,
)
from .lambert_w import Branch, w_eval
from .oracle import integrate
from .scenario_io import load_scenario, schema_text
from .two_body import ValidityReport, check_validity, derive_constants

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOLVABILITY = 2
EXIT_RUNTIME = 3
EXIT_CHECK_FAILED = 4

CSV_HEADER = ("t", "r1", "theta1", "r2", "theta2", "r3", "theta3", "x1", "y1", "x2", "y2", "x3", "y3")

_RUNTIME_ERRORS = (ApproximationBreakdown, SingularityError, CollisionError, StepLimitError,
                   DegenerateError, ConvergenceError)


class _Parser(argparse.ArgumentParser):
    # usage errors are malformed input, not a solvability failure
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _err(msg: str) -> None:
    print(f"lambert3b: {msg}", file=sys.stderr)


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {category.__name__}: {message}", file=sys.stderr)


def _write_table(path: Path, t, r, theta) -> None:
    """Rows of ``t, (r_i, theta_i) x 3, (x_i, y_i) x 3``; ``r`` and ``theta`` are ``(n, 3)``."""
    x = r * np.cos(theta)
    y = r * np.sin(theta)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for i, ti in enumerate(t):
            row = [ti]
            for k in range(3):
                row += [r[i, k], theta[i, k]]
            for k in range(3):
                row += [x[i, k], y[i, k]]
            writer.writerow([format_number(v) for v in row])


def _closed_table(cfg, dc):
    cf = closed_form_trajectory(cfg, dc)
    r = np.column_stack([cf.r1, cf.r2, cf.r3])
    theta = np.column_stack([cf.theta1, cf.theta2, cf.theta3])
    if cf.third.failures:
        warnings.warn(f"third body closed form undefined at {len(cf.third.failures)} of "
                      f"{cf.t.size} samples (written as nan)", RuntimeWarning, stacklevel=2)
    return cf, r, theta


def _oracle_table(cfg, icfg, dc, closed):
    initial, masses, note = oracle_initial_state(cfg, dc)
    if note:
        warnings.warn(note, RuntimeWarning, stacklevel=2)
    traj = integrate(initial, masses, cfg.G, icfg, closed.t[-1], cfg.dt_out)
    ch = oracle_channels(traj, closed)
    r = np.column_stack([ch["r1"], ch["r2"], ch["r3"]])
    theta = np.column_stack([ch["theta1"], ch["theta2"], ch["theta3"]])
    return traj.t, r, theta


def cmd_simulate(args) -> int:
    cfg, icfg = load_scenario(args.scenario)
    dc = derive_constants(cfg)
    out = Path(args.output)
    closed, r, theta = _closed_table(cfg, dc)
    if args.method == "closed":
        _write_table(out, closed.t, r, theta)
        return EXIT_OK
    t_o, r_o, theta_o = _oracle_table(cfg, icfg, dc, closed)
    if args.method == "oracle":
        _write_table(out, t_o, r_o, theta_o)
        return EXIT_OK
    stem = out.with_suffix("")
    suffix = out.suffix or ".csv"
    _write_table(Path(f"{stem}_closed{suffix}"), closed.t, r, theta)
    _write_table(Path(f"{stem}_oracle{suffix}"), t_o, r_o, theta_o)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg, icfg = load_scenario(args.scenario)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    series, summary = run_comparison(cfg, icfg)
    series.to_csv(outdir / "errors.csv")
    (outdir / "summary.txt").write_text(summary.to_text())
    return EXIT_OK


def _report_without_constants(cfg) -> ValidityReport:
    """Report for a scenario whose closed form cannot be built; judged at ``t0`` only."""
    A = 2.0 * cfg.G * cfg.total_mass
    B = cfg.rdot_o ** 2 - A / cfg.r_o
    theta_ok = abs(cfg.thetadot_o) < 1.0
    radius_ok = B != 0 and cfg.r_o > A / abs(B)
    margin = A / (B * cfg.r_o) if B != 0 else math.inf
    return ValidityReport(b_positive=B > 0, theta_rate_ok=theta_ok, radius_ok=bool(radius_ok),
                          binomial_margin=margin, overall=False)


def cmd_check(args) -> int:
    cfg, _ = load_scenario(args.scenario)
    try:
        report = check_validity(cfg, derive_constants(cfg))
    except (SolvabilityError, DomainError) as exc:
        _err(str(exc))
        report = _report_without_constants(cfg)
    for key, value in report.as_dict().items():
        text = format_number(value) if isinstance(value, float) else str(value).lower()
        print(f"{key}={text}")
    return EXIT_OK if report.overall else EXIT_CHECK_FAILED


def cmd_lambertw(args) -> int:
    try:
        x = float(args.x)
    except ValueError:
        _err(f"cannot parse {args.x!r} as a real number")
        return EXIT_INPUT
    res = w_eval(args.branch, x)
    print(f"value={format_number(res.value)}")
    print(f"residual={format_number(res.residual)}")
    return EXIT_OK


def cmd_schema(args) -> int:
    sys.stdout.write(schema_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lambert3b", description="Closed-form escape trajectories versus a numerical oracle.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="write trajectories to CSV")
    s.add_argument("scenario")
    s.add_argument("output", help="CSV path; with --method both, _closed and _oracle are appended to the stem")
    s.add_argument("--method", choices=("closed", "oracle", "both"), default="closed")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compare", help="write errors.csv and summary.txt")
    c.add_argument("scenario")
    c.add_argument("outdir")
    c.set_defaults(func=cmd_compare)

    k = sub.add_parser("check", help="print the validity report")
    k.add_argument("scenario")
    k.set_defaults(func=cmd_check)

    w = sub.add_parser("lambertw", help="evaluate one real branch of Lambert W")
    w.add_argument("--branch", type=int, choices=(0, -1), default=0)
    w.add_argument("x")
    w.set_defaults(func=cmd_lambertw)

    sc = sub.add_parser("schema", help="print the scenario file schema")
    sc.set_defaults(func=cmd_schema)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "lambertw":
        args.branch = Branch.coerce(args.branch)
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        warnings.showwarning = _show_warning
        try:
            return args.func(args)
        except ScenarioError as exc:
            _err(str(exc))
            return EXIT_INPUT
        except OSError as exc:
            _err(str(exc))
            return EXIT_INPUT
        except (SolvabilityError, DomainError) as exc:
            _err(str(exc))
            return EXIT_SOLVABILITY
        except _RUNTIME_ERRORS as exc:
            _err(f"{type(exc).__name__}: {exc}")
            return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
