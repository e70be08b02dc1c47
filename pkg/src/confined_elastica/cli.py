"""Command line entry point: ``elastica <subcommand> [flags]``.

Every subcommand accepts ``--config file.json`` whose keys mirror the long
flags (``grid-n`` or ``grid_n``); flags given on the command line win.
Outputs are written atomically.  Exit status is 0 on success, 1 when a
solver does not converge or a check fails, and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings

import numpy as np

from . import buckling, closedform, disksolver, linesolver, verify
from .core import curve_length_energy, radial_energy, radial_length

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- output helpers ------------------------------------------------------------

def _num(value):
    """Shortest round-trip text for a float (at most 17 significant digits)."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (np.integer, np.bool_)):
        return value.item()
    return value


def _json_text(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else _num(v) for v in row])
    return buf.getvalue()


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def _sidecar(path):
    root, ext = os.path.splitext(path)
    return (root if ext.lower() == ".csv" else path) + ".json"


def _emit(args, text):
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _summary(text):
    print(text, file=sys.stderr if _summary.to_stderr else sys.stdout)


_summary.to_stderr = False


# -- subcommands ---------------------------------------------------------------

def _cmd_closed_form(args):
    p = closedform.params()
    if args.format == "csv":
        phi = closedform.sample_minimizer(n=args.grid_n, radius=args.domain_r)
        _emit(args, _csv_text(["x", "phi"], zip(phi.x, phi.values)))
    else:
        _emit(args, _json_text({"rho": p.rho, "r": p.r, "mu": p.mu, "alpha": p.alpha, "a": p.a,
                                "theta": p.theta}))
    _summary(f"closed-form: theta={_num(p.theta)}")
    return EXIT_OK


def _cmd_line_solve(args):
    if args.alpha < 0:
        raise UsageError("--alpha must be >= 0")
    cfg = linesolver.LineSolveConfig(domain_radius=args.domain_r, n=args.grid_n)
    if args.alpha == 0:
        report = linesolver.minimize_theta(cfg)
    else:
        report = linesolver.minimize_theta_alpha(args.alpha, cfg)
    phi = report.minimizer
    meta = {
        "theta_est": report.objective,
        "alpha": args.alpha,
        "iterations": report.iterations,
        "converged": report.converged,
        "residuals": {
            "length": report.length_constraint_residual,
            "positivity": report.positivity_violation,
            "grad_norm": report.grad_norm,
        },
    }
    if args.format == "csv":
        _emit(args, _csv_text(["x", "phi"], zip(phi.x, phi.values)))
        if args.out:
            write_atomic(_sidecar(args.out), _json_text(meta))
    else:
        _emit(args, _json_text({**meta, "x": phi.x, "phi": phi.values}))
    _summary(f"line-solve: alpha={_num(args.alpha)} theta_est={_num(report.objective)} "
             f"converged={_num(report.converged)}")
    return EXIT_OK if report.converged else EXIT_FAIL


def _parse_floats(text, flag):
    try:
        values = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag} expects comma-separated numbers") from None
    if not values:
        raise UsageError(f"{flag} is empty")
    return values


def _jobs(args):
    if args.jobs is not None:
        if args.jobs < 1:
            raise UsageError("--jobs must be positive")
        return args.jobs
    try:
        return disksolver.default_jobs()
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cmd_disk_sweep(args):
    if args.deltas is None:
        raise UsageError("--deltas is required")
    deltas = _parse_floats(args.deltas, "--deltas")
    cfg = disksolver.DiskSolveConfig(n=args.grid_n, delta=deltas[0])
    rows, fit = disksolver.scaling_sweep(deltas, cfg, jobs=_jobs(args))
    header = ["delta", "w_min", "excess", "ratio", "iterations", "length_residual"]
    text = _csv_text(header, [[getattr(r, k) for k in header] for r in rows])
    _emit(args, text)
    if args.out:
        write_atomic(_sidecar(args.out), _json_text({
            "exponent": fit.exponent, "prefactor": fit.prefactor,
            "failures": [{"delta": d, "message": m} for d, m in fit.failures]}))
    _summary(f"disk-sweep: exponent={_num(fit.exponent)} prefactor={_num(fit.prefactor)} "
             f"failures={len(fit.failures)}")
    return EXIT_FAIL if fit.failures else EXIT_OK


def _cmd_construct(args):
    if args.kind == "helix":
        eta = 0.05 if args.eta is None else args.eta
        gamma = disksolver.helix_construction(eta, args.m, n=args.grid_n or 512)
        s = np.arange(gamma.n) * (2.0 * math.pi / gamma.n)
        length, energy = curve_length_energy(gamma)
        header = ["s", "x", "y", "z"]
        points = gamma.points
    elif args.kind == "spiral":
        if args.length is None:
            raise UsageError("construct spiral needs --length")
        result = disksolver.spiral_construction(args.length, 2.0 if args.c is None else args.c)
        gamma = result.curve
        s = np.arange(gamma.n) * (2.0 * math.pi / gamma.n)
        length, energy = result.length, result.energy
        header = ["s", "x", "y"]
        points = gamma.points
    else:
        if args.delta is None:
            raise UsageError("construct bump needs --delta")
        psi = closedform.sample_minimizer(n=4001, radius=2.0)
        profile, rho = disksolver.bump_construction(psi, args.delta, n=args.grid_n or 2048)
        gamma = profile.curve()
        s = profile.s
        length, energy = radial_length(profile), radial_energy(profile)
        header = ["s", "x", "y"]
        points = gamma.points
    rows = (np.column_stack([s, points]))
    _emit(args, _csv_text(header, rows))
    if args.out:
        write_atomic(_sidecar(args.out), _json_text({"length": length, "energy": energy}))
    _summary(f"construct {args.kind}: length={_num(length)} energy={_num(energy)}")
    return EXIT_OK


def _parse_sweep(text):
    parts = str(text).split(":")
    if len(parts) != 3:
        raise UsageError("--sweep-h expects lo:hi:n")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError("--sweep-h expects lo:hi:n") from None
    if not (0 < lo <= hi) or n < 1:
        raise UsageError("--sweep-h needs 0 < lo <= hi and n >= 1")
    return np.linspace(lo, hi, n) if n > 1 else np.array([lo])


def _cmd_bifurcation(args):
    needed = {"chi_h": args.chi_h, "c_stretch": args.c_stretch, "r_o": args.r_o, "h": args.h,
              "delta": args.delta}
    missing = [k.replace("_", "-") for k, v in needed.items() if v is None]
    if missing:
        raise UsageError("missing flags: " + ", ".join("--" + m for m in missing))
    if not args.delta > 0:
        raise UsageError("--delta must be positive")
    base = dict(chi_H=args.chi_h, c_stretch=args.c_stretch, r_o=args.r_o, h=args.h,
                alpha_adh=args.alpha or 0.0, delta=args.delta)
    if args.sweep_h:
        rows = []
        for h in _parse_sweep(args.sweep_h):
            out = buckling.decide(buckling.BucklingInput(**{**base, "h": float(h)}))
            rows.append([float(h), out.delta_crit, out.regime.value])
        _emit(args, _csv_text(["h", "delta_crit", "regime_at_delta"], rows))
        _summary(f"bifurcation: {len(rows)} thickness values")
        return EXIT_OK
    inp = buckling.BucklingInput(**base)
    out = buckling.decide(inp)
    _emit(args, _json_text({"lambda": out.lam, "lambda0": buckling.lambda_critical(),
                            "regime": out.regime.value, "t_star": out.t_star,
                            "delta_crit": out.delta_crit}))
    _summary(f"bifurcation: lambda={_num(out.lam)} regime={out.regime.value}")
    return EXIT_OK


def _cmd_verify(args):
    suite = args.suite or "all"
    if suite not in verify.SUITES + ("all",):
        raise UsageError(f"unknown suite {suite!r}")

    def echo(row):
        print(f"{'PASS' if row.ok else 'FAIL'} [{row.suite}] {row.name}: {row.detail}")

    rows = verify.run_suite(suite, echo=echo)
    failed = sum(not r.ok for r in rows)
    print(f"verify {suite}: {len(rows) - failed}/{len(rows)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


# -- parser --------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser():
    parser = _Parser(prog="elastica", description="Confined elastica: solvers and constructions.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="command")
    sub.required = True

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="JSON file with default flag values")
        p.add_argument("--out", help="output path (default: standard output)")
        p.set_defaults(func=func)
        return p

    p = add("closed-form", _cmd_closed_form, "constants of the explicit line minimiser")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--grid-n", type=int, default=4001)
    p.add_argument("--domain-r", type=float, default=4.0)

    p = add("line-solve", _cmd_line_solve, "numerical minimiser of the line problem")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--grid-n", type=int, default=2001)
    p.add_argument("--domain-r", type=float, default=4.0)
    p.add_argument("--format", choices=["json", "csv"], default="csv")

    p = add("disk-sweep", _cmd_disk_sweep, "least energy in the disk across excess lengths")
    p.add_argument("--deltas")
    p.add_argument("--grid-n", type=int, default=2048)
    p.add_argument("--jobs", type=int)

    p = add("construct", _cmd_construct, "explicit competitor curves")
    p.add_argument("kind", choices=["helix", "spiral", "bump"])
    p.add_argument("--eta", type=float)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--length", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--grid-n", type=int)

    p = add("bifurcation", _cmd_bifurcation, "compression or buckling of a confined shell")
    p.add_argument("--chi-h", type=float)
    p.add_argument("--c-stretch", type=float)
    p.add_argument("--r-o", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--delta", type=float)
    p.add_argument("--sweep-h")

    p = add("verify", _cmd_verify, "run invariant suites")
    p.add_argument("--suite", default="all")
    return parser


def _apply_config(parser, argv):
    """Load ``--config`` and install its values as subcommand defaults."""
    known, _ = parser.parse_known_args(argv)
    path = getattr(known, "config", None)
    if not path:
        return
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(config, dict):
        raise UsageError("config file must hold a JSON object")
    subparser = parser._subparsers._group_actions[0].choices[known.command]
    dests = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, value in config.items():
        dest = str(key).lstrip("-").replace("-", "_")
        if dest not in dests or dest in ("config", "help", "func"):
            raise UsageError(f"unknown config key {key!r}")
        action = dests[dest]
        if action.type is not None and value is not None:
            try:
                value = action.type(value)
            except (TypeError, ValueError):
                raise UsageError(f"config key {key!r}: bad value {value!r}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config key {key!r}: {value!r} is not one of {list(action.choices)}")
        defaults[dest] = value
    subparser.set_defaults(**defaults)


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        _summary.to_stderr = args.out is None and args.command != "verify"
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, ValueError) as exc:
        print(f"elastica: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"elastica: failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main():
    sys.exit(run())
