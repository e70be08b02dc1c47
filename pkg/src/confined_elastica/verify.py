"""Invariant suites, runnable from the command line.

Each check returns ``(ok, detail)``.  ``run_suite`` collects ``CheckResult``
rows; every solve made along the way is also checked against its lower
bound, ``6^(1/3)`` for line problems and ``4 pi^2 / (2 pi + delta)`` in the disk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import buckling, closedform, disksolver, linesolver
from .core import (
    GridFunction,
    PeriodicProfile,
    SampledCurve,
    curve_length_energy,
    line_energy,
    line_length,
    radial_curvature,
    radial_energy,
    radial_length,
    rescale_profile,
)

SUITES = ("scaling", "closed-form", "line", "disk", "buckling")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    ok: bool
    detail: str


def _close(a, b, tol):
    return abs(a - b) <= tol


# -- scaling -------------------------------------------------------------------

def _random_bump(rng, n=801):
    x = np.linspace(-3.0, 3.0, n)
    width = rng.uniform(0.5, 2.5)
    height = rng.uniform(0.2, 3.0)
    values = height * np.clip(1.0 - (x / width) ** 2, 0.0, None) ** 3
    return GridFunction(-3.0, 3.0, values, nonneg=True)


def _scaling_checks():
    rng = np.random.default_rng(20240517)
    worst_l = worst_e = 0.0
    for _ in range(20):
        phi = _random_bump(rng)
        rho = float(np.exp(rng.uniform(-4.0, 4.0)))
        scaled = rescale_profile(phi, rho)
        worst_l = max(worst_l, abs(line_length(scaled) - rho * line_length(phi)) / (1.0 + abs(rho * line_length(phi))))
        worst_e = max(worst_e, abs(line_energy(scaled) / (rho ** (1.0 / 3.0) * line_energy(phi)) - 1.0))
    yield "length scales by rho", worst_l <= 1e-12, f"worst relative error {worst_l:.2e}"
    yield "energy scales by rho^(1/3)", worst_e <= 1e-12, f"worst relative error {worst_e:.2e}"

    worst = 0.0
    s = np.arange(256) * (2.0 * math.pi / 256)
    base = np.column_stack([np.cos(s) * (1.0 + 0.2 * np.cos(3 * s)), np.sin(s) * (1.0 + 0.2 * np.cos(3 * s))])
    length, energy = curve_length_energy(SampledCurve(base))
    for factor in (0.1, 0.5, 3.0, 40.0):
        l2, e2 = curve_length_energy(SampledCurve(factor * base))
        worst = max(worst, abs(l2 / (factor * length) - 1.0), abs(e2 * factor / energy - 1.0))
    yield "curve length and energy scale by c and 1/c", worst <= 1e-12, f"worst relative error {worst:.2e}"

    phi = closedform.sample_minimizer(n=2001)
    rho = 1e-3
    scaled = rescale_profile(phi, rho)
    ok = _close(line_length(scaled), rho * line_length(phi), 1e-15) and _close(
        line_energy(scaled), rho ** (1.0 / 3.0) * line_energy(phi), 1e-11)
    yield "rescaled minimiser keeps the energy-length ratio", ok, f"E/L^(1/3) = {line_energy(scaled) / line_length(scaled) ** (1 / 3):.10f}"


# -- closed form -------------------------------------------------------------

def _closed_form_checks():
    p = closedform.params()
    residual = math.sin(p.rho) - p.rho * math.cos(p.rho)
    yield "tan fixed point residual", abs(residual) <= 1e-12, f"sin - rho cos = {residual:.2e}"
    table = {"rho": (p.rho, 4.4934), "theta": (p.theta, 36.6890), "r": (p.r, 1.8171),
             "mu": (p.mu, 2.4728), "alpha": (p.alpha, 0.7528), "a": (p.a, 1.8145)}
    for name, (value, ref) in table.items():
        yield f"{name} matches {ref}", _close(value, ref, 1e-3), f"{name} = {value!r}"
    u = closedform.eval_minimizer
    ok = abs(u(p.r - 1e-12)) < 1e-9 and abs(u(p.r - 1e-12, 1)) < 1e-9
    yield "free boundary conditions", ok, f"u(r) = {u(p.r - 1e-12):.1e}, u'(r) = {u(p.r - 1e-12, 1):.1e}"
    phi = closedform.sample_minimizer(n=4001)
    L, E = line_length(phi), line_energy(phi)
    yield "unit excess length", _close(L, 1.0, 1e-4), f"L = {L!r}"
    yield "energy equals Theta", _close(E, p.theta, 0.05), f"E = {E!r}"
    res = closedform.el_residual(phi, p.theta)
    yield "Euler-Lagrange residual", res <= 0.05, f"max residual {res:.2e}"
    length, energy = closedform.branch_length_energy(p.rho, p.r, closedform.BranchSign.TRIGONOMETRIC)
    yield "branch formulas at the minimiser", _close(length, 1.0, 1e-12) and _close(energy, p.theta, 1e-10), \
        f"L = {length!r}, E = {energy!r}"


# -- line ----------------------------------------------------------------------

def _line_checks(bounds):
    report = linesolver.minimize_theta()
    bounds.append(("line", report.objective, linesolver.LOWER_BOUND))
    theta = closedform.theta()
    yield "minimize_theta within 1% of Theta", abs(report.objective / theta - 1.0) <= 0.01, \
        f"objective {report.objective!r}"
    yield "minimize_theta converged", report.converged, report.message
    yield "solution feasible", report.length_constraint_residual <= 1e-10 and report.positivity_violation == 0.0, \
        f"length residual {report.length_constraint_residual:.1e}"
    margins = linesolver.variational_diagnostics(report.minimizer)
    yield "height and slope inequalities", margins.all_hold(1e-6), repr(margins)
    quotient = linesolver.theta_alpha_quotient(1.0)
    bounds.append(("line", quotient.objective, linesolver.LOWER_BOUND))
    ok = report.objective - 1e-3 * theta <= quotient.objective <= report.objective + 4.0 + 1e-3 * theta
    yield "Theta <= Theta_1 <= Theta + 4", ok, f"Theta_1 = {quotient.objective!r}"


# -- disk ----------------------------------------------------------------------

def _disk_checks(bounds):
    delta = 1e-3
    cfg = disksolver.DiskSolveConfig(delta=delta)
    report = disksolver.minimize_disk(cfg)
    bounds.append(("disk", report.objective, disksolver.disk_lower_bound(delta)))
    yield "minimize_disk converged", report.converged, report.message
    phi = report.minimizer
    yield "feasible", report.length_constraint_residual <= cfg.tol_length and phi.values.min() >= 0.0, \
        f"length residual {report.length_constraint_residual:.1e}"
    bump, _ = disksolver.bump_construction(closedform.sample_minimizer(n=4001, radius=2.0), delta, n=cfg.n)
    bump_energy = radial_energy(bump)
    yield "no worse than the bump construction", report.objective <= 1.01 * bump_energy, \
        f"W = {report.objective!r}, bump {bump_energy!r}"
    theta = closedform.theta()
    ratio = (report.objective - 2.0 * math.pi) / (theta * delta ** (1.0 / 3.0))
    yield "excess energy near Theta delta^(1/3)", 0.9 <= ratio <= 1.15, f"ratio {ratio:.4f}"
    kappa = radial_curvature(phi)
    yield "curvature changes sign", kappa.min() < 0.0, f"min curvature {kappa.min():.3f}"
    eta = np.array([0.02, 0.04, 0.06, 0.08, 0.1])
    radii = [max(np.linalg.norm(disksolver.helix_construction(e).points, axis=1)) for e in eta]
    yield "helix inside the unit ball", max(radii) < 1.0, f"max |gamma| = {max(radii)!r}"


# -- buckling ------------------------------------------------------------------

def _buckling_checks():
    lam0 = buckling.lambda_critical()
    yield "lambda0 in (1.0341, 1.0342)", 1.0341 < lam0 < 1.0342, f"lambda0 = {lam0!r}"
    bare = buckling.bare_coefficient()
    yield "bare coefficient in [33.4, 33.9]", 33.4 <= bare <= 33.9, f"{bare!r}"
    printed = buckling.printed_adhesive_coefficient()
    yield "printed adhesive coefficient in [12.55, 12.68]", 12.55 <= printed <= 12.68, f"{printed!r}"
    values = [buckling.e_lambda_min(lam)[1] for lam in np.linspace(0.0, 3.0, 100)]
    yield "least e_lambda nondecreasing in lambda", bool(np.all(np.diff(values) >= -1e-14)), \
        f"range [{min(values):.4f}, {max(values):.4f}]"
    rng = np.random.default_rng(7)
    mismatches = 0
    for _ in range(100):
        inp = buckling.BucklingInput(
            chi_H=float(np.exp(rng.uniform(-2, 2))), c_stretch=float(np.exp(rng.uniform(-2, 2))),
            r_o=float(np.exp(rng.uniform(-1, 1))), h=float(np.exp(rng.uniform(-7, -4))),
            alpha_adh=float(rng.choice([0.0, np.exp(rng.uniform(-8, -2))])), delta=1.0)
        inp = buckling.BucklingInput(**{**inp.__dict__, "delta": float(np.exp(rng.uniform(-8, -1)))})
        out = buckling.decide(inp)
        if out.regime is buckling.Regime.BOUNDARY_BAND:
            continue
        if (out.regime is buckling.Regime.BUCKLE) != (inp.delta > out.delta_crit):
            mismatches += 1
    yield "buckle exactly above delta_crit", mismatches == 0, f"{mismatches} mismatches in 100 inputs"


def run_suite(name: str, echo=None) -> list[CheckResult]:
    """Run one suite (or ``"all"``) and return its rows; ``echo`` sees each row."""
    if name == "all":
        names = SUITES
    elif name in SUITES:
        names = (name,)
    else:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    bounds = []
    makers = {
        "scaling": _scaling_checks,
        "closed-form": _closed_form_checks,
        "line": lambda: _line_checks(bounds),
        "disk": lambda: _disk_checks(bounds),
        "buckling": _buckling_checks,
    }
    rows = []
    for suite in names:
        for check, ok, detail in makers[suite]():
            row = CheckResult(suite, check, bool(ok), detail)
            rows.append(row)
            if echo:
                echo(row)
    if bounds:
        bad = [(kind, value, bound) for kind, value, bound in bounds if not value >= bound]
        row = CheckResult(",".join(names), "solver objectives above their lower bounds", not bad,
                          f"{len(bounds)} solves, {len(bad)} violations")
        rows.append(row)
        if echo:
            echo(row)
    return rows
