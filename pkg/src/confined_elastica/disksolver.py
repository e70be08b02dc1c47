"""Closed curves of prescribed length confined to the unit disk.

For a length ``2 pi + delta`` slightly above the circumference the curve is a
radial graph ``gamma(s) = (1 - phi(s)) (cos s, sin s)`` with ``phi >= 0``.
``minimize_disk`` minimises the discrete elastic energy over such profiles,
``scaling_sweep`` fits the excess energy against ``delta``, and the
remaining functions evaluate explicit competitors: a rescaled bump, a
perturbed circle in space, and a long double spiral.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.interpolate
import scipy.sparse as sp

from . import _stencils
from ._pnewton import projected_newton
from ._roots import bisect_newton
from ._spiral import spiral_construction
from .closedform import sample_minimizer, theta
from .core import GridFunction, PeriodicProfile, SampledCurve, radial_energy, radial_length
from .linesolver import SolveReport

__all__ = [
    "DiskSolveConfig",
    "SweepRow",
    "SweepFit",
    "minimize_disk",
    "scaling_sweep",
    "bump_construction",
    "helix_construction",
    "helix_bending_integral",
    "spiral_construction",
    "disk_lower_bound",
]

MAX_DELTA = 0.5
MAX_NODE_STEP = 0.05


@dataclass(frozen=True)
class DiskSolveConfig:
    """Settings for ``minimize_disk``.

    Penalty weights are in units of ``delta^(-5/3)``: the least energy grows
    like ``Theta delta^(1/3)``, which is concave in ``delta``, and the penalty
    must beat that curvature (about ``Theta delta^(-5/3)``) or the penalised
    problem prefers the circle.
    """

    n: int = 2048
    delta: float = 1e-3
    penalty_weight_schedule: tuple = (1e2, 1e3, 1e4, 1e5)
    max_outer: int = 40
    tol_length: float = 1e-8
    symmetrize: bool = True
    max_inner: int = 200
    grad_tol: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "penalty_weight_schedule", tuple(float(w) for w in self.penalty_weight_schedule))
        if self.n < 16 or self.n % 2:
            raise ValueError("n must be even and at least 16")
        if not 0.0 < self.delta <= MAX_DELTA:
            raise ValueError(f"delta must lie in (0, {MAX_DELTA}], got {self.delta!r}")
        if not self.penalty_weight_schedule or min(self.penalty_weight_schedule) <= 0:
            raise ValueError("penalty_weight_schedule must be a non-empty list of positive weights")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration limits must be positive")
        if not self.tol_length > 0:
            raise ValueError("tol_length must be positive")


def disk_lower_bound(delta: float) -> float:
    """``4 pi^2 / (2 pi + delta)``, below which no closed curve of that length goes."""
    return 4.0 * math.pi**2 / (2.0 * math.pi + delta)


# -- discrete energy with exact derivatives ---------------------------------

def _node_terms(R, P, Q):
    """Energy density ``N^2 D^(-5/2)`` and length density ``sqrt(D)`` with
    first and second derivatives in ``(R, P, Q)``."""
    N = R * R + 2.0 * P * P - R * Q
    D = R * R + P * P
    zero = np.zeros_like(R)
    dN = [2.0 * R - Q, 4.0 * P, -R]
    dD = [2.0 * R, 2.0 * P, zero]
    ddN = {(0, 0): 2.0, (1, 1): 4.0, (0, 2): -1.0}
    ddD = {(0, 0): 2.0, (1, 1): 2.0}

    gN = 2.0 * N * D**-2.5
    gD = -2.5 * N * N * D**-3.5
    gNN = 2.0 * D**-2.5
    gND = -5.0 * N * D**-3.5
    gDD = 8.75 * N * N * D**-4.5
    F = N * N * D**-2.5
    dF = [gN * dN[a] + gD * dD[a] for a in range(3)]
    ddF = {}
    for a in range(3):
        for b in range(a, 3):
            v = gNN * dN[a] * dN[b] + gND * (dN[a] * dD[b] + dN[b] * dD[a]) + gDD * dD[a] * dD[b]
            v = v + gN * ddN.get((a, b), 0.0) + gD * ddD.get((a, b), 0.0)
            ddF[a, b] = v

    G = np.sqrt(D)
    dG = [dD[a] / (2.0 * G) for a in range(3)]
    ddG = {}
    for a in range(3):
        for b in range(a, 3):
            ddG[a, b] = ddD.get((a, b), 0.0) / (2.0 * G) - dD[a] * dD[b] / (4.0 * G**3)
    return F, dF, ddF, G, dG, ddG


class _DiskProblem:
    """Augmented Lagrangian ``W - lam c + (mu/2) c^2`` with ``c = length - target``.

    Variables are the profile values, or with ``symmetrize`` the values at
    ``s in [0, pi]`` extended evenly about ``s = pi``.
    """

    def __init__(self, n, target, symmetrize):
        self.n = n
        self.h = 2.0 * math.pi / n
        self.target = target
        self.D1 = _stencils.periodic_first(n, self.h)
        self.D2 = _stencils.periodic_second(n, self.h)
        if symmetrize:
            half = n // 2
            rows = np.arange(n)
            cols = np.where(rows <= half, rows, n - rows)
            self.E = sp.csr_matrix((np.ones(n), (rows, cols)), shape=(n, half + 1))
        else:
            self.E = sp.identity(n, format="csr")
        self.ops = [self.E, (self.D1 @ self.E).tocsr(), (self.D2 @ self.E).tocsr()]
        self.weights = self.h * np.asarray(self.E.sum(axis=0)).ravel()
        self.lam = 0.0
        self.mu = 1.0

    def profile(self, x):
        return self.E @ x

    def _terms(self, x):
        phi = self.E @ x
        # the stencils do not see the corners of a profile that jumps between
        # neighbouring nodes, so such profiles are left out of the admissible set
        if np.max(np.abs(np.diff(phi, append=phi[:1]))) > MAX_NODE_STEP or phi.max() >= 1.0:
            return None
        R = 1.0 - phi
        P = -(self.D1 @ phi)
        Q = -(self.D2 @ phi)
        return _node_terms(R, P, Q)

    def energy_length(self, x):
        t = self._terms(x)
        if t is None:
            return math.inf, math.nan
        return self.h * float(t[0].sum()), self.h * float(t[3].sum())

    def value(self, x):
        W, length = self.energy_length(x)
        if not math.isfinite(W):
            return math.inf
        c = length - self.target
        return W - self.lam * c + 0.5 * self.mu * c * c

    def _grad(self, dens):
        # d/dx of h sum f(R, P, Q) where (R, P, Q) = (1, 0, 0) - ops x
        return -self.h * sum(op.T @ d for op, d in zip(self.ops, dens))

    def gradients(self, x):
        t = self._terms(x)
        F, dF, _, G, dG, _ = t
        return self.h * float(F.sum()), self._grad(dF), self.h * float(G.sum()), self._grad(dG)

    def value_grad(self, x):
        t = self._terms(x)
        if t is None:
            return math.inf, np.zeros_like(x)
        W, gW, length, gL = self.gradients(x)
        c = length - self.target
        return W - self.lam * c + 0.5 * self.mu * c * c, gW + (self.mu * c - self.lam) * gL

    def hessian(self, x):
        F, dF, ddF, G, dG, ddG = self._terms(x)
        length = self.h * float(G.sum())
        c = length - self.target
        coef = self.mu * c - self.lam
        H = None
        for (a, b), v in ddF.items():
            w = self.h * (v + coef * ddG[a, b])
            block = self.ops[a].T @ sp.diags(w) @ self.ops[b]
            if a != b:
                block = block + block.T
            H = block if H is None else H + block
        gL = self._grad(dG)
        return H.tocsr(), gL[:, None], np.array([[self.mu]])


def _default_bump():
    return sample_minimizer(n=4001, radius=2.0)


def _broad_dent(delta, n):
    # A ((1 + cos(s - pi)) / 2)^k: smooth, touching the circle only at s = 0;
    # narrower dents reach larger excess lengths
    s = np.arange(n) * (2.0 * math.pi / n)
    for k in (2, 8, 32, 128):
        shape = (0.5 * (1.0 + np.cos(s - math.pi))) ** k

        def excess(amplitude):
            return radial_length(PeriodicProfile(amplitude * shape)) - 2.0 * math.pi - delta

        if excess(0.9) > 0:
            return PeriodicProfile(bisect_newton(excess, 0.0, 0.9, xtol=1e-15) * shape)
    raise ValueError(f"no starting profile of excess length {delta}")


def _least_squares_multiplier(problem, x):
    _, gW, _, gL = problem.gradients(x)
    active = x > 0
    if not active.any():
        active = np.ones_like(x, dtype=bool)
    return float(gW[active] @ gL[active] / (gL[active] @ gL[active]))


def minimize_disk(cfg: DiskSolveConfig, init: PeriodicProfile | None = None) -> SolveReport:
    """Minimise the elastic energy of radial graphs with length ``2 pi + delta``.

    The length constraint is handled by an augmented Lagrangian; each inner
    problem is solved by projected Newton on ``phi >= 0``.  The multiplier
    starts from a least-squares fit of the stationarity condition and the
    penalty weight steps through ``cfg.penalty_weight_schedule`` whenever the
    constraint violation fails to drop by a factor of four.  The default
    starting point is the rescaled line minimiser centred at ``s = pi``.

    Profiles that change by more than ``MAX_NODE_STEP`` between neighbouring
    nodes are inadmissible.  For larger ``delta`` (around 0.2 at the default
    resolution) the iterates run into that limit; the solve then stops and
    reports non-convergence with its best iterate.
    """
    target = 2.0 * math.pi + cfg.delta
    problem = _DiskProblem(cfg.n, target, cfg.symmetrize)
    if init is None:
        try:
            init, _ = bump_construction(_default_bump(), cfg.delta, n=cfg.n)
        except ValueError:
            init = _broad_dent(cfg.delta, cfg.n)
    if init.n != cfg.n:
        raise ValueError("initial profile has the wrong number of nodes")
    x = np.asarray(init.values, dtype=float)
    if cfg.symmetrize:
        x = x[: cfg.n // 2 + 1]
    # far from a minimiser the least-squares fit is unreliable; the line
    # problem predicts W'(delta) = Theta delta^(-2/3) / 3 for small delta
    predicted = theta() * cfg.delta ** (-2.0 / 3.0) / 3.0
    problem.lam = min(max(_least_squares_multiplier(problem, x), 0.0), predicted)
    schedule = list(cfg.penalty_weight_schedule)
    level = 0
    unit = cfg.delta ** (-5.0 / 3.0)
    problem.mu = schedule[0] * unit
    _, length = problem.energy_length(x)
    violation = abs(length - target)
    iterations = 0
    inner = None
    converged = False
    steep = False
    for outer in range(cfg.max_outer):
        inner = projected_newton(problem, x, problem.weights, max_iters=cfg.max_inner,
                                 grad_tol=cfg.grad_tol)
        x = inner.x
        iterations += inner.iterations
        _, length = problem.energy_length(x)
        c = length - target
        if abs(c) <= cfg.tol_length and inner.converged:
            converged = True
            break
        phi_now = problem.profile(x)
        if not inner.converged and np.max(np.abs(np.diff(phi_now, append=phi_now[:1]))) >= 0.99 * MAX_NODE_STEP:
            steep = True
            break
        problem.lam -= problem.mu * c
        if abs(c) > 0.25 * violation and level + 1 < len(schedule):
            level += 1
            problem.mu = schedule[level] * unit
        violation = abs(c)

    phi = PeriodicProfile(problem.profile(x))
    W = radial_energy(phi)
    residual = abs(radial_length(phi) - target)
    if converged:
        message = "length constraint and stationarity met"
    elif steep:
        message = "profile steepens past the grid resolution; the radial-graph ansatz breaks down"
    elif inner is not None and not inner.converged:
        message = f"inner solve: {inner.message}"
    else:
        message = "outer iteration cap reached"
    return SolveReport(
        minimizer=phi,
        objective=W,
        length_constraint_residual=residual,
        positivity_violation=max(0.0, -float(phi.values.min())),
        iterations=iterations,
        converged=converged,
        grad_norm=inner.grad_norm if inner else math.nan,
        message=message,
        extras={"multiplier": problem.lam, "penalty_weight": problem.mu, "outer_iterations": outer + 1},
    )


# -- sweeps ------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    delta: float
    w_min: float
    excess: float
    ratio: float
    iterations: int
    length_residual: float


@dataclass(frozen=True)
class SweepFit:
    exponent: float
    prefactor: float
    failures: tuple = ()


def _sweep_point(cfg):
    report = minimize_disk(cfg)
    return cfg.delta, report


def default_jobs() -> int:
    env = os.environ.get("ELASTICA_JOBS")
    if env:
        jobs = int(env)
        if jobs < 1:
            raise ValueError("ELASTICA_JOBS must be a positive integer")
        return jobs
    return os.cpu_count() or 1


def scaling_sweep(deltas, cfg: DiskSolveConfig | None = None, jobs: int | None = None):
    """Solve at each ``delta`` and fit ``excess = prefactor * delta^exponent``.

    Points run in separate processes, at most ``jobs`` at a time.  Returns
    ``(rows, fit)``; rows of non-converged points are kept, but only
    converged points enter the least-squares fit in log-log coordinates,
    which needs at least three of them.
    """
    deltas = [float(d) for d in deltas]
    if len(deltas) < 3:
        raise ValueError("a power-law fit needs at least three deltas")
    for d in deltas:
        if not 0.0 < d <= MAX_DELTA:
            raise ValueError(f"delta must lie in (0, {MAX_DELTA}], got {d!r}")
    base = cfg or DiskSolveConfig()
    configs = [DiskSolveConfig(**{**base.__dict__, "delta": d}) for d in deltas]
    jobs = jobs or default_jobs()
    if jobs == 1:
        results = [_sweep_point(c) for c in configs]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(configs))) as pool:
            results = list(pool.map(_sweep_point, configs))

    rows, good, failures = [], [], []
    for delta, report in results:
        excess = report.objective - 2.0 * math.pi
        rows.append(SweepRow(delta, report.objective, excess, excess / delta ** (1.0 / 3.0),
                             report.iterations, report.length_constraint_residual))
        if report.converged and excess > 0:
            good.append((delta, excess))
        else:
            failures.append((delta, report.message))
    if len(good) < 3:
        raise RuntimeError(f"only {len(good)} sweep points converged; failures: {failures}")
    logd, loge = np.log(np.array(good)).T
    slope, intercept = np.polyfit(logd, loge, 1)
    return rows, SweepFit(float(slope), float(math.exp(intercept)), tuple(failures))


# -- explicit constructions ---------------------------------------------------

def _support_extent(psi: GridFunction) -> float:
    inside = np.nonzero(psi.values > 0)[0]
    if inside.size == 0:
        return 0.0
    x = psi.x
    lo = x[max(inside[0] - 1, 0)]
    hi = x[min(inside[-1] + 1, psi.n - 1)]
    return float(max(abs(lo), abs(hi)))


def bump_construction(psi: GridFunction, delta: float, n: int = 2048) -> tuple[PeriodicProfile, float]:
    """Embed ``psi_rho(x) = rho^(2/3) psi(rho^(-1/3) x)`` at ``s = pi`` with length ``2 pi + delta``.

    ``psi`` is interpolated by a cubic spline (zero outside its support) and
    ``rho`` is found by bisection so that the discrete radial length matches
    to 1e-12.  The rescaled support must fit strictly inside ``(0, 2 pi)``.
    """
    if not 0.0 <= delta <= MAX_DELTA:
        raise ValueError(f"delta must lie in [0, {MAX_DELTA}]")
    s = np.arange(n) * (2.0 * math.pi / n)
    if delta == 0.0:
        return PeriodicProfile(np.zeros(n)), 0.0
    extent = _support_extent(psi)
    if extent == 0.0:
        raise ValueError("psi vanishes identically")
    spline = scipy.interpolate.CubicSpline(psi.x, np.asarray(psi.values, dtype=float))
    lo, hi = psi.lo, psi.hi

    def profile(rho):
        if rho <= 0.0:
            return np.zeros(n)
        xi = (s - math.pi) / rho ** (1.0 / 3.0)
        inside = (xi > lo) & (xi < hi)
        v = np.zeros(n)
        v[inside] = rho ** (2.0 / 3.0) * spline(xi[inside])
        return np.maximum(v, 0.0)

    peak = float(np.max(psi.values))

    def excess(rho):
        return radial_length(PeriodicProfile(profile(rho))) - 2.0 * math.pi - delta

    def fits(rho):
        return rho ** (1.0 / 3.0) * extent < math.pi and rho ** (2.0 / 3.0) * peak < 1.0

    top = 2.0 * delta
    while fits(top) and excess(top) < 0:
        top *= 2.0
    if not fits(top):
        raise ValueError("the rescaled bump does not fit inside the disk along (0, 2 pi)")
    rho = bisect_newton(excess, 0.0, top, xtol=1e-15)
    return PeriodicProfile(profile(rho)), rho


def helix_construction(eta: float, m: int = 3, n: int = 512) -> SampledCurve:
    """``sqrt(1 - eta^2) (cos s, sin s, 0) + (eta / sqrt 2) (0, 0, cos m s)`` at ``n`` nodes."""
    if int(m) != m or m < 3:
        raise ValueError("m must be an integer >= 3")
    if not 0.0 < eta < 0.3:
        raise ValueError("eta must lie in (0, 0.3)")
    s = np.arange(n) * (2.0 * math.pi / n)
    a = math.sqrt(1.0 - eta * eta)
    points = np.column_stack([a * np.cos(s), a * np.sin(s), eta / math.sqrt(2.0) * np.cos(m * s)])
    if np.max(np.linalg.norm(points, axis=1)) >= 1.0:
        raise RuntimeError("helix leaves the open unit ball")
    return SampledCurve(points, periodic=True)


def helix_bending_integral(eta: float, m: int = 3, n: int = 512) -> float:
    """``int |gamma''(s)|^2 ds`` in the parameter ``s``, without arc-length normalisation.

    For small ``eta`` this is ``2 pi + (m^4/2 - 2) pi eta^2 + O(eta^4)``; it is
    not the elastic energy, whose ``eta^2`` coefficient is
    ``(m^4/2 + 1 - 3 m^2/4) pi``.
    """
    helix_construction(eta, m, n)
    s = np.arange(n) * (2.0 * math.pi / n)
    a = math.sqrt(1.0 - eta * eta)
    second = np.column_stack([-a * np.cos(s), -a * np.sin(s),
                              -(m * m) * eta / math.sqrt(2.0) * np.cos(m * s)])
    return float((2.0 * math.pi / n) * (second * second).sum())
