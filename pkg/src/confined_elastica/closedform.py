"""Explicit minimiser of the line obstacle problem.

The minimiser of ``int (phi'')^2`` over ``phi >= 0`` with unit linearised
excess length is

    u(x) = a - x^2/2 + alpha cos(mu x)   for |x| < r,   u = 0 otherwise,

whose constants all follow from the first positive root of ``tan rho = rho``.
Candidate solutions of the Euler-Lagrange equation with a general frequency
``rho = mu r`` come in a trigonometric and a hyperbolic family; their length
and energy are available in closed form through ``branch_length_energy``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from ._roots import bisect_newton
from .core import GridFunction

__all__ = [
    "ClosedFormParams",
    "BranchSign",
    "solve_tan_fixed_point",
    "params",
    "theta",
    "eval_minimizer",
    "sample_minimizer",
    "branch_profile",
    "branch_length_energy",
    "el_residual",
]


@dataclass(frozen=True)
class ClosedFormParams:
    rho: float
    r: float
    mu: float
    alpha: float
    a: float
    theta: float


class BranchSign(enum.Enum):
    """Sign of the Lagrange multiplier of the length constraint."""

    TRIGONOMETRIC = "negative-multiplier"
    HYPERBOLIC = "positive-multiplier"


def solve_tan_fixed_point() -> float:
    """First positive root of ``tan rho = rho``, to 1e-12.

    Solved as ``sin rho - rho cos rho = 0`` on ``(pi, 3 pi / 2)``, where the
    left side changes sign and the tangent has no pole.
    """
    return bisect_newton(
        lambda t: math.sin(t) - t * math.cos(t),
        math.pi,
        1.5 * math.pi,
        df=lambda t: t * math.sin(t),
        xtol=1e-13,
    )


@functools.lru_cache(maxsize=None)
def params() -> ClosedFormParams:
    """The constants of the explicit minimiser, derived from the root alone.

    At the root ``cot rho = 1 / rho`` and ``sin rho = -rho / sqrt(1 + rho^2)``,
    which give ``a`` and ``alpha`` without evaluating trigonometric functions.
    """
    rho = solve_tan_fixed_point()
    r = 6.0 ** (1.0 / 3.0)
    return ClosedFormParams(
        rho=rho,
        r=r,
        mu=rho / r,
        alpha=r * r * math.sqrt(1.0 + rho * rho) / (rho * rho),
        a=(0.5 + 1.0 / (rho * rho)) * r * r,
        theta=r * rho * rho,
    )


def theta() -> float:
    return params().theta


def eval_minimizer(x, order: int = 0):
    """Value or derivative (``order`` 0 to 3) of the explicit minimiser.

    Vectorised over ``x``.  Every derivative vanishes for ``|x| >= r``; the
    third derivative jumps at the free boundary.
    """
    if order not in (0, 1, 2, 3):
        raise ValueError("order must be 0, 1, 2 or 3")
    p = params()
    x = np.asarray(x)
    if x.dtype != np.longdouble:
        x = x.astype(float)
    mx = p.mu * x
    if order == 0:
        v = _value_from_edge(p, np.clip(p.r - np.abs(x), 0.0, None))
    elif order == 1:
        v = -x - p.alpha * p.mu * np.sin(mx)
    elif order == 2:
        v = -1.0 - p.alpha * p.mu**2 * np.cos(mx)
    else:
        v = p.alpha * p.mu**3 * np.sin(mx)
    out = np.where(np.abs(x) < p.r, v, 0.0)
    return float(out) if out.ndim == 0 else out


def _y_minus_sin(y):
    # y - sin y without cancellation: Taylor series below 1/2
    small = np.abs(y) < 0.5
    ys = np.where(small, y, 0.0)
    term = ys**3 / 6.0
    total = term
    for k in range(2, 12):
        term = -term * ys * ys / ((2 * k) * (2 * k + 1))
        total = total + term
    return np.where(small, total, y - np.sin(y))


def _value_from_edge(p, d):
    # u at distance d inside the support edge, rewritten with the identities
    # alpha sin(rho) mu = -r and alpha cos(rho) mu^2 = -1 at the root so that
    # u ~ (rho^2 / 6 r) d^3 stays accurate down to d ~ 1e-100
    y = 0.5 * p.mu * d
    return (p.r / p.mu) * _y_minus_sin(2.0 * y) - (2.0 / p.mu**2) * _y_minus_sin(y) * (y + np.sin(y))


def sample_minimizer(n: int = 4001, radius: float = 4.0, dtype=float) -> GridFunction:
    """The explicit minimiser sampled on ``n`` nodes of ``[-radius, radius]``.

    ``dtype=np.longdouble`` keeps extended precision, which pushes the
    round-off floor of fourth differences (about ``16 eps / h^4``) below the
    truncation error on fine grids.
    """
    return GridFunction.sample(eval_minimizer, -radius, radius, n, nonneg=True, dtype=dtype)


def _check_branch(rho, r, branch):
    if not (rho > 0 and r > 0):
        raise ValueError("rho and r must be positive")
    if not isinstance(branch, BranchSign):
        raise TypeError("branch must be a BranchSign")
    if branch is BranchSign.TRIGONOMETRIC:
        # a pole of the closed formulas sits at every multiple of pi
        k = round(rho / math.pi)
        if k >= 1 and abs(rho - k * math.pi) <= 1e-12 * max(1.0, rho):
            raise ValueError("rho is a multiple of pi, where the trigonometric branch is singular")


def branch_profile(rho: float, r: float, branch: BranchSign):
    """Even solution of the Euler-Lagrange equation clamped at ``x = +-r``.

    Returns a vectorised callable.  The trigonometric branch is
    ``a - x^2/2 + alpha cos(mu x)``, the hyperbolic branch uses ``cosh``;
    in both ``mu = rho / r`` and ``(a, alpha)`` enforce ``phi(r) = phi'(r) = 0``.
    """
    _check_branch(rho, r, branch)
    mu = rho / r
    if branch is BranchSign.TRIGONOMETRIC:
        alpha = -r / (mu * math.sin(rho))
        a = 0.5 * r * r - alpha * math.cos(rho)
        wave = np.cos
    else:
        alpha = r / (mu * math.sinh(rho))
        a = 0.5 * r * r - alpha * math.cosh(rho)
        wave = np.cosh

    def phi(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) < r, a - 0.5 * x * x + alpha * wave(mu * x), 0.0)

    phi.a = a
    phi.alpha = alpha
    phi.mu = mu
    return phi


def branch_length_energy(rho: float, r: float, branch: BranchSign) -> tuple[float, float]:
    """Closed-form ``(L, E)`` of ``branch_profile(rho, r, branch)``."""
    _check_branch(rho, r, branch)
    if branch is BranchSign.TRIGONOMETRIC:
        sn, cs = math.sin(rho), math.cos(rho)
        energy = (rho**2 / sn**2 + rho * cs / sn - 2.0) * r
        length = (-1.0 / 3.0 + (1.0 / sn - cs / rho) / (2.0 * sn)) * r**3
    else:
        sn, cs = math.sinh(rho), math.cosh(rho)
        energy = (rho**2 / sn**2 + rho * cs / sn - 2.0) * r
        length = (-1.0 / 3.0 + (cs / rho - 1.0 / sn) / (2.0 * sn)) * r**3
    return length, energy


def el_residual(phi: GridFunction, theta: float, support_tol: float = 0.0) -> float:
    """Worst residual of ``phi'''' + (theta/6)(phi'' + 1) = 0`` on the support.

    Five-point fourth difference and three-point second difference at interior
    nodes where ``phi > support_tol``.  Nodes within three grid steps of the
    contact set are skipped, since the minimiser is only C^{2,1} across the
    free boundary.  Returns 0 when no node qualifies.
    """
    v = phi.values
    h = phi.h
    inside = v > support_tol
    keep = inside.copy()
    for shift in range(1, 4):
        keep[shift:] &= inside[:-shift]
        keep[:-shift] &= inside[shift:]
    keep[:3] = False
    keep[-3:] = False
    idx = np.nonzero(keep)[0]
    if idx.size == 0:
        return 0.0
    d4 = (v[idx - 2] - 4.0 * v[idx - 1] + 6.0 * v[idx] - 4.0 * v[idx + 1] + v[idx + 2]) / h**4
    d2 = (v[idx - 1] - 2.0 * v[idx] + v[idx + 1]) / h**2
    return float(np.max(np.abs(d4 + theta / 6.0 * (d2 + 1.0))))
