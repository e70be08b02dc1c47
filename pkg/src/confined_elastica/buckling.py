"""Reduced model for an elastic inner shell confined by an outer shell.

A cylindrical inner shell of thickness ``h`` with preferred excess length
``delta`` either compresses back to the outer radius or buckles into a ridge
of excess length ``t``.  After scaling ``t = s delta`` the energy is
proportional to

    e_lam(s) = (s - 1)^2 + lam s^(1/3),

and the dimensionless group ``lam`` decides between the two: the global
minimiser of ``e_lam`` is positive (buckling) for ``lam < lam0`` and zero
(compression) for ``lam > lam0``.
"""

from __future__ import annotations

import enum
import math
import threading
import warnings
from dataclasses import dataclass

import numpy as np

from ._roots import bisect_newton
from .closedform import theta

__all__ = [
    "BucklingInput",
    "BucklingOutcome",
    "Regime",
    "DEAD_BAND",
    "e_lambda",
    "e_lambda_min",
    "lambda_critical",
    "outer_radius",
    "inner_prestrain",
    "theta_alpha_asymptote",
    "bifurcation_lambda",
    "delta_crit",
    "bare_coefficient",
    "adhesive_coefficient",
    "printed_adhesive_coefficient",
    "decide",
]

DEAD_BAND = 1e-4
_SCAN_NODES = 400


class Regime(enum.Enum):
    COMPRESS = "compress"
    BUCKLE = "buckle"
    BOUNDARY_BAND = "boundary-band"


@dataclass(frozen=True)
class BucklingInput:
    """Material and geometric data, in any consistent unit system.

    ``chi_H`` is the bending modulus, ``c_stretch`` the stretching modulus,
    ``r_o`` the outer radius, ``h`` the inner thickness, ``alpha_adh`` the
    adhesion strength and ``delta`` the preferred excess length.
    """

    chi_H: float
    c_stretch: float
    r_o: float
    h: float
    alpha_adh: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        for name in ("chi_H", "c_stretch", "r_o", "h"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        for name in ("alpha_adh", "delta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be non-negative and finite, got {value!r}")
        if self.h / self.r_o > 0.1:
            warnings.warn("h/r_o > 0.1: the thin-shell reduction assumes h << r_o", stacklevel=3)


@dataclass(frozen=True)
class BucklingOutcome:
    regime: Regime
    lam: float
    s_star: float
    t_star: float
    delta_crit: float


def e_lambda(s, lam):
    s = np.asarray(s, dtype=float)
    out = (s - 1.0) ** 2 + lam * np.cbrt(s)
    return float(out) if out.ndim == 0 else out


def _stationary_t(lam):
    """Roots of ``6 t^5 - 6 t^2 + lam`` in ``(0, 2]``."""

    def f(t):
        return 6.0 * t**5 - 6.0 * t * t + lam

    def df(t):
        return 30.0 * t**4 - 12.0 * t

    grid = np.linspace(0.0, 2.0, _SCAN_NODES + 1)[1:]
    values = 6.0 * grid**5 - 6.0 * grid**2 + lam
    roots = [float(t) for t, v in zip(grid, values) if v == 0.0]
    for i in np.nonzero(values[:-1] * values[1:] < 0.0)[0]:
        roots.append(bisect_newton(f, float(grid[i]), float(grid[i + 1]), df=df, xtol=1e-15))
    return sorted(roots)


def e_lambda_min(lam: float) -> tuple[float, float]:
    """Global minimiser and minimum ``(s_star, e_star)`` of ``e_lam`` on ``s >= 0``.

    Stationary points solve ``2(s - 1) + (lam/3) s^(-2/3) = 0``; with
    ``t = s^(1/3)`` this is ``6 t^5 - 6 t^2 + lam = 0``, whose positive roots
    lie in ``(0, 1]``.  Each root is compared with the endpoint value
    ``e_lam(0) = 1``; ties go to the endpoint.
    """
    if not (math.isfinite(lam) and lam >= 0):
        raise ValueError("lambda must be non-negative and finite")
    best_s, best_e = 0.0, 1.0
    for t in _stationary_t(lam):
        s = t**3
        e = e_lambda(s, lam)
        if e < best_e:
            best_s, best_e = s, e
    return best_s, best_e


_lock = threading.Lock()
_lambda0 = None


def lambda_critical() -> float:
    """The switching value ``lam0`` of the global minimiser of ``e_lam``.

    Found by bisection on ``[1, 1.95]``: interior minimisers exist below the
    switch and the endpoint wins above it.  Computed once per process, under
    a lock, and read-only afterwards.
    """
    global _lambda0
    with _lock:
        if _lambda0 is None:
            lo, hi = 1.0, 1.95
            while hi - lo > 1e-13:
                mid = 0.5 * (lo + hi)
                if e_lambda_min(mid)[0] > 0.0:
                    lo = mid
                else:
                    hi = mid
            _lambda0 = 0.5 * (lo + hi)
        return _lambda0


def outer_radius(L_o: float, eps_o: float) -> float:
    """``argmin_{r > 0} (r - L_o)^2 + 4 pi^2 eps_o / r``.

    The stationary point is bracketed by ``(L_o, L_o + 2 pi^2 eps_o / L_o^2)``,
    where the derivative changes sign, and polished by Newton.
    """
    if not (L_o > 0 and eps_o > 0):
        raise ValueError("L_o and eps_o must be positive")
    c = 4.0 * math.pi**2 * eps_o
    return bisect_newton(
        lambda r: 2.0 * (r - L_o) - c / (r * r),
        L_o,
        L_o + 0.5 * c / (L_o * L_o),
        df=lambda r: 2.0 + 2.0 * c / r**3,
        xtol=1e-15 * L_o,
    )


def inner_prestrain(inp: BucklingInput) -> float:
    """``eps_i = chi_H pi^2 h^2 / (c_stretch L)`` with the length ``L`` taken as ``r_o``."""
    return inp.chi_H * math.pi**2 * inp.h**2 / (inp.c_stretch * inp.r_o)


def theta_alpha_asymptote(alpha_tilde: float) -> float:
    """Large-adhesion asymptote ``(3 pi^(2/3) / 2) alpha^(2/3)``."""
    return 1.5 * math.pi ** (2.0 / 3.0) * alpha_tilde ** (2.0 / 3.0)


def _prefactor(inp: BucklingInput) -> float:
    if inp.alpha_adh > 0:
        alpha_tilde = 4.0 * inp.alpha_adh / (inp.chi_H * inp.h**2)
        big = theta_alpha_asymptote(alpha_tilde)
    else:
        big = theta()
    return big * inner_prestrain(inp) / inp.r_o ** (4.0 / 3.0)


def bifurcation_lambda(inp: BucklingInput) -> float:
    """``lam = Theta eps_i / (r_o^(4/3) delta^(5/3))``, with ``Theta`` replaced by
    its adhesive asymptote when ``alpha_adh > 0``."""
    if not inp.delta > 0:
        raise ValueError("delta must be positive")
    return _prefactor(inp) / inp.delta ** (5.0 / 3.0)


def delta_crit(inp: BucklingInput) -> float:
    """The excess length at which ``lam`` equals ``lam0``.

    Without adhesion this is ``(Theta pi^2 chi_H / (lam0 c r_o^(7/3)))^(3/5) h^(6/5)``.
    With adhesion the same condition gives
    ``(3/(2 lam0))^(3/5) (4 pi)^(2/5) pi^(6/5) chi_H^(1/5) c^(-3/5) r_o^(-7/5) (alpha h)^(2/5)``.
    Both are computed from the defining condition, so ``decide`` and this
    threshold always agree.  Strong adhesion pushes the adhesive threshold
    out of the small excess length regime; that case warns.
    """
    value = (_prefactor(inp) / lambda_critical()) ** 0.6
    if inp.alpha_adh > 0 and value / inp.r_o > 0.1:
        warnings.warn(
            f"delta_crit/r_o = {value / inp.r_o:.3g}: outside the small excess length regime",
            stacklevel=2,
        )
    return value


def bare_coefficient() -> float:
    """``(Theta pi^2 / lam0)^(3/5)``, the prefactor of ``delta_crit`` at unit moduli and no adhesion."""
    return (theta() * math.pi**2 / lambda_critical()) ** 0.6


def adhesive_coefficient() -> float:
    """Prefactor of the adhesive ``delta_crit`` at unit moduli, as the model implies."""
    return (1.5 / lambda_critical()) ** 0.6 * (4.0 * math.pi) ** 0.4 * math.pi**1.2


def printed_adhesive_coefficient() -> float:
    """``4^(2/5) 3^(2/5) pi^(8/5) / (2 lam0)^(2/5)``.

    This is the form usually quoted for the adhesive prefactor.  It differs
    from ``adhesive_coefficient`` by the factor ``(3/(2 lam0))^(1/5)``.
    """
    return 4.0**0.4 * 3.0**0.4 * math.pi**1.6 / (2.0 * lambda_critical()) ** 0.4


def decide(inp: BucklingInput) -> BucklingOutcome:
    """Compression or buckling for the given input.

    Buckling when ``lam < lam0 - DEAD_BAND``, compression when
    ``lam > lam0 + DEAD_BAND``, and the boundary band in between.  The ridge
    length ``t_star`` is ``s_star * delta`` from the minimiser of ``e_lam``.
    """
    if not inp.delta > 0:
        raise ValueError("delta must be positive")
    lam = bifurcation_lambda(inp)
    lam0 = lambda_critical()
    if lam < lam0 - DEAD_BAND:
        regime = Regime.BUCKLE
    elif lam > lam0 + DEAD_BAND:
        regime = Regime.COMPRESS
    else:
        regime = Regime.BOUNDARY_BAND
    s_star, _ = e_lambda_min(lam)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        threshold = delta_crit(inp)
    return BucklingOutcome(regime, lam, s_star, s_star * inp.delta, threshold)
