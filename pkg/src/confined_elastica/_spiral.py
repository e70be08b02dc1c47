"""A long embedded closed curve in the unit disk built from a double spiral.

Two interleaved Archimedean arms wind between radii ``rho_L`` and
``rho_L + B/2`` where ``B = c L^(-1/2)`` and ``rho_L = 1 - B``.  The curve runs
out along the first arm, turns around in the gap next to the unit circle,
runs back in along the second arm and turns around again inside the inner
arm.  Both turns are polar curves ``(theta(u), r(u))`` with angular speed
``1 - 2 S(u / tau)`` for a smooth step ``S`` that is flat at both ends, so
the whole curve is C^infinity in its parameter.  The winding angle is
chosen so that the length equals ``L``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import shapely

from .core import SampledCurve, curve_length_energy


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def smoothstep(x):
    """``S(x) = e^(-1/x) / (e^(-1/x) + e^(-1/(1-x)))`` and its first two derivatives."""
    x = np.asarray(x, dtype=float)
    inner = (x > 0.0) & (x < 1.0)
    xi = np.where(inner, x, 0.5)
    g = 1.0 / (1.0 - xi) - 1.0 / xi
    g1 = 1.0 / (1.0 - xi) ** 2 + 1.0 / xi**2
    g2 = 2.0 / (1.0 - xi) ** 3 - 2.0 / xi**3
    s = _sigmoid(g)
    ds = s * (1.0 - s)
    dds = ds * (1.0 - 2.0 * s)
    S = np.where(inner, s, np.where(x >= 1.0, 1.0, 0.0))
    S1 = np.where(inner, ds * g1, 0.0)
    S2 = np.where(inner, dds * g1 * g1 + ds * g2, 0.0)
    return S, S1, S2


def _bump(x):
    # b(x) = S(2x) S(2 - 2x): flat at 0 and 1, equal to 1 at x = 1/2
    a, a1, a2 = smoothstep(2.0 * x)
    c, c1, c2 = smoothstep(2.0 - 2.0 * x)
    b = a * c
    b1 = 2.0 * (a1 * c - a * c1)
    b2 = 4.0 * (a2 * c - 2.0 * a1 * c1 + a * c2)
    return b, b1, b2


def _excursion(x):
    # Psi(x) = x b(x); the factor x keeps the radial speed positive at the tip
    b, b1, b2 = _bump(x)
    return x * b, b + x * b1, 2.0 * b1 + x * b2


@dataclass(frozen=True)
class _Layout:
    L: float
    c: float
    rho: float
    band: float
    turn_out: float
    turn_in: float
    tau: float


def _layout(L, c):
    band = c / math.sqrt(L)
    if not band < 0.5:
        raise ValueError("c L^(-1/2) must be below 0.5 to leave room inside the spiral")
    return _Layout(L=L, c=c, rho=1.0 - band, band=band, turn_out=band / 4.0,
                   turn_in=band / 2.0, tau=8.0 * band / 4.0)


def _hairpin(u, tau, p, r0, height, sign):
    """Polar turn from angular speed ``sign`` to ``-sign`` over ``u in [0, tau]``.

    Returns ``theta - theta_0``, ``r`` and first and second ``u``-derivatives.
    The radius shifts by ``sign * p/2`` plus an excursion of size ``height``
    on the same side, so the return leg never meets the outgoing one.
    """
    x = u / tau
    S, S1, S2 = smoothstep(x)
    P, P1, P2 = _excursion(x)
    omega = sign * (1.0 - 2.0 * S)
    omega1 = -sign * 2.0 * S1 / tau
    omega2 = -sign * 2.0 * S2 / tau**2
    # int_0^u (1 - 2 S(v / tau)) dv, by quadrature of the step on the given nodes
    theta = sign * _integral_of_step(u, tau)
    k = p / (2.0 * math.pi)
    r = r0 + k * theta + sign * (0.5 * p * S + height * P)
    r1 = k * omega + sign * (0.5 * p * S1 + height * P1) / tau
    r2 = k * omega1 + sign * (0.5 * p * S2 + height * P2) / tau**2
    return theta, omega, omega1, r, r1, r2


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(40)


def _integral_of_step(u, tau):
    # exact to round-off: Gauss-Legendre on [0, u] for the smooth integrand
    u = np.asarray(u, dtype=float)
    half = 0.5 * u[..., None]
    v = half * (1.0 + _GL_NODES)
    S, _, _ = smoothstep(v / tau)
    return (half[..., 0]) * ((1.0 - 2.0 * S) @ _GL_WEIGHTS)


class _Spiral:
    def __init__(self, layout, winding):
        self.lay = layout
        self.winding = winding
        self.pitch = 0.5 * layout.band * 2.0 * math.pi / winding
        tau = layout.tau
        # parameter ranges of the four pieces
        self.breaks = np.cumsum([0.0, winding, tau, winding, tau])

    @property
    def period(self):
        return float(self.breaks[-1])

    def evaluate(self, t):
        """``(x, y)``, first and second derivatives at parameters ``t``."""
        lay, p, W = self.lay, self.pitch, self.winding
        k = p / (2.0 * math.pi)
        t = np.mod(np.asarray(t, dtype=float), self.period)
        b = self.breaks
        th = np.empty_like(t)
        th1 = np.empty_like(t)
        th2 = np.zeros_like(t)
        r = np.empty_like(t)
        r1 = np.empty_like(t)
        r2 = np.zeros_like(t)

        m = t < b[1]
        th[m], th1[m] = t[m], 1.0
        r[m], r1[m] = lay.rho + k * t[m], k

        m = (t >= b[1]) & (t < b[2])
        d, o, o1, rr, rr1, rr2 = _hairpin(t[m] - b[1], lay.tau, p, lay.rho + k * W, lay.turn_out, 1.0)
        th[m], th1[m], th2[m] = W + d, o, o1
        r[m], r1[m], r2[m] = rr, rr1, rr2

        m = (t >= b[2]) & (t < b[3])
        back = W - (t[m] - b[2])
        th[m], th1[m] = back, -1.0
        r[m], r1[m] = lay.rho + 0.5 * p + k * back, -k

        m = t >= b[3]
        d, o, o1, rr, rr1, rr2 = _hairpin(t[m] - b[3], lay.tau, p, lay.rho + 0.5 * p, lay.turn_in, -1.0)
        th[m], th1[m], th2[m] = d, o, o1
        r[m], r1[m], r2[m] = rr, rr1, rr2

        cs, sn = np.cos(th), np.sin(th)
        pos = np.column_stack([r * cs, r * sn])
        # d/dt (r e_r) = r' e_r + r th' e_th, and once more
        radial1, angular1 = r1, r * th1
        radial2 = r2 - r * th1**2
        angular2 = 2.0 * r1 * th1 + r * th2
        d1 = np.column_stack([radial1 * cs - angular1 * sn, radial1 * sn + angular1 * cs])
        d2 = np.column_stack([radial2 * cs - angular2 * sn, radial2 * sn + angular2 * cs])
        return pos, d1, d2

    def nodes(self, count):
        return np.arange(count) * (self.period / count)

    def length_energy(self, count):
        """Length and energy by the periodic trapezoid rule on exact derivatives."""
        _, d1, d2 = self.evaluate(self.nodes(count))
        speed2 = (d1 * d1).sum(axis=1)
        cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        dt = self.period / count
        return dt * float(np.sqrt(speed2).sum()), dt * float((cross**2 / speed2**2.5).sum())


def _node_count(layout, winding):
    # resolve the turns (about 400 nodes each) and the gap between arms
    dt_turn = layout.tau / 400.0
    pitch = 0.5 * layout.band * 2.0 * math.pi / winding
    dt_arm = min(0.02, math.sqrt(pitch))
    period = 2.0 * winding + 2.0 * layout.tau
    return int(math.ceil(period / min(dt_turn, dt_arm) / 2.0)) * 2


@dataclass(frozen=True)
class SpiralResult:
    curve: SampledCurve
    length: float
    energy: float
    winding: float
    rho: float
    exact_length: float
    exact_energy: float


def spiral_construction(L: float, c: float = 2.0) -> SpiralResult:
    """Double-spiral competitor of length ``L`` inside the closed unit disk.

    The winding angle of each arm is solved so that the length, computed
    from exact derivatives, equals ``L`` to 1e-10 relative.  The sampled
    curve is checked for self-intersection (as a polygon) and for
    containment; ``length`` and ``energy`` are then measured on the samples
    with ``curve_length_energy``.
    """
    if not L >= 50:
        raise ValueError("L must be at least 50")
    if not c > 0:
        raise ValueError("c must be positive: with c = 0 the spiral touches the boundary")
    lay = _layout(float(L), float(c))

    def excess(winding):
        spiral = _Spiral(lay, winding)
        return spiral.length_energy(_node_count(lay, winding))[0] - L

    mean_radius = lay.rho + lay.band / 4.0
    guess = L / (2.0 * mean_radius)
    winding = scipy.optimize.brentq(excess, 0.8 * guess, 1.05 * guess, xtol=1e-12, rtol=1e-14)
    spiral = _Spiral(lay, winding)
    count = _node_count(lay, winding)
    points, _, _ = spiral.evaluate(spiral.nodes(count))
    exact_length, exact_energy = spiral.length_energy(count)
    if np.max(np.hypot(points[:, 0], points[:, 1])) > 1.0:
        raise RuntimeError("spiral leaves the unit disk")
    if not shapely.LinearRing(points).is_simple:
        raise RuntimeError("spiral is not embedded at the sample resolution")
    curve = SampledCurve(points, periodic=True)
    length, energy = curve_length_energy(curve)
    return SpiralResult(curve, length, energy, winding, lay.rho, exact_length, exact_energy)
