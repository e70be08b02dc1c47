"""Domain types and evaluators for the length and bending functionals.

Two families of functionals live here.  On the line, a nonnegative profile
phi on a finite interval carries the linearised excess length

    L(phi) = int (phi')^2 / 2 - phi dx

and the linearised bending energy E(phi) = int (phi'')^2 dx.  In the unit
disk, a periodic profile describes the radial graph
gamma(s) = (1 - phi(s)) (cos s, sin s), whose length and elastic energy are
evaluated exactly from finite-difference derivatives of phi.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GridFunction",
    "PeriodicProfile",
    "SampledCurve",
    "ScalarFunctionalValue",
    "line_length",
    "line_energy",
    "line_energy_alpha",
    "line_length_estimate",
    "line_energy_estimate",
    "rescale_profile",
    "radial_length",
    "radial_energy",
    "radial_curvature",
    "curve_length_energy",
]


@dataclass(frozen=True)
class GridFunction:
    """Samples of a function at ``n`` uniform nodes of ``[lo, hi]``.

    Parameters
    ----------
    lo, hi : float
        Interval endpoints, both nodes of the grid.
    values : array_like
        Samples, one per node.
    nonneg : bool, optional
        When set, construction fails unless every sample is ``>= 0``.
    """

    lo: float
    hi: float
    values: np.ndarray
    nonneg: bool = False

    def __post_init__(self):
        values = np.array(self.values).ravel()
        if values.dtype != np.longdouble:
            # extended precision is kept for high-order difference diagnostics
            values = values.astype(float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if values.size < 5:
            raise ValueError(f"GridFunction needs n >= 5 nodes, got {values.size}")
        if not self.hi > self.lo:
            raise ValueError("GridFunction needs hi > lo")
        if not np.all(np.isfinite(values)):
            raise ValueError("GridFunction values must be finite")
        if self.nonneg and values.min() < 0.0:
            raise ValueError("GridFunction flagged nonneg has negative samples")
        values.flags.writeable = False

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)

    @classmethod
    def sample(cls, f, lo, hi, n, nonneg=False, dtype=float):
        """Sample a vectorised callable ``f`` on ``n`` nodes of ``[lo, hi]``."""
        x = np.linspace(dtype(lo), dtype(hi), n)
        return cls(lo, hi, np.asarray(f(x), dtype=dtype), nonneg=nonneg)


@dataclass(frozen=True)
class PeriodicProfile:
    """Radial profile sampled at ``n`` uniform nodes ``s_i = 2 pi i / n``.

    The curve is ``gamma(s) = (1 - phi(s)) (cos s, sin s)``; samples must lie
    in ``[0, 1)`` so that the curve is inside the closed unit disk and immersed.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        object.__setattr__(self, "values", values)
        if values.size < 8:
            raise ValueError(f"PeriodicProfile needs n >= 8 nodes, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise ValueError("PeriodicProfile values must be finite")
        if values.max() >= 1.0:
            raise ValueError("PeriodicProfile values must be < 1")
        if values.min() < 0.0:
            raise ValueError("PeriodicProfile values must be >= 0")
        values.flags.writeable = False

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def h(self) -> float:
        return 2.0 * np.pi / self.n

    @property
    def s(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    def curve(self) -> "SampledCurve":
        s = self.s
        radius = 1.0 - self.values
        return SampledCurve(np.column_stack([radius * np.cos(s), radius * np.sin(s)]), periodic=True)


@dataclass(frozen=True)
class SampledCurve:
    """Curve in the plane or in space sampled at uniform parameter nodes.

    A periodic curve is sampled at ``t_i = 2 pi i / n`` (the closing point is
    not repeated); an open curve at ``n`` nodes of ``[0, 1]``.  Both length and
    elastic energy are invariant under affine changes of the parameter, so the
    parameter range carries no information.
    """

    points: np.ndarray
    periodic: bool = True

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        object.__setattr__(self, "points", points)
        if points.ndim != 2 or points.shape[1] not in (2, 3):
            raise ValueError("SampledCurve points must have shape (n, 2) or (n, 3)")
        if points.shape[0] < 8:
            raise ValueError("SampledCurve needs n >= 8 nodes")
        if not np.all(np.isfinite(points)):
            raise ValueError("SampledCurve points must be finite")
        step = np.diff(points, axis=0)
        if self.periodic:
            step = np.vstack([step, points[:1] - points[-1:]])
        if np.any(np.linalg.norm(step, axis=1) == 0.0):
            raise ValueError("SampledCurve has repeated consecutive points")
        points.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class ScalarFunctionalValue:
    value: float
    quadrature_error_estimate: float = field(default=0.0)

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError("functional value must be finite")
        if self.quadrature_error_estimate < 0.0:
            raise ValueError("error estimate must be nonnegative")


# -- line functionals -------------------------------------------------------

def _trapezoid(f, h):
    return h * (f.sum() - 0.5 * (f[0] + f[-1]))


def _first_derivative(v, h):
    return np.gradient(v, h, edge_order=2)


def _second_derivative(v, h):
    d2 = np.empty_like(v)
    d2[1:-1] = (v[:-2] - 2.0 * v[1:-1] + v[2:]) / h**2
    d2[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h**2
    d2[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / h**2
    return d2


def _check_grid(phi):
    if not isinstance(phi, GridFunction):
        raise TypeError("expected a GridFunction")


def _length_from(values, h):
    d1 = _first_derivative(values, h)
    return _trapezoid(0.5 * d1**2 - values, h)


def _energy_from(values, h):
    return _trapezoid(_second_derivative(values, h) ** 2, h)


def line_length(phi: GridFunction) -> float:
    """Linearised excess length ``int (phi')^2/2 - phi``.

    Central differences for ``phi'`` (second-order one-sided at the two
    endpoints) and the composite trapezoid rule; O(h^2) for C^2 data.
    """
    _check_grid(phi)
    return float(_length_from(phi.values, phi.h))


def line_energy(phi: GridFunction) -> float:
    """Bending energy ``int (phi'')^2`` with the three-point second difference."""
    _check_grid(phi)
    return float(_energy_from(phi.values, phi.h))


def line_energy_alpha(phi: GridFunction, alpha: float, support_tol: float = 0.0) -> float:
    """``E(phi) + alpha * h * #{i : phi_i > support_tol}``."""
    _check_grid(phi)
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if support_tol < 0:
        raise ValueError("support_tol must be >= 0")
    support = phi.h * np.count_nonzero(phi.values > support_tol)
    return line_energy(phi) + alpha * support


def _richardson(func, phi):
    value = func(phi.values, phi.h)
    if phi.n % 2 == 1 and phi.n >= 9:
        coarse = func(phi.values[::2], 2.0 * phi.h)
        return ScalarFunctionalValue(float(value), float(abs(value - coarse) / 3.0))
    # even node counts cannot be halved in place; fall back to h^2 times the
    # total variation of the sampled values
    tv = np.abs(np.diff(phi.values)).sum()
    return ScalarFunctionalValue(float(value), float(phi.h**2 * tv))


def line_length_estimate(phi: GridFunction) -> ScalarFunctionalValue:
    """``line_length`` with a Richardson estimate of the discretisation error."""
    _check_grid(phi)
    return _richardson(_length_from, phi)


def line_energy_estimate(phi: GridFunction) -> ScalarFunctionalValue:
    _check_grid(phi)
    return _richardson(_energy_from, phi)


def rescale_profile(phi: GridFunction, rho: float) -> GridFunction:
    """Return ``rho^(2/3) phi(rho^(-1/3) x)`` on the stretched interval.

    Same node count, so the discrete functionals scale exactly:
    ``L -> rho L`` and ``E -> rho^(1/3) E``.
    """
    _check_grid(phi)
    if not rho > 0:
        raise ValueError("rho must be > 0")
    stretch = rho ** (1.0 / 3.0)
    return GridFunction(stretch * phi.lo, stretch * phi.hi, rho ** (2.0 / 3.0) * phi.values, nonneg=phi.nonneg)


# -- radial graphs in the disk ---------------------------------------------

def _periodic_derivatives(v, h):
    fwd = np.roll(v, -1)
    bwd = np.roll(v, 1)
    return (fwd - bwd) / (2.0 * h), (fwd - 2.0 * v + bwd) / h**2


def _check_profile(phi):
    if not isinstance(phi, PeriodicProfile):
        raise TypeError("expected a PeriodicProfile")


def radial_length(phi: PeriodicProfile) -> float:
    """Length ``int sqrt((1 - phi)^2 + phi'^2) ds`` of the radial graph."""
    _check_profile(phi)
    d1, _ = _periodic_derivatives(phi.values, phi.h)
    return float(phi.h * np.sqrt((1.0 - phi.values) ** 2 + d1**2).sum())


def _radial_frame(phi):
    # gamma' and gamma'' in the rotating frame (e_r, e_theta); W is invariant
    # under the rotation back to Cartesian coordinates
    d1, d2 = _periodic_derivatives(phi.values, phi.h)
    radius = 1.0 - phi.values
    g1 = np.column_stack([-d1, radius])
    g2 = np.column_stack([-d2 - radius, -2.0 * d1])
    return g1, g2


def _energy_density(g1, g2):
    speed2 = (g1 * g1).sum(axis=1)
    if np.any(speed2 <= 1e-24 * speed2.max()):
        raise ValueError("curve has a zero-speed node")
    along = (g1 * g2).sum(axis=1)
    normal2 = (g2 * g2).sum(axis=1) - along**2 / speed2
    return np.sqrt(speed2), normal2 / speed2**1.5


def radial_energy(phi: PeriodicProfile) -> float:
    """Elastic energy ``int kappa^2 ds`` of the radial graph of ``phi``."""
    _check_profile(phi)
    g1, g2 = _radial_frame(phi)
    _, density = _energy_density(g1, g2)
    return float(phi.h * density.sum())


def radial_curvature(phi: PeriodicProfile) -> np.ndarray:
    """Signed curvature at the nodes (positive for the unit circle)."""
    _check_profile(phi)
    g1, g2 = _radial_frame(phi)
    cross = g1[:, 0] * g2[:, 1] - g1[:, 1] * g2[:, 0]
    # the frame (e_r, e_theta) is positively oriented
    return cross / ((g1 * g1).sum(axis=1)) ** 1.5


def _spectral_derivatives(points):
    n = points.shape[0]
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        # the Nyquist mode has no well-defined odd derivative
        k1 = k.copy()
        k1[n // 2] = 0.0
    else:
        k1 = k
    coeffs = np.fft.fft(points, axis=0)
    g1 = np.real(np.fft.ifft(1j * k1[:, None] * coeffs, axis=0))
    g2 = np.real(np.fft.ifft(-(k**2)[:, None] * coeffs, axis=0))
    return g1, g2


def curve_length_energy(gamma: SampledCurve) -> tuple[float, float]:
    """Length and elastic energy of a sampled curve in the plane or in space.

    Periodic curves are differentiated spectrally and integrated with the
    periodic trapezoid rule, which is spectrally accurate for smooth closed
    curves.  Open curves use second-order differences on ``[0, 1]``.
    """
    if not isinstance(gamma, SampledCurve):
        raise TypeError("expected a SampledCurve")
    pts = gamma.points
    if gamma.periodic:
        g1, g2 = _spectral_derivatives(pts)
        speed, density = _energy_density(g1, g2)
        h = 2.0 * np.pi / gamma.n
        return float(h * speed.sum()), float(h * density.sum())
    h = 1.0 / (gamma.n - 1)
    g1 = np.gradient(pts, h, axis=0, edge_order=2)
    g2 = np.gradient(g1, h, axis=0, edge_order=2)
    speed, density = _energy_density(g1, g2)
    return float(_trapezoid(speed, h)), float(_trapezoid(density, h))
