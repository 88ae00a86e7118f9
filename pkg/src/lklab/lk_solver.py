"""Numerical Loewner-Kufarev evolution driven by measures on the circle.

The exterior maps ``f_t`` satisfy ``d/dt f_t(z) = z f_t'(z) p_t(z)`` with the
Herglotz function ``p_t(z) = int (z + e^{i theta}) / (z - e^{i theta}) rho_t``.
``f_t(z)`` is obtained from the backward flow

    dv/d sigma = v p_{t - sigma}(v),   v(0) = z,   f_t(z) = v(t),

which moves away from the unit circle (``|v|`` is increasing because
``Re p > 0``), so the integration is stable. ``f_t'(z)`` follows from the
variational equation ``d log v_z / d sigma = p(v) + v p'(v)``.

Drivers are duck-typed: any object with ``T``, ``breakpoints``, ``mass(t)``,
``herglotz(t, w)`` and ``herglotz_with_prime(t, w)`` can drive the solver.
:class:`~lklab.measures.DrivingMeasure` is one such object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np
from scipy.integrate import solve_ivp
from scipy.spatial.distance import directed_hausdorff

from .conformal import SlitParams, slit_length, slit_map_eval
from .errors import DomainError, InvalidInputError, NumericError
from .measures.core import TWO_PI, AtomicSlice, CircleDensity, DrivingMeasure, MeasureSlice

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12


class Driver(Protocol):
    T: float
    breakpoints: np.ndarray

    def mass(self, t: float) -> float: ...

    def herglotz(self, t: float, w): ...

    def herglotz_with_prime(self, t: float, w): ...


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------


class AnalyticDriver:
    """Driver given by closed-form Herglotz functions.

    Parameters
    ----------
    T : float
        Final time.
    p : callable
        ``p(t, w)`` evaluated on complex arrays.
    dp : callable
        ``p'(t, w)``.
    mass : callable, optional
        Circle mass ``m(t)``; defaults to 1.
    density : callable, optional
        ``density(t, theta)`` with respect to ``d theta``; used for entropy
        bounds and plots only.
    breakpoints : sequence of float, optional
        Times where ``p`` is discontinuous in ``t``.
    """

    def __init__(self, T, p, dp, mass=None, density=None, breakpoints=None):
        self.T = float(T)
        self._p = p
        self._dp = dp
        self._mass = mass
        self.density = density
        bp = [0.0, self.T] if breakpoints is None else sorted({0.0, self.T, *map(float, breakpoints)})
        self.breakpoints = np.array(bp)

    def mass(self, t):
        return 1.0 if self._mass is None else float(self._mass(t))

    def herglotz(self, t, w):
        return self._p(t, np.asarray(w, dtype=complex))

    def herglotz_with_prime(self, t, w):
        w = np.asarray(w, dtype=complex)
        return self._p(t, w), self._dp(t, w)


def poisson_driver(R, T: float = 1.0) -> AnalyticDriver:
    """Poisson-kernel driver with parameter ``R > 1`` (constant or callable of ``t``).

    ``p_t(w) = (R w + 1) / (R w - 1)``. ``R = inf`` gives the uniform measure.
    A callable may reach ``R = 1``, where the slice is the unit point mass at
    angle 0.
    """
    if not callable(R) and not float(R) > 1.0:
        raise InvalidInputError(f"Poisson parameter must exceed 1, got {R}")
    R_of_t = R if callable(R) else (lambda t, _R=float(R): _R)

    def r_of(t):
        Rt = float(R_of_t(t))
        if not Rt >= 1.0:
            raise InvalidInputError(f"Poisson parameter must be at least 1, got {Rt} at t = {t}")
        return 0.0 if math.isinf(Rt) else 1.0 / Rt

    def p(t, w):
        r = r_of(t)
        return (w + r) / (w - r)

    def dp(t, w):
        r = r_of(t)
        return -2.0 * r / (w - r) ** 2

    def density(t, theta):
        r = r_of(t)
        if r == 1.0:
            return np.where(np.mod(theta, TWO_PI) == 0.0, np.inf, 0.0)
        return (1.0 - r * r) / (TWO_PI * (1.0 - 2.0 * r * np.cos(theta) + r * r))

    return AnalyticDriver(T, p, dp, density=density)


class DensityFunctionDriver:
    """Driver that samples ``density(t, theta)`` on an ``n_grid`` grid at every call.

    Parameters
    ----------
    density : callable
        ``density(t, theta)`` with respect to ``d theta``.
    T : float
    n_grid : int
    mass : callable, optional
        Declared circle mass ``m(t)``. Samples are rescaled to it, which
        removes the quadrature error of the sampled mass.
    center : float
        Where to put a point mass when the sampled density vanishes
        identically (a support narrower than the grid spacing).
    breakpoints : sequence of float, optional
    """

    def __init__(self, density, T, n_grid=1024, mass=None, center=0.0, breakpoints=None):
        self.density = density
        self.T = float(T)
        self.n_grid = int(n_grid)
        self._mass = mass
        self.center = float(center)
        bp = [0.0, self.T] if breakpoints is None else sorted({0.0, self.T, *map(float, breakpoints)})
        self.breakpoints = np.array(bp)
        self._theta = TWO_PI * np.arange(self.n_grid) / self.n_grid

    def mass(self, t):
        return 1.0 if self._mass is None else float(self._mass(t))

    def slice_content(self, t):
        vals = np.asarray(self.density(t, self._theta), dtype=float)
        m = self.mass(t)
        d = CircleDensity(np.clip(vals, 0.0, None))
        if d.mass <= 0.0:
            return AtomicSlice.single(self.center, m)
        return d.scaled(m / d.mass)

    def herglotz(self, t, w):
        return self.slice_content(t).herglotz(np.asarray(w, dtype=complex), mass=self.mass(t))

    def herglotz_with_prime(self, t, w):
        return self.slice_content(t).herglotz(np.asarray(w, dtype=complex), mass=self.mass(t), derivative=True)


def herglotz(slice_: MeasureSlice, z):
    """Herglotz function of one slice at ``|z| > 1``.

    Densities are summed through their Fourier moments and atoms exactly.
    ``p(inf)`` equals the slice mass.

    Raises
    ------
    DomainError
        If some ``|z| <= 1``.
    """
    z = np.asarray(z, dtype=complex)
    if z.size and np.min(np.abs(z)) <= 1.0:
        raise DomainError("the Herglotz function is evaluated on |z| > 1")
    return slice_.herglotz(z)


# ---------------------------------------------------------------------------
# Backward flow
# ---------------------------------------------------------------------------


def _segments(driver, t: float):
    """Pieces ``(s_lo, s_hi, slice_or_None)`` of ``[0, t]`` in backward order."""
    if isinstance(driver, DrivingMeasure):
        out = []
        for s in driver.slices:
            lo, hi = s.t0, min(s.t1, t)
            if hi > lo:
                out.append((lo, hi, s))
        return out[::-1]
    bp = np.asarray(driver.breakpoints, dtype=float)
    pts = np.unique(np.concatenate([[0.0, t], bp[(bp > 0) & (bp < t)]]))
    return [(a, b, None) for a, b in zip(pts[:-1], pts[1:])][::-1]


def _single_atom(slice_: MeasureSlice | None):
    if slice_ is None or not isinstance(slice_.content, AtomicSlice):
        return None
    if slice_.content.angles.size != 1:
        return None
    return float(slice_.content.angles[0]), float(slice_.content.weights[0])


def _ode_segment(hfun, s_lo, s_hi, v, L, derivative, rtol, atol):
    n = v.size

    def rhs(sig, y):
        s = s_hi - sig
        w = y[:n]
        if derivative:
            p, dp = hfun(s, w, True)
            return np.concatenate([w * p, p + w * dp])
        return w * hfun(s, w, False)

    y0 = np.concatenate([v, L]) if derivative else v.copy()
    span = s_hi - s_lo
    with np.errstate(all="ignore"):
        sol = solve_ivp(rhs, (0.0, span), y0, method="RK45", rtol=rtol, atol=atol, t_eval=[span])
    if not sol.success or not np.all(np.isfinite(sol.y[:, -1])):
        raise NumericError(f"Loewner-Kufarev integration failed: {sol.message}")
    y = sol.y[:, -1]
    return (y[:n], y[n:]) if derivative else (y, L)


def _herglotz_fun(driver, slice_):
    if slice_ is not None:
        def h(s, w, deriv):
            return slice_.herglotz(w, derivative=deriv)
    else:
        def h(s, w, deriv):
            return driver.herglotz_with_prime(s, w) if deriv else driver.herglotz(s, w)
    return h


def solve_map(mu, t: float, z, derivative: bool = False, rtol: float = DEFAULT_RTOL,
              atol: float = DEFAULT_ATOL, allow_boundary: bool = False):
    """Evaluate the Loewner-Kufarev map ``f_t(z)``.

    Parameters
    ----------
    mu : DrivingMeasure or driver
        Driving data on ``[0, T]``.
    t : float
        Time in ``[0, T]``.
    z : complex or array_like
        Points with ``|z| > 1``.
    derivative : bool
        Also return ``f_t'(z)``.
    rtol, atol : float
        Tolerances of the embedded Runge-Kutta 4(5) integrator, which is
        restarted at every slice edge. Slices carrying one atom are mapped
        exactly with the corresponding slit map.
    allow_boundary : bool
        Permit ``|z| = 1`` (used by boundary diagnostics where the flow is
        known to leave the circle immediately).

    Raises
    ------
    DomainError
        If ``|z| <= 1`` (or ``< 1`` with ``allow_boundary``) or ``t`` is
        outside ``[0, T]``.
    NumericError
        If the integrator fails or a trajectory ends on the unit circle.
    """
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    v = z.reshape(-1).copy()
    if not 0.0 <= t <= driver_T(mu) * (1 + 1e-12):
        raise DomainError(f"t = {t} outside [0, {driver_T(mu)}]")
    r = np.abs(v)
    if v.size and (np.min(r) < 1.0 - 1e-12 or (not allow_boundary and np.min(r) <= 1.0)):
        raise DomainError("solve_map is defined on |z| > 1")
    L = np.zeros_like(v)
    for lo, hi, sl in _segments(mu, t):
        atom = _single_atom(sl)
        if atom is not None:
            theta, weight = atom
            p = SlitParams(slit_length(weight * (hi - lo)), theta)
            if derivative:
                v, dv = slit_map_eval(p, v, derivative=True)
                L = L + np.log(dv)
            else:
                v = slit_map_eval(p, v)
            continue
        v, L = _ode_segment(_herglotz_fun(mu, sl), lo, hi, v, L, derivative, rtol, atol)
    if v.size and t > 0 and np.min(np.abs(v)) <= 1.0 + 1e-12:
        raise NumericError("a trajectory reached the unit circle")
    f = v.reshape(shape)
    if derivative:
        return f, np.exp(L).reshape(shape)
    return f


def driver_T(mu) -> float:
    return float(mu.T)


# ---------------------------------------------------------------------------
# Hulls
# ---------------------------------------------------------------------------


def winding_number(points, about=0.0) -> np.ndarray:
    """Winding number of the closed polygon ``points`` about each point of ``about``."""
    pts = np.asarray(points, dtype=complex).reshape(-1)
    a = np.asarray(about, dtype=complex)
    rel = pts[None, :] - a.reshape(-1, 1)
    ang = np.angle(np.roll(rel, -1, axis=1) / rel)
    return np.rint(ang.sum(axis=1) / TWO_PI).astype(int).reshape(a.shape)


@dataclass(frozen=True)
class HullTrace:
    """Closed polygon approximating the hull boundary at time ``t``.

    ``points`` are the vertices; the edge from the last vertex back to the
    first is implied.
    """

    t: float
    points: np.ndarray
    angles: np.ndarray = field(default=None, repr=False)

    @property
    def closed_points(self) -> np.ndarray:
        return np.concatenate([self.points, self.points[:1]])

    def winding_number(self, about=0.0):
        return winding_number(self.points, about)

    def contains(self, z) -> np.ndarray:
        """Whether each ``z`` is enclosed by the polygon."""
        return winding_number(self.points, z) != 0

    def hausdorff(self, other) -> float:
        """Symmetric Hausdorff distance between vertex sets."""
        a = np.asarray(other.points if isinstance(other, HullTrace) else other, dtype=complex).reshape(-1)
        A = np.column_stack([self.points.real, self.points.imag])
        B = np.column_stack([a.real, a.imag])
        return float(max(directed_hausdorff(A, B)[0], directed_hausdorff(B, A)[0]))


def trace_hull(mu, t: float, n_points: int = 512, standoff: float = 1e-3, **kw) -> HullTrace:
    """Trace ``f_t`` on the circle ``|z| = 1 + standoff``.

    Single-atom slices (HL clusters) are mapped with exact slit maps, so
    atomic measures are traced through the composed slit map.
    """
    if not standoff > 0:
        raise InvalidInputError("standoff must be positive")
    theta = TWO_PI * np.arange(int(n_points)) / int(n_points)
    z = (1.0 + standoff) * np.exp(1j * theta)
    pts = solve_map(mu, t, z, **kw)
    return HullTrace(float(t), pts, theta)


# ---------------------------------------------------------------------------
# Density recovery
# ---------------------------------------------------------------------------


def measure_evaluator(mu, **kw) -> Callable:
    """``(t, z) -> f_t(z)`` for a driving measure or driver.

    The returned function carries the end of the time window as ``T``.
    """

    def evaluator(t, z):
        return solve_map(mu, t, z, **kw)

    evaluator.T = driver_T(mu)
    return evaluator


def _time_derivative(evaluator, t, z, h, t_max=math.inf):
    if t - 2 * h < 0:
        f = [evaluator(t + k * h, z) for k in range(5)]
        return (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    if t + 2 * h > t_max:
        f = [evaluator(t - k * h, z) for k in range(5)]
        return (25 * f[0] - 48 * f[1] + 36 * f[2] - 16 * f[3] + 3 * f[4]) / (12 * h)
    return (evaluator(t - 2 * h, z) - 8 * evaluator(t - h, z) + 8 * evaluator(t + h, z) - evaluator(t + 2 * h, z)) / (12 * h)


def _space_derivative(evaluator, t, z, h):
    e = h * z / np.abs(z)
    return (evaluator(t, z - 2 * e) - 8 * evaluator(t, z - e) + 8 * evaluator(t, z + e) - evaluator(t, z + 2 * e)) / (12 * e)


def _recover_once(evaluator, t, theta, delta, dt, dz):
    z = (1.0 + delta) * np.exp(1j * theta)
    ft = _time_derivative(evaluator, t, z, dt, getattr(evaluator, "T", math.inf))
    fz = _space_derivative(evaluator, t, z, dz)
    bad = ~np.isfinite(fz) | (np.abs(fz) < 1e-12 * np.median(np.abs(fz)))
    with np.errstate(all="ignore"):
        p = ft / (z * fz)
    rho = p.real / TWO_PI
    bad |= ~np.isfinite(rho)
    if np.all(bad):
        raise NumericError("density recovery failed at every sample")
    if np.any(bad):
        good = ~bad
        rho[bad] = np.interp(theta[bad], theta[good], rho[good], period=TWO_PI)
    return rho


def recover_density(evaluator, t: float, grid: int = 256, delta: float = 1e-3, dt: float = 1e-4,
                    richardson: bool = False) -> CircleDensity:
    """Recover the driving density from a Loewner chain.

    Parameters
    ----------
    evaluator : callable
        ``evaluator(t, z) -> f_t(z)`` for arrays ``z``.
    t : float
        Time of the slice.
    grid : int
        Number of angular samples.
    delta : float
        Radial standoff; samples are taken on ``|z| = 1 + delta``.
    dt : float
        Step of the fourth-order time difference. It is one-sided near
        ``t = 0`` and near ``evaluator.T`` when the evaluator has that
        attribute (as those from :func:`measure_evaluator` do).
    richardson : bool
        Combine standoffs ``delta`` and ``delta / 2`` to cancel the first
        order error in ``delta``.

    Returns
    -------
    CircleDensity
        ``Re[d_t f / (z f')] / 2 pi``, the Poisson extension of the density
        at radius ``1 + delta``. Negative values from round-off are clipped.
    """
    theta = TWO_PI * np.arange(int(grid)) / int(grid)
    rho = _recover_once(evaluator, t, theta, delta, dt, delta / 8.0)
    if richardson:
        rho2 = _recover_once(evaluator, t, theta, delta / 2.0, dt, delta / 16.0)
        rho = 2.0 * rho2 - rho
    return CircleDensity(np.clip(rho, 0.0, None))


# ---------------------------------------------------------------------------
# Becker diagnostic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BeckerReport:
    """Result of :func:`becker_check`.

    Attributes
    ----------
    kappa_estimate : float
        Sampled sup of ``|(1 - p_t(z)) / (1 + p_t(z))|``.
    kappa_at_least_one : bool
        Whether the estimate reached 1, so no Becker constant exists.
    entropy_bound : float
        ``C * T`` with ``C = sup_{r in [0, M]} |r log r|``; infinite when
        ``M`` is.
    density_sup : float
        ``M = sup_t ||2 pi rho_t||_inf``.
    """

    kappa_estimate: float
    kappa_at_least_one: bool
    entropy_bound: float
    density_sup: float
    constant: float
    T: float

    def to_dict(self) -> dict:
        from .measures.io import encode_float

        return {
            "kappa_estimate": encode_float(self.kappa_estimate),
            "kappa_at_least_one": self.kappa_at_least_one,
            "entropy_bound": encode_float(self.entropy_bound),
            "density_sup": encode_float(self.density_sup),
            "constant": encode_float(self.constant),
            "T": self.T,
        }


def xlogx_sup(M: float) -> float:
    """``sup_{0 <= r <= M} |r log r|``."""
    if math.isinf(M):
        return math.inf
    if M <= 0:
        return 0.0
    if M <= math.exp(-1):
        return -M * math.log(M)
    return max(math.exp(-1), M * math.log(M))


def becker_check(mu, n_angles: int = 512, n_time: int = 32, exponents=range(1, 9)) -> BeckerReport:
    """Sampled Becker constant and the resulting entropy bound.

    ``|(1 - p) / (1 + p)|`` is subharmonic in ``z`` and tends to
    ``|(1 - m)/(1 + m)|`` at infinity, so its sup over the exterior disc is
    approached on circles ``|z| = 1 + 10^{-k}`` shrinking to the boundary.
    Slices of a driving measure are sampled one by one; other drivers are
    sampled at ``n_time`` midpoints of ``[0, T]``.
    """
    theta = TWO_PI * (np.arange(int(n_angles)) + 0.5) / int(n_angles)
    radii = np.array([1.0 + 10.0 ** (-k) for k in exponents])
    z = (radii[:, None] * np.exp(1j * theta)[None, :]).reshape(-1)
    kappa = 0.0
    M = 0.0
    if isinstance(mu, DrivingMeasure):
        for s in mu.slices:
            p = s.herglotz(z)
            kappa = max(kappa, float(np.max(np.abs((1.0 - p) / (1.0 + p)))))
            if isinstance(s.content, AtomicSlice):
                M = math.inf
            else:
                M = max(M, TWO_PI * float(np.max(s.content.values)))
    else:
        edges = np.linspace(0.0, mu.T, int(n_time) + 1)
        ts = 0.5 * (edges[:-1] + edges[1:])
        dens = getattr(mu, "density", None)
        grid = np.linspace(0.0, TWO_PI, 4096, endpoint=False)
        for t in ts:
            p = mu.herglotz(t, z)
            kappa = max(kappa, float(np.max(np.abs((1.0 - p) / (1.0 + p)))))
            if dens is None:
                M = math.inf
            else:
                M = max(M, TWO_PI * float(np.max(dens(t, grid))))
    C = xlogx_sup(M)
    T = float(mu.T)
    return BeckerReport(kappa, kappa >= 1.0, C * T if C < math.inf else math.inf, M, C, T)
