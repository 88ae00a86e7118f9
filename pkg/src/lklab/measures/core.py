"""Driving measures on the cylinder S^1 x [0, T].

A driving measure is stored as an ordered sequence of time slices. Each slice
is constant in time and carries either a sampled density on a uniform angular
grid or a finite collection of atoms. Densities are taken with respect to
``d theta`` so that the uniform probability density is ``1 / (2 pi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from ..errors import InvalidInputError

TWO_PI = 2.0 * np.pi

# Relative size below which Fourier coefficients of a density are treated as
# zero when the Herglotz series is summed.
_COEF_TRIM = 1e-14
# Terms of the Herglotz series with |z|^{-k} below this are dropped.
_SERIES_FLOOR = 1e-17


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class CircleDensity:
    """Nonnegative density sampled at ``theta_j = 2 pi j / N``.

    Parameters
    ----------
    values : array_like
        Density values with respect to ``d theta``. Must be finite and
        nonnegative.

    Notes
    -----
    Instances are immutable. The mass is computed with the periodic rectangle
    rule, which is exact for trigonometric polynomials of degree below ``N``.
    """

    __slots__ = ("_values", "_coef")

    def __init__(self, values):
        arr = np.array(values, dtype=float).reshape(-1)
        if arr.size < 2:
            raise InvalidInputError("a circle density needs at least two grid points")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("density values must be finite")
        if np.any(arr < 0.0):
            raise InvalidInputError("density values must be nonnegative")
        self._values = _readonly(arr)
        self._coef = None

    # -- construction -------------------------------------------------------
    @classmethod
    def uniform(cls, n: int = 1024, mass: float = 1.0) -> "CircleDensity":
        """Constant density of total mass ``mass``."""
        return cls(np.full(int(n), mass / TWO_PI))

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], n: int = 1024) -> "CircleDensity":
        """Sample ``func`` at the grid angles."""
        theta = TWO_PI * np.arange(int(n)) / int(n)
        return cls(np.broadcast_to(np.asarray(func(theta), dtype=float), theta.shape))

    @classmethod
    def from_cdf(cls, cdf: Callable[[np.ndarray], np.ndarray], n: int = 1024) -> "CircleDensity":
        """Cell averages from a cumulative mass function.

        ``cdf(phi)`` must return the mass of ``[-pi, phi]`` for ``phi`` in
        ``[-pi, 3 pi]`` (any antiderivative of the density works since only
        differences are used). Cell ``j`` is ``[theta_j - h/2, theta_j + h/2]``.
        """
        n = int(n)
        h = TWO_PI / n
        edges = TWO_PI * np.arange(n + 1) / n - h / 2.0
        F = np.asarray(cdf(edges), dtype=float)
        vals = np.diff(F) / h
        # Differencing the cdf leaves round-off of order eps |F| / h, which can
        # be slightly negative where the density vanishes.
        tol = 64.0 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(F)))) / h
        vals[(vals < 0) & (vals > -tol)] = 0.0
        return cls(vals)

    # -- basic properties -----------------------------------------------------
    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def grid_size(self) -> int:
        return int(self._values.size)

    @property
    def theta(self) -> np.ndarray:
        return TWO_PI * np.arange(self.grid_size) / self.grid_size

    @property
    def spacing(self) -> float:
        return TWO_PI / self.grid_size

    @property
    def mass(self) -> float:
        return float(math.fsum(self._values) * self.spacing)

    def scaled(self, factor: float) -> "CircleDensity":
        return CircleDensity(self._values * factor)

    def normalized(self) -> "CircleDensity":
        m = self.mass
        if m <= 0:
            raise InvalidInputError("cannot normalize a density of zero mass")
        return self.scaled(1.0 / m)

    def __eq__(self, other) -> bool:
        return isinstance(other, CircleDensity) and np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash(self._values.tobytes())

    def __repr__(self) -> str:
        return f"CircleDensity(N={self.grid_size}, mass={self.mass:.6g})"

    # -- Herglotz transform ---------------------------------------------------
    def fourier_moments(self) -> np.ndarray:
        """Discrete moments ``a_k = int rho(theta) e^{i k theta} d theta``.

        Returned for ``k = 0..N//2``; the Nyquist term is halved so that the
        series below is the Herglotz transform of the trigonometric
        interpolant of the samples.
        """
        if self._coef is None:
            n = self.grid_size
            a = TWO_PI * np.fft.ifft(self._values)[: n // 2 + 1]
            if n % 2 == 0:
                a[-1] *= 0.5
            scale = abs(a[0].real)
            a[np.abs(a) <= _COEF_TRIM * scale] = 0.0
            nz = np.nonzero(a[1:])[0]
            a = a[: (nz[-1] + 2) if nz.size else 1]
            self._coef = _readonly(a)
        return self._coef

    def herglotz(self, z, mass: float | None = None, derivative: bool = False):
        """Evaluate ``p(z) = int (z + e^{i theta}) / (z - e^{i theta}) rho d theta``.

        Uses the series ``p = a_0 + 2 sum_k a_k z^{-k}`` for ``|z| > 1``. The
        constant term is replaced by ``mass`` when given, so that a declared
        slice mass is honoured exactly.

        Returns ``p`` or ``(p, p')`` when ``derivative`` is true.
        """
        z = np.asarray(z, dtype=complex)
        a = self.fourier_moments()
        a0 = float(a[0].real) if mass is None else float(mass)
        u = 1.0 / z
        K = a.size - 1
        if K > 0:
            rmin = float(np.min(np.abs(z))) if z.size else 2.0
            if rmin > 1.0:
                K = min(K, int(math.ceil(-math.log(_SERIES_FLOOR) / math.log(rmin))) + 1)
        # Horner evaluation of S(u) = sum_{k=1}^K a_k u^k together with S'(u).
        s = np.zeros_like(u)
        ds = np.zeros_like(u)
        if K > 0:
            s = s + a[K]
            for k in range(K - 1, -1, -1):
                ds = ds * u + s
                s = s * u + (a[k] if k > 0 else 0.0)
        p = a0 + 2.0 * s
        if not derivative:
            return p
        return p, -2.0 * (u * u) * ds


class AtomicSlice:
    """Finite combination of point masses on the circle.

    Parameters
    ----------
    angles, weights : array_like
        Atom positions (reduced modulo ``2 pi``) and strictly positive weights.
    """

    __slots__ = ("_angles", "_weights")

    def __init__(self, angles, weights):
        ang = np.array(angles, dtype=float).reshape(-1)
        w = np.array(weights, dtype=float).reshape(-1)
        if ang.size == 0 or ang.shape != w.shape:
            raise InvalidInputError("atoms need matching nonempty angle and weight arrays")
        if not (np.all(np.isfinite(ang)) and np.all(np.isfinite(w))):
            raise InvalidInputError("atom data must be finite")
        if np.any(w <= 0):
            raise InvalidInputError("atom weights must be positive")
        self._angles = _readonly(np.mod(ang, TWO_PI))
        self._weights = _readonly(w)

    @classmethod
    def single(cls, angle: float, weight: float = 1.0) -> "AtomicSlice":
        return cls([angle], [weight])

    @property
    def angles(self) -> np.ndarray:
        return self._angles

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def mass(self) -> float:
        return float(math.fsum(self._weights))

    def scaled(self, factor: float) -> "AtomicSlice":
        return AtomicSlice(self._angles, self._weights * factor)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, AtomicSlice)
            and np.array_equal(self._angles, other._angles)
            and np.array_equal(self._weights, other._weights)
        )

    def __hash__(self):
        return hash((self._angles.tobytes(), self._weights.tobytes()))

    def __repr__(self) -> str:
        return f"AtomicSlice(n_atoms={self._angles.size}, mass={self.mass:.6g})"

    def herglotz(self, z, mass: float | None = None, derivative: bool = False):
        """Exact kernel sum over the atoms (``mass`` is ignored)."""
        z = np.asarray(z, dtype=complex)
        e = np.exp(1j * self._angles)
        p = np.zeros_like(z)
        dp = np.zeros_like(z)
        for ek, wk in zip(e, self._weights):
            d = z - ek
            p = p + wk * (z + ek) / d
            if derivative:
                dp = dp - wk * 2.0 * ek / (d * d)
        return (p, dp) if derivative else p


SliceContent = Union[CircleDensity, AtomicSlice]


@dataclass(frozen=True)
class MeasureSlice:
    """Time slice ``[t0, t1)`` carrying a constant circle measure.

    ``mass`` defaults to the mass of ``content``. A declared mass is checked
    against the content to within ``1e-10`` (relative to ``max(1, mass)``).
    """

    t0: float
    t1: float
    content: SliceContent
    mass: float | None = None

    def __post_init__(self):
        t0, t1 = float(self.t0), float(self.t1)
        if not (math.isfinite(t0) and math.isfinite(t1)) or not t0 < t1:
            raise InvalidInputError(f"slice needs finite t0 < t1, got [{t0}, {t1}]")
        if not isinstance(self.content, (CircleDensity, AtomicSlice)):
            raise InvalidInputError("slice content must be a CircleDensity or AtomicSlice")
        cm = self.content.mass
        m = cm if self.mass is None else float(self.mass)
        if not m > 0 or not math.isfinite(m):
            raise InvalidInputError("slice mass must be positive and finite")
        tol = 1e-10 * max(1.0, abs(m)) if isinstance(self.content, CircleDensity) else 1e-12 * max(1.0, abs(m))
        if abs(m - cm) > tol:
            raise InvalidInputError(f"declared mass {m} differs from content mass {cm}")
        object.__setattr__(self, "t0", t0)
        object.__setattr__(self, "t1", t1)
        object.__setattr__(self, "mass", m)

    @property
    def duration(self) -> float:
        return self.t1 - self.t0

    @property
    def is_atomic(self) -> bool:
        return isinstance(self.content, AtomicSlice)

    def herglotz(self, z, derivative: bool = False):
        return self.content.herglotz(z, mass=self.mass, derivative=derivative)


class DrivingMeasure:
    """Piecewise-constant-in-time measure on ``S^1 x [0, T]``.

    Parameters
    ----------
    slices : sequence of MeasureSlice
        Must start at ``t = 0`` and be contiguous. Endpoints that agree to
        ``1e-12 * T`` are snapped together.
    """

    def __init__(self, slices: Sequence[MeasureSlice]):
        slices = list(slices)
        if not slices:
            raise InvalidInputError("a driving measure needs at least one slice")
        T = slices[-1].t1
        tol = 1e-12 * max(1.0, abs(T))
        if abs(slices[0].t0) > tol:
            raise InvalidInputError("first slice must start at t = 0")
        fixed = [slices[0] if slices[0].t0 == 0.0 else MeasureSlice(0.0, slices[0].t1, slices[0].content, slices[0].mass)]
        for s in slices[1:]:
            prev = fixed[-1]
            if abs(s.t0 - prev.t1) > tol:
                raise InvalidInputError(f"slices leave a gap or overlap at t = {prev.t1}")
            fixed.append(s if s.t0 == prev.t1 else MeasureSlice(prev.t1, s.t1, s.content, s.mass))
        self._slices = tuple(fixed)
        self._edges = _readonly(np.array([0.0] + [s.t1 for s in fixed]))

    # -- constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, content: SliceContent, T: float = 1.0) -> "DrivingMeasure":
        return cls([MeasureSlice(0.0, float(T), content)])

    @classmethod
    def uniform(cls, T: float = 1.0, n: int = 1024) -> "DrivingMeasure":
        return cls.constant(CircleDensity.uniform(n), T)

    @classmethod
    def from_density_function(
        cls,
        density: Callable[[float, np.ndarray], np.ndarray],
        T: float,
        n_slices: int,
        n_grid: int = 1024,
        normalize: bool = False,
        t_start: float = 0.0,
    ) -> "DrivingMeasure":
        """Sample ``density(t, theta)`` at slice midpoints.

        With ``normalize`` each slice is rescaled to unit mass, which removes
        the quadrature error of the sampled mass. ``t_start`` shifts the time
        argument passed to ``density`` (slice ``k`` samples the time
        ``t_start + t_mid``) while the measure itself lives on ``[0, T]``.
        """
        edges = np.linspace(0.0, float(T), int(n_slices) + 1)
        out = []
        for a, b in zip(edges[:-1], edges[1:]):
            tm = t_start + 0.5 * (a + b)
            d = CircleDensity.from_function(lambda th: density(tm, th), n_grid)
            if normalize:
                d = d.normalized()
            out.append(MeasureSlice(a, b, d))
        return cls(out)

    # -- accessors --------------------------------------------------------------
    @property
    def slices(self) -> tuple[MeasureSlice, ...]:
        return self._slices

    @property
    def T(self) -> float:
        return float(self._edges[-1])

    @property
    def breakpoints(self) -> np.ndarray:
        return self._edges

    @property
    def durations(self) -> np.ndarray:
        return np.diff(self._edges)

    @property
    def masses(self) -> np.ndarray:
        return np.array([s.mass for s in self._slices])

    @property
    def total_mass(self) -> float:
        return float(math.fsum(self.durations * self.masses))

    @property
    def is_density_valued(self) -> bool:
        return not any(s.is_atomic for s in self._slices)

    def is_normalized(self, tol: float = 1e-10) -> bool:
        """Membership in the set of normalized driving measures."""
        return bool(np.all(np.abs(self.masses - 1.0) <= tol))

    def __len__(self) -> int:
        return len(self._slices)

    def __iter__(self):
        return iter(self._slices)

    def __repr__(self) -> str:
        return f"DrivingMeasure(T={self.T:.6g}, n_slices={len(self)})"

    def slice_index(self, t: float) -> int:
        """Index of the slice containing ``t`` (right-continuous, clamped)."""
        i = int(np.searchsorted(self._edges, t, side="right")) - 1
        return min(max(i, 0), len(self._slices) - 1)

    def slice_at(self, t: float) -> MeasureSlice:
        return self._slices[self.slice_index(t)]

    # -- driver protocol used by the Loewner-Kufarev solver ---------------------
    def mass(self, t: float) -> float:
        return self.slice_at(t).mass

    def herglotz(self, t: float, w):
        return self.slice_at(t).herglotz(w)

    def herglotz_with_prime(self, t: float, w):
        return self.slice_at(t).herglotz(w, derivative=True)


@dataclass(frozen=True)
class TimeChange:
    """Increasing map ``s -> t(s)`` sampled on a uniform ``s`` grid.

    Parameters
    ----------
    s : array_like
        Uniform grid starting at 0.
    t : array_like
        Strictly increasing samples with ``t[0] = 0``.
    dt : array_like, optional
        Positive derivative samples. When omitted they are estimated with
        ``numpy.gradient``.

    Notes
    -----
    The time change acts through its piecewise-linear interpolant, so the
    slope on each grid cell is the secant slope of the samples.
    """

    s: np.ndarray
    t: np.ndarray
    dt: np.ndarray | None = None

    def __post_init__(self):
        s = np.array(self.s, dtype=float)
        t = np.array(self.t, dtype=float)
        if s.ndim != 1 or s.shape != t.shape or s.size < 2:
            raise InvalidInputError("time change needs matching 1-D grids of length >= 2")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(t))):
            raise InvalidInputError("time change samples must be finite")
        if s[0] != 0.0 or t[0] != 0.0:
            raise InvalidInputError("time change must fix the origin")
        ds = np.diff(s)
        if np.any(ds <= 0) or np.max(np.abs(ds - ds.mean())) > 1e-9 * s[-1]:
            raise InvalidInputError("s grid must be uniform and increasing")
        if np.any(np.diff(t) <= 0):
            raise InvalidInputError("time change must be strictly increasing")
        dt = np.gradient(t, s) if self.dt is None else np.array(self.dt, dtype=float)
        if dt.shape != s.shape or np.any(~np.isfinite(dt)) or np.any(dt <= 0):
            raise InvalidInputError("derivative samples must be positive")
        object.__setattr__(self, "s", _readonly(s))
        object.__setattr__(self, "t", _readonly(t))
        object.__setattr__(self, "dt", _readonly(dt))

    @classmethod
    def from_function(cls, func, T: float, n: int = 2048, deriv=None, S: float | None = None) -> "TimeChange":
        """Sample ``func`` on ``n + 1`` uniform points of ``[0, S]`` (default ``S = T``).

        The endpoint value is pinned to ``T``.
        """
        S = float(T) if S is None else float(S)
        s = np.linspace(0.0, S, int(n) + 1)
        t = np.asarray(func(s), dtype=float).copy()
        t[0] = 0.0
        if abs(t[-1] - T) > 1e-9 * max(1.0, T):
            raise InvalidInputError("time change must map the endpoint onto T")
        t[-1] = T
        dt = None if deriv is None else np.asarray(deriv(s), dtype=float)
        return cls(s, t, dt)

    @classmethod
    def identity(cls, T: float, n: int = 2) -> "TimeChange":
        s = np.linspace(0.0, float(T), int(n) + 1)
        return cls(s, s.copy(), np.ones_like(s))

    @property
    def S(self) -> float:
        return float(self.s[-1])

    @property
    def T(self) -> float:
        return float(self.t[-1])

    def inverse(self, t) -> np.ndarray:
        """Preimage of ``t`` under the piecewise-linear interpolant."""
        return np.interp(t, self.t, self.s)
