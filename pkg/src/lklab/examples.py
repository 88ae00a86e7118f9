"""Closed-form Loewner chains, their driving densities and entropies.

Supported chains (``name``):

``orthogonal-disks``
    Hull ``closed disc  U  B(e^t, sqrt(e^{2t} - 1))``; the second disc meets
    the unit circle at right angles.
``tangent-disks``
    Hull ``closed disc  U  B(1/(1-s), s/(1-s))`` with ``s = alpha(t)``; the
    discs touch at ``z = 1`` so the interface is not a Jordan curve.
``poisson-const``
    Constant Poisson-kernel density with parameter ``R > 1``.
``poisson-var``
    Poisson kernel with ``R(t)`` one of ``"sqrt"`` (``1 + sqrt(1 - t)``),
    ``"inverse"`` (``1 / t``) or ``"exp"`` (``1 + exp(-1 / (1 - t))``).
``pacman``
    Uniform density on the arc ``(eps, 2 pi - eps)``.

All densities are with respect to ``d theta`` and have unit mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import InvalidInputError
from .lk_solver import AnalyticDriver, DensityFunctionDriver, poisson_driver, solve_map
from .measures.core import TWO_PI, CircleDensity

NAMES = ("orthogonal-disks", "tangent-disks", "poisson-const", "poisson-var", "pacman")
R_FAMILIES = {
    "sqrt": lambda t: 1.0 + math.sqrt(1.0 - t),
    "inverse": lambda t: math.inf if t == 0 else 1.0 / t,
    "exp": lambda t: 1.0 + math.exp(-1.0 / (1.0 - t)),
}

# ---------------------------------------------------------------------------
# Tangent-disk time change
# ---------------------------------------------------------------------------


def _log_beta(s: float) -> float:
    """``log(pi s / sin(pi s))`` without cancellation for small ``s``."""
    x = math.pi * s
    if x < 1e-3:
        x2 = x * x
        return x2 / 6.0 + x2 * x2 / 180.0 + x2 * x2 * x2 / 2835.0
    return -math.log(math.sin(x) / x)


def beta(s: float) -> float:
    """Capacity ``pi s / sin(pi s)`` of the unparametrized tangent-disk map."""
    return math.exp(_log_beta(s))


def alpha(t: float) -> float:
    """Inverse of :func:`beta` composed with ``exp``: ``beta(alpha(t)) = e^t``."""
    t = float(t)
    if t < 0:
        raise InvalidInputError("tangent-disk time must be nonnegative")
    if t == 0:
        return 0.0
    hi = 1.0 - 1e-16
    if _log_beta(hi) <= t:
        raise InvalidInputError("tangent-disk time too large")
    guess = math.sqrt(6.0 * t) / math.pi
    lo = 0.5 * min(guess, 0.5)
    while _log_beta(lo) > t:
        lo *= 0.5
    return brentq(lambda s: _log_beta(s) - t, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def _sin_minus_xcos(x: float) -> float:
    """``sin x - x cos x`` with a series for small ``x``."""
    if x < 0.05:
        x2 = x * x
        return x * x2 * (1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0 - x2 * x2 * x2 / 45360.0)
    return math.sin(x) - x * math.cos(x)


def alpha_prime(t: float) -> float:
    a = alpha(t)
    x = math.pi * a
    return math.exp(t) * math.sin(x) ** 2 / (math.pi * _sin_minus_xcos(x))


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------


def _wrap(theta):
    """Angles reduced to ``[-pi, pi)``."""
    return np.mod(np.asarray(theta, dtype=float) + np.pi, TWO_PI) - np.pi


def _periodic_cdf(base):
    """Extend a CDF on ``[-pi, pi]`` (mass of ``[-pi, phi]``) to ``[-pi, 3 pi]``."""

    def cdf(phi):
        phi = np.asarray(phi, dtype=float)
        shift = np.floor((phi + np.pi) / TWO_PI)
        return base(phi - TWO_PI * shift) + shift

    return cdf


@dataclass(frozen=True)
class NamedChain:
    """One of the closed-form example chains.

    Parameters
    ----------
    name : str
        See the module docstring.
    params : dict
        ``R`` for ``poisson-const``, ``family`` for ``poisson-var`` and
        ``eps`` for ``pacman``.
    """

    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in NAMES:
            raise InvalidInputError(f"unknown example {self.name!r}; choose from {NAMES}")
        p = dict(self.params or {})
        if self.name == "poisson-const":
            R = float(p.get("R", 2.0))
            if not R > 1:
                raise InvalidInputError("poisson-const needs R > 1")
            p = {"R": R}
        elif self.name == "poisson-var":
            fam = p.get("family", "inverse")
            if fam not in R_FAMILIES:
                raise InvalidInputError(f"unknown R(t) family {fam!r}; choose from {tuple(R_FAMILIES)}")
            p = {"family": fam}
        elif self.name == "pacman":
            eps = float(p.get("eps", 0.1))
            if not 0 < eps < math.pi:
                raise InvalidInputError("pacman needs 0 < eps < pi")
            p = {"eps": eps}
        else:
            if p:
                raise InvalidInputError(f"{self.name} takes no parameters")
            p = {}
        object.__setattr__(self, "params", p)

    # -- validity ---------------------------------------------------------------
    def check_time(self, t: float, allow_end: bool = False) -> float:
        t = float(t)
        if not math.isfinite(t) or t < 0:
            raise InvalidInputError(f"time must be finite and nonnegative, got {t}")
        if self.name in ("orthogonal-disks", "tangent-disks") and t == 0:
            raise InvalidInputError(f"{self.name} is defined for t > 0")
        if self.name == "poisson-var" and (t > 1 or (t == 1 and not allow_end)):
            raise InvalidInputError("poisson-var is defined for 0 <= t < 1")
        return t

    def R(self, t: float) -> float:
        if self.name == "poisson-const":
            return self.params["R"]
        if self.name == "poisson-var":
            return R_FAMILIES[self.params["family"]](t)
        raise InvalidInputError(f"{self.name} has no Poisson parameter")

    # -- densities --------------------------------------------------------------
    def density(self, t: float, theta) -> np.ndarray:
        """Pointwise density ``rho_t(theta)``."""
        t = self.check_time(t)
        th = _wrap(theta)
        if self.name == "orthogonal-disks":
            E = math.exp(t)
            c = E / (math.pi * math.expm1(2 * t))
            ch = np.cos(th / 2.0)
            arg = E * E * ch * ch - 1.0
            return np.where(arg > 0, c * ch * np.sqrt(np.clip(arg, 0, None)), 0.0)
        if self.name == "tangent-disks":
            a = alpha(t)
            x = math.pi * a
            D = _sin_minus_xcos(x)
            v = 2.0 * np.sin((x + th) / 2.0) * np.sin((x - th) / 2.0)
            return np.where(np.abs(th) < x, v / (2.0 * D), 0.0)
        if self.name in ("poisson-const", "poisson-var"):
            R = self.R(t)
            if math.isinf(R):
                return np.full(th.shape, 1.0 / TWO_PI)
            r = 1.0 / R
            return (1.0 - r * r) / (TWO_PI * (1.0 - 2.0 * r * np.cos(th) + r * r))
        eps = self.params["eps"]
        return np.where(np.abs(th) > eps, 1.0 / (TWO_PI - 2.0 * eps), 0.0)

    def cdf(self, t: float):
        """Mass of ``[-pi, phi]`` as a vectorized function of ``phi``."""
        t = self.check_time(t)
        if self.name == "orthogonal-disks":
            E = math.exp(t)
            a = math.sqrt(-math.expm1(-2 * t))
            c = E / (math.pi * math.expm1(2 * t))

            def base(phi):
                x = np.clip(np.sin(phi / 2.0), -a, a)
                G = 2 * c * E * (0.5 * x * np.sqrt(np.clip(a * a - x * x, 0, None)) + 0.5 * a * a * np.arcsin(x / a))
                return G + 0.5

        elif self.name == "tangent-disks":
            x = math.pi * alpha(t)
            D = _sin_minus_xcos(x)

            def base(phi):
                p = np.clip(phi, -x, x)
                return (np.sin(p) - p * math.cos(x) + D) / (2.0 * D)

        elif self.name in ("poisson-const", "poisson-var"):
            R = self.R(t)

            def base(phi):
                if math.isinf(R):
                    return (phi + np.pi) / TWO_PI
                if R == 1.0:
                    # Point mass at angle 0.
                    return np.where(phi < 0, 0.0, np.where(phi > 0, 1.0, 0.5))
                k = (R + 1.0) / (R - 1.0)
                with np.errstate(over="ignore"):
                    return 0.5 + np.arctan(k * np.tan(phi / 2.0)) / np.pi

        else:
            eps = self.params["eps"]
            c = 1.0 / (TWO_PI - 2.0 * eps)

            def base(phi):
                return c * (np.minimum(phi, -eps) + np.pi) + c * np.maximum(phi - eps, 0.0)

        return _periodic_cdf(base)

    def circle_density(self, t: float, grid: int = 1024, sampling: str | None = None) -> CircleDensity:
        """Sampled slice: ``"point"`` values or exact ``"cell"`` averages.

        The default is point sampling for the Poisson families (smooth) and
        cell averages for the compactly supported ones.
        """
        if sampling is None:
            sampling = "point" if self.name.startswith("poisson") else "cell"
        if sampling == "point":
            return CircleDensity.from_function(lambda th: self.density(t, th), grid)
        if sampling == "cell":
            return CircleDensity.from_cdf(self.cdf(t), grid)
        raise InvalidInputError("sampling must be 'point' or 'cell'")

    # -- maps ---------------------------------------------------------------------
    def map(self, t: float, z, **solver_kw):
        """Evaluate ``f_t(z)`` on ``|z| >= 1``.

        Closed forms use factorizations whose principal branches are
        continuous on the closed exterior disc. ``poisson-var`` has no closed
        form and is solved numerically.
        """
        z = np.asarray(z, dtype=complex)
        if z.size and np.min(np.abs(z)) < 1.0 - 1e-12:
            raise InvalidInputError("example maps are defined on |z| >= 1")
        t = self.check_time(t, allow_end=True)
        if self.name == "orthogonal-disks":
            E = math.exp(t)
            s = math.sqrt(math.expm1(2 * t))
            z1 = ((E * E - 2.0) + 2j * s) / (E * E)
            z2 = ((E * E - 2.0) - 2j * s) / (E * E)
            zeta = -1.0 / z
            root = E * np.sqrt(1.0 - zeta / z1) * np.sqrt(1.0 - zeta / z2)
            phi = 0.5 * E * (zeta - 1.0) + 0.5 * root
            return -1.0 / phi
        if self.name == "tangent-disks":
            a = alpha(t)
            e = np.exp(1j * math.pi * a)
            return 1.0 + 2j * math.pi * a / np.log((z - np.conj(e)) / (z - e))
        if self.name == "poisson-const":
            return poisson_const_map(self.params["R"], t, z)
        if self.name == "poisson-var":
            return solve_map(self.driver(max(t, 1e-300)), t, z, **solver_kw) if t > 0 else z.copy()
        raise InvalidInputError("pacman has no closed-form map; drive the solver with chain.driver()")

    def driver(self, T: float = 1.0, n_grid: int = 2048):
        """Driver for :func:`lklab.lk_solver.solve_map` reproducing this chain."""
        if self.name == "poisson-const":
            return poisson_driver(self.params["R"], T)
        if self.name == "poisson-var":
            return poisson_driver(R_FAMILIES[self.params["family"]], T)
        if self.name == "pacman":
            return pacman_driver(self.params["eps"], T)

        def dens(t, th):
            return self.density(t, th) if t > 0 else np.zeros_like(th)

        return DensityFunctionDriver(dens, T, n_grid=n_grid)

    # -- entropy ------------------------------------------------------------------
    def slice_entropy(self, t: float) -> float:
        """Entropy ``int rho_t log(2 pi rho_t) d theta`` by analytic reduction."""
        t = self.check_time(t)
        if self.name == "orthogonal-disks":
            return _orthogonal_entropy(t)
        if self.name == "tangent-disks":
            return _tangent_entropy(alpha(t))
        if self.name in ("poisson-const", "poisson-var"):
            if self.name == "poisson-var":
                return self.slice_entropy_from_end(1.0 - t)
            return poisson_entropy(self.params["R"])
        return -math.log1p(-self.params["eps"] / math.pi)

    def slice_entropy_from_end(self, u: float) -> float:
        """Slice entropy at ``t = 1 - u`` evaluated without cancellation."""
        if self.name != "poisson-var":
            return self.slice_entropy(1.0 - u)
        fam = self.params["family"]
        if u <= 0:
            return math.inf
        if fam == "sqrt":
            q = math.sqrt(u)
            return 2.0 * math.log1p(q) - math.log(q * (2.0 + q))
        if fam == "inverse":
            t = 1.0 - u
            return -math.log(u * (1.0 + t))
        e = math.exp(-1.0 / u)
        return 2.0 * math.log1p(e) + 1.0 / u - math.log(2.0 + e)


def poisson_entropy(R: float) -> float:
    """``log(R^2 / (R^2 - 1))``, the entropy of the Poisson kernel."""
    if math.isinf(R):
        return 0.0
    return -math.log1p(-1.0 / (R * R))


def poisson_const_map(R: float, t: float, z):
    """Closed-form Loewner map of the constant Poisson-kernel density.

    ``f_t(z) = (1/R) [e^t (Rz + 1)/(2Rz) (Rz + 1 + sqrt(R^2 z^2 + 1 + 2Rz(1 - 2e^{-t}))) - 1]``
    with the square root written as ``Rz sqrt(1 - u/u_1) sqrt(1 - u/u_2)``,
    ``u = 1/(Rz)``, whose branch points lie on ``|u| = 1`` outside the domain.
    """
    z = np.asarray(z, dtype=complex)
    E = math.exp(t)
    a = 1.0 - 2.0 * math.exp(-t)
    im = math.sqrt(max(1.0 - a * a, 0.0))
    u1 = -a + 1j * im
    u2 = -a - 1j * im
    Rz = R * z
    u = 1.0 / Rz
    root = Rz * np.sqrt(1.0 - u / u1) * np.sqrt(1.0 - u / u2)
    return (E * (Rz + 1.0) / (2.0 * Rz) * (Rz + 1.0 + root) - 1.0) / R


def pacman_driver(eps: float, T: float = 1.0) -> AnalyticDriver:
    """Closed-form Herglotz function of the uniform density on ``(eps, 2 pi - eps)``."""
    c = 1.0 / (TWO_PI - 2.0 * eps)
    a = np.exp(-1j * eps)
    b = np.exp(1j * eps)

    def p(t, w):
        return c * ((TWO_PI - 2.0 * eps) + 2j * (np.log(1.0 - a / w) - np.log(1.0 - b / w)))

    def dp(t, w):
        return 2j * c * (a / (w * (w - a)) - b / (w * (w - b)))

    def density(t, theta):
        th = _wrap(theta)
        return np.where(np.abs(th) > eps, c, 0.0)

    return AnalyticDriver(T, p, dp, density=density)


def _orthogonal_entropy(t: float) -> float:
    """Entropy of the orthogonal-disk density at time ``t``.

    With ``E = e^t`` and ``x = E sin`` of the half angle,
    ``h = log(2/(E^2-1)) + 4/(pi (E^2-1)) int_1^E x sqrt(x^2-1) log(x sqrt(x^2-1)) / sqrt(E^2-x^2) dx``.
    The substitution ``x = 1 + (E-1) y`` keeps the integral well scaled.
    """
    d = math.expm1(t)
    E = 1.0 + d
    E2m1 = math.expm1(2 * t)

    def g(y):
        x = 1.0 + d * y
        w = x * math.sqrt(d * y * (2.0 + d * y))
        return (w * math.log(w) if w > 0 else 0.0) / math.sqrt(E + x)

    val, _ = quad(g, 0.0, 1.0, weight="alg", wvar=(0.0, -0.5), limit=200)
    return math.log(2.0 / E2m1) + 4.0 / (math.pi * E2m1) * math.sqrt(d) * val


def _tangent_entropy(a: float) -> float:
    """Entropy ``log(pi/D) + I/D`` of the tangent-disk slice with parameter ``a``."""
    x = math.pi * a
    D = _sin_minus_xcos(x)

    def g(y):
        v = 2.0 * math.sin(x * (1.0 + y) / 2.0) * math.sin(x * (1.0 - y) / 2.0)
        return v * math.log(v) if v > 0 else 0.0

    I = x * quad(g, 0.0, 1.0, limit=200)[0]
    return math.log(math.pi / D) + I / D


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def _chain(name, params) -> NamedChain:
    return name if isinstance(name, NamedChain) else NamedChain(name, dict(params or {}))


def example_density(name, params=None, t: float = 0.5, grid: int = 1024, sampling: str | None = None) -> CircleDensity:
    """Sample the driving density of a named chain at time ``t``."""
    return _chain(name, params).circle_density(t, grid, sampling)


def example_map(name, params=None, t: float = 0.5, z=2.0):
    """Evaluate the Loewner map of a named chain at time ``t``."""
    return _chain(name, params).map(t, z)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _gl(func, a: float, b: float) -> float:
    x = 0.5 * (b - a) * _GL_X + 0.5 * (a + b)
    return 0.5 * (b - a) * float(sum(w * func(float(xi)) for xi, w in zip(x, _GL_W)))


def _graded_integral(f_left, f_right, half: float, n: int) -> float:
    """Integrate over ``[0, 2 half]`` with panels graded as ``j^2`` toward both ends.

    ``f_left(t)`` is evaluated for ``t`` in the left half and ``f_right(u)``
    at the distance ``u`` from the right end.
    """
    edges = half * (np.arange(n + 1) / n) ** 2
    left = sum(_gl(f_left, a, b) for a, b in zip(edges[:-1], edges[1:]))
    right = sum(_gl(f_right, a, b) for a, b in zip(edges[:-1], edges[1:]))
    return left + right


@dataclass(frozen=True)
class EntropyIntegral:
    """Time integral of slice entropies with convergence diagnostics."""

    value: float
    refined: float
    diverging: bool
    tail_partials: tuple

    @property
    def mesh_change(self) -> float:
        return abs(self.refined - self.value)


#: Partial integrals above this value with an increasing trend flag divergence.
DIVERGENCE_THRESHOLD = 50.0


def example_entropy_integral(name, params=None, t_max: float = 1.0, n: int = 64) -> EntropyIntegral:
    """Integrate ``h(rho_t)`` over ``[0, t_max]`` on graded meshes of ``n`` and ``2n`` panels.

    Divergence is probed separately with dyadic panels accumulating toward
    each endpoint down to ``2^-80`` of the half-interval.
    """
    ch = _chain(name, params)
    t_max = float(t_max)
    if not t_max > 0:
        raise InvalidInputError("t_max must be positive")
    half = 0.5 * t_max
    end_is_one = ch.name == "poisson-var" and t_max == 1.0

    def f_left(t):
        return ch.slice_entropy(t) if t > 0 else _limit_at_zero(ch)

    def f_right(u):
        if end_is_one:
            return ch.slice_entropy_from_end(u)
        return ch.slice_entropy(t_max - u)

    partials = []
    total = 0.0
    for j in range(80):
        a, b = half * 2.0 ** (-j - 1), half * 2.0 ** (-j)
        total += _gl(f_left, a, b) + _gl(f_right, a, b)
        partials.append(total)
    tail = tuple(partials[9::10])
    diverging = partials[-1] > DIVERGENCE_THRESHOLD and all(np.diff(tail) > 0)
    if diverging:
        return EntropyIntegral(math.inf, math.inf, True, tail)
    v1 = _graded_integral(f_left, f_right, half, n)
    v2 = _graded_integral(f_left, f_right, half, 2 * n)
    return EntropyIntegral(v2, v1, False, tail)


def _limit_at_zero(ch: NamedChain) -> float:
    if ch.name in ("poisson-const", "pacman"):
        return ch.slice_entropy(0.0)
    if ch.name == "poisson-var":
        return ch.slice_entropy(0.0)
    return math.inf


def example_total_entropy(name, params=None, t_max: float = 1.0, n: int = 64) -> float:
    """Total entropy ``int_0^{t_max} h(rho_t) dt`` of a named chain.

    Returns ``math.inf`` when the graded partial integrals are flagged as
    diverging.
    """
    return example_entropy_integral(name, params, t_max, n).value


def tangent_entropies(t_max: float = 1.0, n: int = 64) -> dict:
    """Plain and invariant entropy of the unparametrized tangent-disk family.

    The family ``rho~_s`` (``0 <= s <= alpha(t_max)``) has mass
    ``beta'(s)/beta(s)``. Its invariant entropy equals the entropy of the
    capacity-parametrized family; its plain entropy differs by
    ``-int log alpha'(t) dt``.
    """
    ch = NamedChain("tangent-disks")
    H = example_entropy_integral(ch, None, t_max, n).value
    half = 0.5 * t_max
    log_ap = _graded_integral(lambda t: math.log(alpha_prime(t)) if t > 0 else 0.0,
                              lambda u: math.log(alpha_prime(t_max - u)), half, 2 * n)
    return {"capacity_parametrized": H, "plain": H - log_ap, "invariant": H, "log_alpha_prime_integral": log_ap}


# ---------------------------------------------------------------------------
# Cusp diagnostic
# ---------------------------------------------------------------------------


def cusp_driver() -> AnalyticDriver:
    """Poisson driver with ``R(t) = 1/t`` on ``[0, 1]`` including the endpoint."""

    def p(t, w):
        return (w + t) / (w - t)

    def dp(t, w):
        return -2.0 * t / (w - t) ** 2

    def density(t, theta):
        if t >= 1.0:
            return np.where(np.mod(theta, TWO_PI) == 0.0, np.inf, 0.0)
        return (1.0 - t * t) / (TWO_PI * (1.0 - 2.0 * t * np.cos(theta) + t * t))

    return AnalyticDriver(1.0, p, dp, density=density)


@dataclass(frozen=True)
class CuspDiagnostic:
    """Boundary behaviour of ``f_1`` near ``z = 1`` for ``R(t) = 1/t``.

    ``compensated_plus[k]`` is ``arg[(f(e^{i th}) - f(1)) / (e^{i th} - 1)^2]``
    at ``th = thetas[k]`` in ``(-pi, pi]``; ``compensated_minus`` uses
    ``-thetas[k]``. ``arg_plus`` / ``arg_minus`` are ``arg(f(e^{+-i th}) - f(1))``
    in ``[0, 2 pi)``. ``q_values`` are ``f'(1 + r) / r`` along the real ray.
    """

    thetas: np.ndarray
    compensated_plus: np.ndarray
    compensated_minus: np.ndarray
    arg_plus: np.ndarray
    arg_minus: np.ndarray
    radii: np.ndarray
    q_values: np.ndarray

    def to_dict(self) -> dict:
        return {
            "thetas": self.thetas.tolist(),
            "compensated_plus": self.compensated_plus.tolist(),
            "compensated_minus": self.compensated_minus.tolist(),
            "arg_plus": self.arg_plus.tolist(),
            "arg_minus": self.arg_minus.tolist(),
            "radii": self.radii.tolist(),
            "q_abs": np.abs(self.q_values).tolist(),
        }


def _boundary_increment(driver, theta: float, n_gauss: int) -> complex:
    """``f_1(e^{i theta}) - f_1(1)`` as the integral of ``f'`` along the arc."""
    x, w = np.polynomial.legendre.leggauss(n_gauss)
    phi = 0.5 * theta * (x + 1.0)
    z = np.exp(1j * phi)
    _, df = solve_map(driver, 1.0, z, derivative=True, allow_boundary=True, rtol=1e-10, atol=1e-14)
    return complex(0.5 * theta * np.sum(w * df * 1j * z))


def cusp_diagnostic(thetas=None, radii=None, n_gauss: int = 16) -> CuspDiagnostic:
    """Cusp diagnostic for the Poisson chain with ``R(t) = 1/t`` at ``t = 1``.

    The increment ``f(e^{i theta}) - f(1)`` is obtained by Gauss-Legendre
    quadrature of ``f'`` along the unit circle, so ``f(1)`` (where the
    driving density degenerates to a point mass) is never evaluated.
    """
    thetas = np.geomspace(1e-1, 1e-4, 7) if thetas is None else np.asarray(thetas, dtype=float)
    radii = np.geomspace(1e-1, 1e-4, 7) if radii is None else np.asarray(radii, dtype=float)
    drv = cusp_driver()
    comp_p, comp_m, arg_p, arg_m = [], [], [], []
    for th in thetas:
        for sign, comp, arg in ((1.0, comp_p, arg_p), (-1.0, comp_m, arg_m)):
            dfz = _boundary_increment(drv, sign * th, n_gauss)
            ez = complex(np.exp(1j * sign * th))
            comp.append(float(np.angle(dfz / (ez - 1.0) ** 2)))
            arg.append(float(np.mod(np.angle(dfz), TWO_PI)))
    _, df = solve_map(drv, 1.0, 1.0 + radii + 0j, derivative=True, rtol=1e-10, atol=1e-14)
    q = df / radii
    return CuspDiagnostic(thetas, np.array(comp_p), np.array(comp_m), np.array(arg_p), np.array(arg_m), radii, q)
