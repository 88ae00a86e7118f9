"""Transport-equation models of Loewner growth on the line.

Two evolutions of a height function over ``x`` are driven by a time-dependent
probability density ``rho_t(x)``:

* the conservative model ``d_t v = rho_t(x) d_y v`` whose interface is
  ``v(1, 0+) = int_0^1 rho_t(x) dt``;
* the non-conservative model ``d_t u = P_t(x, y) d_y u`` with the Poisson
  integral ``P_t(x, y) = (1/pi) int y rho_t(xi) / ((x - xi)^2 + y^2) d xi``,
  solved by characteristics.

For the conservative model the entropy ``H(rho) = int_0^1 int rho log rho``
is minimized over fields with unit slice mass and time integral ``gamma``; the
minimizer is ``rho_t = gamma`` with ``H* = int gamma log gamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import InfeasibleError, InvalidInputError, NumericError


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def _xlogx(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v, dtype=float)
    pos = v > 0
    out[pos] = v[pos] * np.log(v[pos])
    return out


class LineDensity:
    """Nonnegative density on a uniform grid of ``[-L, L]``.

    Parameters
    ----------
    x : array_like
        Uniform increasing grid.
    values : array_like
        Density samples.
    mass : float, optional
        Declared mass, checked against the trapezoid mass to ``1e-8``.
    """

    def __init__(self, x, values, mass: float | None = None):
        x = np.array(x, dtype=float)
        v = np.array(values, dtype=float)
        if x.ndim != 1 or x.shape != v.shape or x.size < 3:
            raise InvalidInputError("grid and values must be matching 1-D arrays of length >= 3")
        h = np.diff(x)
        if np.any(h <= 0) or np.max(np.abs(h - h.mean())) > 1e-9 * (x[-1] - x[0]):
            raise InvalidInputError("grid must be uniform and increasing")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise InvalidInputError("density values must be finite and nonnegative")
        self.x = x
        self.values = v
        self.h = float(h.mean())
        self.weights = _trapezoid_weights(x.size, self.h)
        m = float(self.weights @ v)
        if mass is not None and abs(m - mass) > 1e-8:
            raise InvalidInputError(f"declared mass {mass} differs from trapezoid mass {m}")
        self.mass = m if mass is None else float(mass)
        x.setflags(write=False)
        v.setflags(write=False)

    @classmethod
    def gaussian(cls, L: float = 8.0, n: int = 4097, sigma: float = 1.0) -> "LineDensity":
        x = np.linspace(-L, L, n)
        v = np.exp(-0.5 * (x / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
        return cls(x, v)

    @classmethod
    def uniform(cls, a: float, b: float, L: float | None = None, n: int = 4097) -> "LineDensity":
        """Normalized indicator of ``[a, b]``.

        Without ``L`` the grid is ``[a, b]`` itself, so the trapezoid mass and
        entropy are exact. With ``L`` the grid is ``[-L, L]``; nodes at ``a``
        and ``b`` get half value and the result is renormalized, which costs
        an ``O(h)`` entropy error.
        """
        if not b > a:
            raise InvalidInputError("need a < b")
        if L is None:
            x = np.linspace(a, b, n)
            return cls(x, np.full(n, 1.0 / (b - a)))
        x = np.linspace(-L, L, n)
        h = x[1] - x[0]
        v = ((x >= a - 1e-9 * h) & (x <= b + 1e-9 * h)).astype(float)
        v[np.isclose(x, a, atol=1e-9 * h, rtol=0)] = 0.5
        v[np.isclose(x, b, atol=1e-9 * h, rtol=0)] = 0.5
        w = _trapezoid_weights(n, h)
        return cls(x, v / (w @ v))

    @classmethod
    def from_function(cls, func, L: float = 8.0, n: int = 4097, normalize: bool = True) -> "LineDensity":
        x = np.linspace(-L, L, n)
        v = np.asarray(func(x), dtype=float)
        if normalize:
            v = v / (_trapezoid_weights(n, x[1] - x[0]) @ v)
        return cls(x, v)

    def entropy(self) -> float:
        """Differential entropy ``int rho log rho dx`` (trapezoid, ``0 log 0 = 0``)."""
        return float(self.weights @ _xlogx(self.values))

    def tail_bound(self) -> float:
        """Rough truncation estimate: mass in the outer grid cells times the log range."""
        edge = self.weights[0] * self.values[0] + self.weights[-1] * self.values[-1]
        return float(edge * abs(math.log(max(self.values.max(), 1e-300))))


def differential_entropy(rho: LineDensity) -> float:
    return rho.entropy()


class TransportField:
    """Time-dependent density, piecewise constant on the cells of ``time_edges``.

    Parameters
    ----------
    time_edges : array_like
        ``0 = s_0 < s_1 < ... < s_K = 1``.
    densities : sequence of LineDensity
        One density per time cell, all on the same grid and of unit mass.
    """

    def __init__(self, time_edges, densities):
        te = np.array(time_edges, dtype=float)
        dens = list(densities)
        if te.ndim != 1 or te.size != len(dens) + 1 or te.size < 2:
            raise InvalidInputError("need one density per time cell")
        if abs(te[0]) > 1e-14 or abs(te[-1] - 1.0) > 1e-12 or np.any(np.diff(te) <= 0):
            raise InvalidInputError("time edges must increase from 0 to 1")
        x0 = dens[0].x
        for d in dens:
            if d.x.shape != x0.shape or not np.allclose(d.x, x0, rtol=0, atol=1e-12):
                raise InvalidInputError("all slices must share one spatial grid")
            if abs(d.mass - 1.0) > 1e-8:
                raise InvalidInputError(f"slice mass {d.mass} is not 1")
        self.time_edges = te
        self.densities = dens
        self.x = x0
        self.weights = dens[0].weights

    @classmethod
    def from_array(cls, x, time_edges, values) -> "TransportField":
        return cls(time_edges, [LineDensity(x, v) for v in np.asarray(values)])

    @classmethod
    def constant(cls, rho: LineDensity, n_time: int = 1) -> "TransportField":
        return cls(np.linspace(0.0, 1.0, n_time + 1), [rho] * n_time)

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.time_edges)

    @property
    def values(self) -> np.ndarray:
        return np.array([d.values for d in self.densities])

    def time_integral(self) -> np.ndarray:
        """``int_0^1 rho_t dt`` on the grid (exact for piecewise-constant fields)."""
        return self.dt @ self.values

    def entropy(self) -> float:
        """``H = int_0^1 int rho_t log rho_t dx dt``."""
        return float(self.dt @ (_xlogx(self.values) @ self.weights))

    def cell_at(self, t: float) -> int:
        k = int(np.searchsorted(self.time_edges, t, side="right")) - 1
        return min(max(k, 0), len(self.densities) - 1)


def field_entropy(values: np.ndarray, dt: np.ndarray, weights: np.ndarray) -> float:
    return float(dt @ (_xlogx(values) @ weights))


# ---------------------------------------------------------------------------
# Conservative model
# ---------------------------------------------------------------------------


def solve_conservative(field: TransportField, x):
    """Interface ``v(1, 0+)(x) = int_0^1 rho_t(x) dt``, interpolated linearly in ``x``."""
    return np.interp(x, field.x, field.time_integral())


def minimal_entropy_conservative(gamma: LineDensity, n_time: int = 1):
    """Entropy minimizer for the conservative model.

    Returns
    -------
    field : TransportField
        The constant field ``rho_t = gamma``.
    H_star : float
        ``int gamma log gamma dx``.

    Raises
    ------
    InfeasibleError
        If ``gamma`` does not have unit mass (the constraints are then
        incompatible).
    """
    if abs(gamma.mass - 1.0) > 1e-8:
        raise InfeasibleError(f"target mass {gamma.mass} is not 1; no feasible field exists")
    H = gamma.entropy()
    if not math.isfinite(H):
        raise InvalidInputError("target entropy is not finite on the grid")
    return TransportField.constant(gamma, n_time), H


def _random_profile(rng, x, gamma, n_modes=6):
    L = max(abs(x[0]), abs(x[-1]))
    k = rng.integers(1, 12, size=n_modes)
    ph = rng.uniform(0, 2 * np.pi, size=n_modes)
    amp = rng.normal(size=n_modes)
    g = (amp[:, None] * np.cos(np.pi * k[:, None] * x[None, :] / L + ph[:, None])).sum(axis=0)
    return g


def feasible_perturbation(gamma: LineDensity, dt: np.ndarray, rng, strength: float = 0.9) -> np.ndarray:
    """Random feasible field ``rho_k = gamma (1 + a_k g)``.

    ``g`` is a random smooth profile with ``int gamma g = 0`` and ``a`` has
    ``sum_k dt_k a_k = 0``, so both linear constraints hold exactly. The
    amplitude keeps ``1 + a_k g >= 1 - strength``.
    """
    x, w, gv = gamma.x, gamma.weights, gamma.values
    g = _random_profile(rng, x, gamma)
    g = g - (w @ (gv * g)) / (w @ gv)
    support = gv > 0
    gmax = np.max(np.abs(g[support])) if np.any(support) else 1.0
    g = g / gmax
    a = rng.normal(size=dt.size)
    a = a - (dt @ a) / dt.sum()
    amax = np.max(np.abs(a))
    if amax == 0:
        a = np.zeros_like(a)
    else:
        a = a / amax * strength * rng.uniform(0.05, 1.0)
    return gv[None, :] * (1.0 + a[:, None] * g[None, :])


@dataclass
class MinimalityReport:
    """Outcome of :func:`verify_minimality`."""

    h_star: float
    trial_entropies: np.ndarray
    all_above: bool
    min_gap: float
    descent_entropies: np.ndarray
    descent_monotone: bool
    descent_l1: float
    converged: bool
    max_constraint_violation: float
    seed: int
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "h_star": self.h_star,
            "n_trials": int(self.trial_entropies.size),
            "all_above": self.all_above,
            "min_gap": self.min_gap,
            "descent_iterations": int(self.descent_entropies.size - 1),
            "descent_monotone": self.descent_monotone,
            "descent_l1": self.descent_l1,
            "converged": self.converged,
            "max_constraint_violation": self.max_constraint_violation,
            "seed": self.seed,
        }


def _newton_direction(rho, G, gv, w, dt):
    """Feasible descent direction ``-rho (G + alpha_k + beta)`` in the metric ``diag(1/rho)``.

    ``alpha`` and ``beta`` are the multipliers of the mass and time-integral
    constraints; ``beta`` is eliminated and the remaining ``K x K`` system is
    solved in the least-squares sense (it is singular by one gauge mode).
    """
    sup = gv > 0
    rs, Gs, gs, ws = rho[:, sup], G[:, sup], gv[sup], w[sup]
    K = rs.shape[0]
    # beta_j = -(sum_l dt_l rho_lj (G_lj + alpha_l)) / gamma_j
    b = (rs * Gs) @ ws  # sum_j w_j rho_kj G_kj
    c_vec = (rs * ws[None, :] / gs[None, :]) @ (dt @ (rs * Gs))
    M = (rs * (ws / gs)[None, :]) @ (rs.T * dt[None, :])
    A = np.eye(K) * (rs @ ws)[:, None] - M
    alpha = np.linalg.lstsq(A, -(b - c_vec), rcond=None)[0]
    beta = -((dt[:, None] * rs) * (Gs + alpha[:, None])).sum(axis=0) / gs
    d = np.zeros_like(rho)
    d[:, sup] = -rs * (Gs + alpha[:, None] + beta[None, :])
    return d


def descend(start: np.ndarray, gamma: LineDensity, dt: np.ndarray, max_iter: int = 200, tol: float = 1e-12):
    """Projected variable-metric descent of the field entropy from a feasible start.

    Each step moves along the constrained Newton direction of the separable
    objective, with a fraction-to-boundary rule for positivity and Armijo
    backtracking. Returns the final field and the entropy history.
    """
    w, gv = gamma.weights, gamma.values
    rho = np.array(start, dtype=float)
    hist = [field_entropy(rho, dt, w)]
    for _ in range(max_iter):
        G = np.zeros_like(rho)
        pos = rho > 0
        G[pos] = np.log(rho[pos]) + 1.0
        d = _newton_direction(rho, G, gv, w, dt)
        slope = float(np.sum(dt[:, None] * w[None, :] * G * d))
        if slope > -tol:
            break
        neg = d < 0
        step = 1.0
        if np.any(neg):
            step = min(1.0, 0.99 * float(np.min(-rho[neg] / d[neg])))
        H0 = hist[-1]
        while step > 1e-16:
            trial = rho + step * d
            Ht = field_entropy(trial, dt, w)
            if Ht <= H0 + 1e-4 * step * slope:
                break
            step *= 0.5
        else:
            break
        rho = trial
        hist.append(Ht)
    return rho, np.array(hist)


def verify_minimality(gamma: LineDensity, n_trials: int = 100, seed: int = 0, n_time: int = 8,
                      descent_tol: float = 1e-6) -> MinimalityReport:
    """Numerical certificate that the constant field minimizes the entropy.

    ``n_trials`` random feasible fields (see :func:`feasible_perturbation`)
    are compared with ``H*``, and a projected descent started from a further
    random feasible field must reach ``rho = gamma`` within ``descent_tol``
    in per-slice L1 norm.
    """
    _, H = minimal_entropy_conservative(gamma)
    rng = np.random.Generator(np.random.Philox(int(seed)))
    dt = np.full(n_time, 1.0 / n_time)
    w, gv = gamma.weights, gamma.values
    trials = []
    viol = 0.0
    for _ in range(int(n_trials)):
        f = feasible_perturbation(gamma, dt, rng)
        viol = max(viol, float(np.max(np.abs(f @ w - 1.0))), float(np.max(np.abs(dt @ f - gv))))
        trials.append(field_entropy(f, dt, w))
    trials = np.array(trials)
    start = feasible_perturbation(gamma, dt, rng)
    final, hist = descend(start, gamma, dt)
    l1 = float(np.max(np.abs(final - gv[None, :]) @ w))
    monotone = bool(np.all(np.diff(hist) <= 1e-15 * max(1.0, abs(H))))
    if not np.all(np.isfinite(hist)):
        raise NumericError("descent produced non-finite entropies")
    return MinimalityReport(
        h_star=H,
        trial_entropies=trials,
        all_above=bool(np.all(trials >= H - 1e-9)),
        min_gap=float(np.min(trials - H)) if trials.size else math.inf,
        descent_entropies=hist,
        descent_monotone=monotone,
        descent_l1=l1,
        converged=l1 <= descent_tol,
        max_constraint_violation=viol,
        seed=int(seed),
    )


# ---------------------------------------------------------------------------
# Non-conservative model
# ---------------------------------------------------------------------------


def poisson_integral(rho: LineDensity | np.ndarray, x_grid: np.ndarray, x: float, y: float) -> float:
    """``P(x, y)`` for the piecewise-linear interpolant of ``rho``, integrated exactly.

    On a cell ``[a, b]`` with ``rho = r_a + s (xi - a)`` and ``u = xi - x``,
    ``int y rho / (u^2 + y^2) = (r_a + s (x - a)) [atan(u/y)] + s (y/2) [log(u^2 + y^2)]``.
    """
    v = rho.values if isinstance(rho, LineDensity) else np.asarray(rho)
    if not y > 0:
        raise InvalidInputError("the Poisson integral needs y > 0")
    xa, xb = x_grid[:-1], x_grid[1:]
    ra, rb = v[:-1], v[1:]
    s = (rb - ra) / (xb - xa)
    ua, ub = xa - x, xb - x
    at = np.arctan2(ub, y) - np.arctan2(ua, y)
    lg = np.log((ub * ub + y * y) / (ua * ua + y * y))
    total = np.sum((ra + s * (x - xa)) * at + s * (0.5 * y) * lg)
    return float(total / math.pi)


@dataclass
class NonconservativeResult:
    """Characteristic solution of the non-conservative model at one ``x``."""

    x: float
    y_values: np.ndarray
    u_values: np.ndarray
    interface: float
    y0: float
    y_end: float
    swallowed: bool
    swallow_time: float | None


def _characteristic(field: TransportField, x: float, y: float, backward: bool, rtol: float):
    """Integrate ``dY/dt = -P_t(x, Y)`` forward, or its time reversal from ``t = 1``."""
    edges = field.time_edges
    cells = range(len(field.densities))
    if backward:
        cells = reversed(list(cells))
    Y = float(y)
    hit = None
    for k in cells:
        dens = field.densities[k]
        span = edges[k + 1] - edges[k]
        sign = 1.0 if backward else -1.0

        def rhs(t, Yv, dens=dens, sign=sign):
            if Yv[0] <= 1e-12:
                # Boundary limit P(x, 0+) = rho(x).
                return [sign * float(np.interp(x, field.x, dens.values))]
            return [sign * poisson_integral(dens, field.x, x, Yv[0])]

        def ground(t, Yv):
            return Yv[0]

        ground.terminal = True
        ground.direction = -1
        sol = solve_ivp(rhs, (0.0, span), [Y], method="RK45", rtol=rtol, atol=1e-12,
                        events=None if backward else ground)
        if not sol.success:
            raise NumericError(f"characteristic integration failed: {sol.message}")
        if not backward and sol.t_events[0].size:
            hit = edges[k] + float(sol.t_events[0][0])
            return 0.0, hit
        Y = float(sol.y[0, -1])
    return Y, hit


def solve_nonconservative(field: TransportField, x: float, y0: float = 1e-2, rtol: float = 1e-8) -> NonconservativeResult:
    """Method of characteristics for ``d_t u = P_t(x, y) d_y u`` with ``u(0, y) = y``.

    ``u`` is constant along ``dY/dt = -P_t(x, Y)``, so ``u(1, y)`` is the
    starting height of the characteristic that ends at ``y``; it is found
    by integrating backward from ``t = 1``. The interface value ``u(1, 0+)``
    is the quadratic Richardson extrapolation of ``u(1, y)`` over
    ``y in {y0, y0/2, y0/4}``. The forward characteristic from ``y0`` is also
    integrated and flagged as swallowed if it reaches ``Y = 0`` before
    ``t = 1``.
    """
    if not y0 > 0:
        raise InvalidInputError("y0 must be positive")
    ys = np.array([y0, y0 / 2.0, y0 / 4.0])
    us = np.array([_characteristic(field, x, y, True, rtol)[0] for y in ys])
    r1 = 2.0 * us[1] - us[0]
    r2 = 2.0 * us[2] - us[1]
    interface = (4.0 * r2 - r1) / 3.0
    y_end, hit = _characteristic(field, x, y0, False, rtol)
    return NonconservativeResult(float(x), ys, us, float(interface), float(y0), y_end, hit is not None, hit)


def nonconservative_interface(field: TransportField, xs, y0: float = 1e-2) -> np.ndarray:
    return np.array([solve_nonconservative(field, float(x), y0).interface for x in np.atleast_1d(xs)])


@dataclass
class ModelComparison:
    """Interfaces of both transport models on a common set of ``x``."""

    x: np.ndarray
    conservative: np.ndarray
    nonconservative: np.ndarray
    swallowed: np.ndarray

    @property
    def sup_gap(self) -> float:
        return float(np.max(np.abs(self.conservative - self.nonconservative)))

    def to_dict(self) -> dict:
        return {
            "x": self.x.tolist(),
            "conservative": self.conservative.tolist(),
            "nonconservative": self.nonconservative.tolist(),
            "swallowed": self.swallowed.tolist(),
            "sup_gap": self.sup_gap,
        }


def compare_models(field: TransportField, xs, y0: float = 1e-2) -> ModelComparison:
    """Evaluate both interfaces at ``xs`` and report their sup-norm gap."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    res = [solve_nonconservative(field, float(x), y0) for x in xs]
    return ModelComparison(
        xs,
        np.asarray(solve_conservative(field, xs)),
        np.array([r.interface for r in res]),
        np.array([r.swallowed for r in res]),
    )
