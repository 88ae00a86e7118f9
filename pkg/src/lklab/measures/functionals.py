"""Entropy, energy and averaging functionals of driving measures."""

from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidInputError
from .core import (
    TWO_PI,
    AtomicSlice,
    CircleDensity,
    DrivingMeasure,
    MeasureSlice,
    TimeChange,
)

#: Difference quotients of sqrt(rho) above this value are reported as an
#: infinite Dirichlet energy.
ENERGY_BLOWUP = 1e8


def _as_density(rho) -> CircleDensity:
    if isinstance(rho, CircleDensity):
        return rho
    arr = np.asarray(rho, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("density values must be finite")
    return CircleDensity(arr)


def _xlogx_sum(x: np.ndarray) -> float:
    pos = x > 0
    return float(np.sum(x[pos] * np.log(x[pos])))


def slice_entropy(rho) -> float:
    """Entropy ``int rho log(2 pi rho) d theta`` of one circle slice.

    Parameters
    ----------
    rho : CircleDensity or array_like
        Density with respect to ``d theta``. Need not be normalized.

    Returns
    -------
    float
        Periodic rectangle-rule value with the convention ``0 log 0 = 0``.
        For a probability density this is the relative entropy against the
        uniform measure.
    """
    d = _as_density(rho)
    v = d.values
    pos = v > 0
    return float(np.sum(v[pos] * np.log(TWO_PI * v[pos])) * d.spacing)


def total_entropy(mu: DrivingMeasure) -> float:
    """Time integral of :func:`slice_entropy`; ``math.inf`` if any slice is atomic."""
    if not mu.is_density_valued:
        return math.inf
    return float(math.fsum(s.duration * slice_entropy(s.content) for s in mu.slices))


def mass_profile_entropy(mu: DrivingMeasure) -> float:
    """Differential entropy ``int m log m dt`` of the piecewise-constant mass profile."""
    m = mu.masses
    return float(math.fsum(mu.durations * m * np.log(m)))


def invariant_entropy(mu: DrivingMeasure) -> float:
    """Total entropy minus the entropy of the mass profile.

    This combination does not change under time reparametrization.
    """
    H = total_entropy(mu)
    if math.isinf(H):
        return H
    return H - mass_profile_entropy(mu)


def time_change(mu: DrivingMeasure, tau: TimeChange) -> DrivingMeasure:
    """Reparametrize ``mu`` by ``s -> t(s)``.

    The result lives on ``[0, tau.S]`` and has slices ``t'(s) rho_{t(s)}``.
    ``t`` acts through its piecewise-linear interpolant, so the output slice
    grid is the union of the ``s`` grid and the preimages of the slice edges
    of ``mu``; on each output slice ``t'`` is the constant secant slope. With
    this choice the reparametrization identity
    ``H(mu~) - H(mu) = h(m~) - h(m)`` holds up to rounding.

    Raises
    ------
    InvalidInputError
        If ``tau`` does not end at ``mu.T`` or ``mu`` has atomic slices.
    """
    if not isinstance(tau, TimeChange):
        raise InvalidInputError("tau must be a TimeChange")
    if abs(tau.T - mu.T) > 1e-9 * max(1.0, mu.T):
        raise InvalidInputError(f"time change ends at {tau.T}, measure at {mu.T}")
    if not mu.is_density_valued:
        raise InvalidInputError("time_change requires density slices")
    edges_t = mu.breakpoints[1:-1]
    s_extra = tau.inverse(edges_t)
    s_nodes = np.union1d(tau.s, s_extra)
    # Merge nodes closer than round-off so no degenerate slices appear.
    keep = np.concatenate([[True], np.diff(s_nodes) > 1e-13 * tau.S])
    s_nodes = s_nodes[keep]
    s_nodes[-1] = tau.S
    t_nodes = np.interp(s_nodes, tau.s, tau.t)
    t_nodes[-1] = mu.T
    out = []
    for sa, sb, ta, tb in zip(s_nodes[:-1], s_nodes[1:], t_nodes[:-1], t_nodes[1:]):
        slope = (tb - ta) / (sb - sa)
        src = mu.slice_at(0.5 * (ta + tb))
        out.append(MeasureSlice(sa, sb, src.content.scaled(slope), src.mass * slope))
    return DrivingMeasure(out)


def dirichlet_energy(rho) -> float:
    """Dirichlet energy ``(1/2) int |(sqrt rho)'|^2 d theta`` of one slice.

    The derivative of ``sqrt rho`` is taken by periodic central differences.
    Returns ``math.inf`` when a one-sided difference quotient of ``sqrt rho``
    exceeds :data:`ENERGY_BLOWUP`.
    """
    d = _as_density(rho)
    f = np.sqrt(d.values)
    h = d.spacing
    if np.max(np.abs(np.roll(f, -1) - f)) / h > ENERGY_BLOWUP:
        return math.inf
    df = (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * h)
    return float(0.5 * np.sum(df * df) * h)


def total_energy(mu: DrivingMeasure) -> float:
    """Time integral of :func:`dirichlet_energy`; infinite for atomic slices."""
    if not mu.is_density_valued:
        return math.inf
    return float(math.fsum(s.duration * dirichlet_energy(s.content) for s in mu.slices))


def pinsker_bound(rho, tol: float = 1e-8) -> float:
    """Pinsker lower bound ``(1/2) (int |2 pi rho - 1| d theta / 2 pi)^2``.

    Raises
    ------
    InvalidInputError
        If the mass of ``rho`` differs from one by more than ``tol``.
    """
    d = _as_density(rho)
    if abs(d.mass - 1.0) > tol:
        raise InvalidInputError(f"Pinsker bound needs a probability density, mass = {d.mass}")
    tv = np.sum(np.abs(TWO_PI * d.values - 1.0)) * d.spacing / TWO_PI
    return float(0.5 * tv * tv)


def _window_overlaps(mu: DrivingMeasure, a: float, b: float):
    for s in mu.slices:
        lo, hi = max(a, s.t0), min(b, s.t1)
        if hi > lo:
            yield s, hi - lo


def _average_content(parts, width: float):
    contents = [(s.content, w / width) for s, w in parts]
    if all(isinstance(c, CircleDensity) for c, _ in contents):
        sizes = {c.grid_size for c, _ in contents}
        if len(sizes) != 1:
            raise InvalidInputError("cannot average densities on different grids")
        vals = sum(c.values * f for c, f in contents)
        return CircleDensity(vals)
    if all(isinstance(c, AtomicSlice) for c, _ in contents):
        ang = np.concatenate([c.angles for c, _ in contents])
        wts = np.concatenate([c.weights * f for c, f in contents])
        return AtomicSlice(ang, wts)
    raise InvalidInputError("cannot average atomic and density slices together")


def average_in_time(mu: DrivingMeasure, m: int) -> DrivingMeasure:
    """Window average over ``m`` equal windows of ``[0, T]``.

    Each output slice is the time average of ``mu`` over its window, so the
    cylinder mass of every window is preserved.
    """
    if int(m) != m or m <= 0:
        raise InvalidInputError("m must be a positive integer")
    m = int(m)
    edges = np.linspace(0.0, mu.T, m + 1)
    edges[-1] = mu.T
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        parts = list(_window_overlaps(mu, a, b))
        width = b - a
        mass = math.fsum(s.mass * w for s, w in parts) / width
        content = _average_content(parts, width)
        out.append(MeasureSlice(a, b, content, mass if isinstance(content, CircleDensity) else None))
    return DrivingMeasure(out)


def coarse_grained_entropy(mu: DrivingMeasure, m: int, tol: float = 1e-8) -> float:
    """Entropy ``sum_i (T/m) h(nu_i)`` of the ``m``-window average of ``mu``.

    For ``T = 1`` this is the mean of the window entropies. By Jensen's
    inequality it never exceeds :func:`total_entropy`.

    Raises
    ------
    InvalidInputError
        If ``mu`` is not normalized.
    """
    if not mu.is_normalized(tol):
        raise InvalidInputError("coarse-grained entropy requires unit-mass slices")
    return total_entropy(average_in_time(mu, m))
