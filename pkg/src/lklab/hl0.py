"""Hastings-Levitov HL(0) clusters in discrete and Poissonized time.

Each particle is a slit of fixed length ``eps`` attached at an independent
uniform angle. In discrete time particle ``k`` occupies the time slice
``[(k-1) c, k c)`` with ``c = slit_capacity(eps)`` and contributes a unit
point mass at its angle. In Poissonized time particles arrive at the jumps of
a rate ``lambda = 4 / eps^2`` Poisson process and particle ``k`` grows
linearly over ``(tau_{k-1}, tau_k]``: the slice carries the atom with weight
``c / X_k``, where ``X_k`` is the inter-arrival time.

Random numbers come from NumPy's counter-based Philox generator, seeded
explicitly, so runs are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conformal import ComposedSlitMap, SlitParams, slit_capacity
from .errors import InternalError, InvalidInputError
from .measures.core import TWO_PI, AtomicSlice, CircleDensity, DrivingMeasure, MeasureSlice


def make_generator(seed: int) -> np.random.Generator:
    """Philox-backed generator for a 64-bit integer seed."""
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise InvalidInputError("seed must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.Philox(seed))


def particles_for_capacity(eps: float, T: float = 1.0) -> int:
    """Number of particles whose total log-capacity is closest to ``T``."""
    return max(1, int(round(T / slit_capacity(eps))))


@dataclass(frozen=True)
class Hl0Run:
    """Discrete-time HL(0) cluster and its driving measure."""

    epsilon: float
    n: int
    seed: int
    angles: np.ndarray
    chain: ComposedSlitMap
    mu: DrivingMeasure

    @property
    def capacity(self) -> float:
        """Total log-capacity ``n c(eps)``."""
        return self.n * slit_capacity(self.epsilon)

    def manifest(self) -> dict:
        return {
            "mode": "discrete",
            "epsilon": self.epsilon,
            "n": self.n,
            "seed": self.seed,
            "particle_capacity": slit_capacity(self.epsilon),
            "capacity": self.capacity,
        }


def simulate_hl0(n: int, eps: float, seed: int) -> Hl0Run:
    """Simulate ``n`` HL(0) particles of size ``eps``.

    Parameters
    ----------
    n : int
        Number of particles, at least 1.
    eps : float
        Slit length.
    seed : int
        Seed of the Philox generator.
    """
    if int(n) != n or n < 1:
        raise InvalidInputError("n must be a positive integer")
    n = int(n)
    c = slit_capacity(eps)
    rng = make_generator(seed)
    angles = TWO_PI * rng.random(n)
    angles.setflags(write=False)
    chain = ComposedSlitMap(SlitParams(eps, a) for a in angles)
    slices = [MeasureSlice(k * c, (k + 1) * c, AtomicSlice.single(a)) for k, a in enumerate(angles)]
    return Hl0Run(float(eps), n, int(seed), angles, chain, DrivingMeasure(slices))


@dataclass(frozen=True)
class PoissonRun:
    """Poissonized HL(0) run on ``[0, T]``.

    Attributes
    ----------
    arrival_times : ndarray
        Arrival times ``tau_1 < ... < tau_N <= T``.
    angles : ndarray
        Angles of the ``N`` completed particles.
    partial_angle, partial_fraction : float
        Angle of the particle growing at time ``T`` and the fraction of its
        capacity already attached.
    mu_tilde : DrivingMeasure
        Driving measure with slice masses ``c / X_k``.
    mass_profile : ndarray
        Circle mass of every slice of ``mu_tilde``.
    """

    epsilon: float
    lam: float
    T: float
    seed: int
    arrival_times: np.ndarray
    angles: np.ndarray
    partial_angle: float
    partial_fraction: float
    mu_tilde: DrivingMeasure
    mass_profile: np.ndarray

    @property
    def count(self) -> int:
        """Number ``N(T)`` of arrivals."""
        return int(self.arrival_times.size)

    @property
    def particle_capacity(self) -> float:
        return slit_capacity(self.epsilon)

    @property
    def log_capacity(self) -> float:
        """Log-capacity ``N(T) c(eps)`` of the cluster of completed particles."""
        return self.count * self.particle_capacity

    @property
    def scaled_count(self) -> float:
        """``N(T) / lambda``, the log-capacity in the small-particle normalization."""
        return self.count / self.lam

    @property
    def chain(self) -> ComposedSlitMap:
        return ComposedSlitMap(SlitParams(self.epsilon, a) for a in self.angles)

    def manifest(self) -> dict:
        return {
            "mode": "poisson",
            "epsilon": self.epsilon,
            "lambda": self.lam,
            "T": self.T,
            "seed": self.seed,
            "arrivals": self.count,
            "particle_capacity": self.particle_capacity,
            "log_capacity": self.log_capacity,
            "scaled_count": self.scaled_count,
            "measure_mass": self.mu_tilde.total_mass,
        }


def simulate_hl0_poisson(eps: float, T: float, seed: int) -> PoissonRun:
    """Simulate Poissonized HL(0) on ``[0, T]`` with intensity ``4 / eps^2``.

    Inter-arrival times and angles come from two independent Philox streams
    spawned from ``seed``.
    """
    T = float(T)
    if not T > 0:
        raise InvalidInputError("T must be positive")
    c = slit_capacity(eps)
    lam = 4.0 / (eps * eps)
    ss = np.random.SeedSequence(int(seed))
    s_time, s_angle = ss.spawn(2)
    g_time = np.random.Generator(np.random.Philox(s_time))
    g_angle = np.random.Generator(np.random.Philox(s_angle))
    gaps: list[float] = []
    total = 0.0
    block = max(16, int(lam * T * 1.2) + 16)
    while total <= T:
        for x in g_time.exponential(1.0 / lam, size=block):
            gaps.append(float(x))
            total += x
            if total > T:
                break
    gaps_arr = np.array(gaps)
    tau = np.cumsum(gaps_arr)
    n_done = int(np.searchsorted(tau, T, side="right"))
    angles_all = TWO_PI * g_angle.random(n_done + 1)
    slices = []
    t_prev = 0.0
    for k in range(n_done):
        w = c / gaps_arr[k]
        slices.append(MeasureSlice(t_prev, tau[k], AtomicSlice.single(angles_all[k], w)))
        t_prev = tau[k]
    partial_fraction = 0.0
    if T > t_prev:
        w = c / gaps_arr[n_done]
        slices.append(MeasureSlice(t_prev, T, AtomicSlice.single(angles_all[n_done], w)))
        partial_fraction = (T - t_prev) / gaps_arr[n_done]
    mu = DrivingMeasure(slices)
    run = PoissonRun(
        epsilon=float(eps),
        lam=lam,
        T=T,
        seed=int(seed),
        arrival_times=tau[:n_done],
        angles=angles_all[:n_done],
        partial_angle=float(angles_all[n_done]),
        partial_fraction=float(partial_fraction),
        mu_tilde=mu,
        mass_profile=mu.masses,
    )
    if abs(mu.total_mass - run.log_capacity) > c * (1 + 1e-9):
        raise InternalError("measure mass and cluster capacity differ by more than one particle")
    return run


def smooth_atoms(mu: DrivingMeasure, n_grid: int = 256) -> DrivingMeasure:
    """Replace atoms by histogram densities on an ``n_grid`` angular grid.

    Each atom is moved to its nearest grid node; slice masses are unchanged.
    This is a diagnostic for entropy identities only: the atomic measure
    itself has infinite entropy.
    """
    h = TWO_PI / n_grid
    out = []
    for s in mu.slices:
        if isinstance(s.content, AtomicSlice):
            idx = np.rint(s.content.angles / h).astype(int) % n_grid
            vals = np.bincount(idx, weights=s.content.weights, minlength=n_grid) / h
            out.append(MeasureSlice(s.t0, s.t1, CircleDensity(vals), s.mass))
        else:
            out.append(s)
    return DrivingMeasure(out)


def normalized_slices(mu: DrivingMeasure) -> DrivingMeasure:
    """Divide every slice by its mass (the ``rho`` in ``mu = m rho``)."""
    return DrivingMeasure(
        MeasureSlice(s.t0, s.t1, s.content.scaled(1.0 / s.mass)) for s in mu.slices
    )
