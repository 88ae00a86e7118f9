import math

import numpy as np
import pytest

from lklab.conformal import slit_capacity
from lklab.errors import InvalidInputError
from lklab.hl0 import (
    make_generator,
    normalized_slices,
    particles_for_capacity,
    simulate_hl0,
    simulate_hl0_poisson,
    smooth_atoms,
)
from lklab.lk_solver import solve_map
from lklab.measures import AtomicSlice, invariant_entropy, mass_profile_entropy, total_entropy


def test_single_particle():
    run = simulate_hl0(1, 0.5, 3)
    assert run.angles.shape == (1,)
    assert run.mu.T == pytest.approx(slit_capacity(0.5))
    z = np.exp(1j * run.angles[0])
    assert abs(run.chain(z) - (1 + 0.5) * z) < 1e-10


def test_capacity_and_slices():
    run = simulate_hl0(200, 0.1, 11)
    c = slit_capacity(0.1)
    assert run.capacity == pytest.approx(200 * c, rel=1e-14)
    assert run.chain.capacity == pytest.approx(run.capacity, rel=1e-14)
    assert run.mu.T == pytest.approx(run.capacity, rel=1e-12)
    assert np.allclose(run.mu.masses, 1.0)
    assert np.allclose(run.mu.durations, c)
    assert all(isinstance(s.content, AtomicSlice) for s in run.mu.slices)
    assert abs(run.chain(1e7) / 1e7) == pytest.approx(math.exp(run.capacity), rel=1e-6)


def test_driving_measure_reproduces_cluster():
    run = simulate_hl0(30, 0.2, 5)
    z = 1.5 * np.exp(2j * np.pi * np.arange(16) / 16)
    assert np.allclose(solve_map(run.mu, run.mu.T, z), run.chain(z), atol=1e-10)


def test_determinism():
    a = simulate_hl0(100, 0.1, 42)
    b = simulate_hl0(100, 0.1, 42)
    c = simulate_hl0(100, 0.1, 43)
    assert np.array_equal(a.angles, b.angles)
    assert not np.array_equal(a.angles, c.angles)
    pa = simulate_hl0_poisson(0.1, 1.0, 42)
    pb = simulate_hl0_poisson(0.1, 1.0, 42)
    assert np.array_equal(pa.arrival_times, pb.arrival_times)
    assert np.array_equal(pa.angles, pb.angles)


def test_generator_is_philox_and_validates_seed():
    assert isinstance(make_generator(1).bit_generator, np.random.Philox)
    with pytest.raises(InvalidInputError):
        make_generator(-1)
    with pytest.raises(InvalidInputError):
        simulate_hl0(0, 0.1, 1)


def test_angles_are_uniform():
    run = simulate_hl0(20000, 0.01, 9)
    counts = np.histogram(run.angles, bins=8, range=(0, 2 * np.pi))[0]
    assert np.all(np.abs(counts / 20000 - 1 / 8) < 0.01)


@pytest.mark.parametrize("eps", [0.2, 0.1, 0.05])
def test_particles_for_capacity(eps):
    n = particles_for_capacity(eps)
    assert abs(n * slit_capacity(eps) - 1.0) <= slit_capacity(eps) / 2


def test_poisson_mass_identity():
    run = simulate_hl0_poisson(0.1, 1.0, 7)
    c = run.particle_capacity
    complete = run.mu_tilde.slices[: run.count]
    for s in complete:
        assert s.mass * s.duration == pytest.approx(c, rel=1e-12)
    assert run.mu_tilde.T == pytest.approx(1.0)
    assert abs(run.mu_tilde.total_mass - run.log_capacity) <= c
    assert 0 <= run.partial_fraction < 1


def test_poisson_early_horizon_has_empty_cluster():
    run = simulate_hl0_poisson(0.1, 1e-8, 1)
    assert run.count == 0
    assert run.log_capacity == 0.0
    assert len(run.mu_tilde.slices) == 1
    assert np.array_equal(run.chain(np.array([2.0])), np.array([2.0 + 0j]))


def test_poisson_law_of_large_numbers():
    scaled = [simulate_hl0_poisson(0.05, 1.0, s).scaled_count for s in range(20)]
    assert abs(np.mean(scaled) - 1.0) < 0.02


def test_smoothing_entropy_identity():
    run = simulate_hl0_poisson(0.2, 1.0, 3)
    n_grid = 128
    sm = smooth_atoms(run.mu_tilde, n_grid)
    assert math.isinf(total_entropy(run.mu_tilde))
    assert np.allclose(sm.masses, run.mu_tilde.masses)
    H = total_entropy(sm)
    expected = mass_profile_entropy(run.mu_tilde) + run.mu_tilde.total_mass * math.log(n_grid)
    assert H == pytest.approx(expected, rel=1e-10)
    assert invariant_entropy(sm) == pytest.approx(run.mu_tilde.total_mass * math.log(n_grid), rel=1e-10)


def test_normalized_slices_have_unit_mass():
    run = simulate_hl0_poisson(0.2, 1.0, 4)
    assert normalized_slices(run.mu_tilde).is_normalized()
