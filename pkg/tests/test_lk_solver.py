import math

import numpy as np
import pytest

from lklab.conformal import SlitParams, slit_capacity, slit_length, slit_map_eval
from lklab.errors import DomainError
from lklab.examples import NamedChain, poisson_const_map
from lklab.lk_solver import (
    becker_check,
    measure_evaluator,
    poisson_driver,
    recover_density,
    solve_map,
    trace_hull,
    winding_number,
    xlogx_sup,
)
from lklab.measures import AtomicSlice, CircleDensity, DrivingMeasure, MeasureSlice

from conftest import poisson_density, poisson_values

Z2 = 2.0 * np.exp(2j * np.pi * np.arange(64) / 64)


def test_uniform_driver_scales():
    mu = DrivingMeasure.uniform(1.0, 64)
    for t in (0.3, 1.0):
        assert np.allclose(solve_map(mu, t, Z2), math.exp(t) * Z2, rtol=1e-9)


def test_time_zero_is_identity(poisson2):
    assert np.array_equal(solve_map(poisson2, 0.0, Z2), Z2)


@pytest.mark.parametrize("t", [0.25, 0.5, 1.0])
def test_poisson_density_matches_closed_form(poisson2, t):
    f = solve_map(poisson2, t, Z2)
    assert np.max(np.abs(f - poisson_const_map(2.0, t, Z2))) < 1e-6


@pytest.mark.parametrize("R", [1.5, 4.0])
def test_analytic_poisson_driver(R):
    f = solve_map(poisson_driver(R), 0.7, Z2)
    assert np.max(np.abs(f - poisson_const_map(R, 0.7, Z2))) < 1e-7


def test_poisson_driver_rejects_R_at_most_one():
    with pytest.raises(Exception):
        poisson_driver(1.0)


def test_single_atom_slice_is_slit_map():
    mu = DrivingMeasure([MeasureSlice(0, 0.3, AtomicSlice.single(1.1))])
    d = slit_length(0.3)
    assert np.allclose(solve_map(mu, 0.3, Z2), slit_map_eval(SlitParams(d, 1.1), Z2), atol=1e-14)
    f, df = solve_map(mu, 0.3, Z2, derivative=True)
    _, ds = slit_map_eval(SlitParams(d, 1.1), Z2, derivative=True)
    assert np.allclose(df, ds)


def test_two_atom_slice_is_solved_numerically():
    sl = AtomicSlice([0.0, np.pi], [0.5, 0.5])
    mu = DrivingMeasure([MeasureSlice(0, 0.2, sl)])
    f = solve_map(mu, 0.2, Z2)
    assert abs(f[0] / 1) > 2
    # Symmetry under z -> -z.
    assert np.allclose(solve_map(mu, 0.2, -Z2), -f, atol=1e-8)


def test_capacity_grows_like_total_mass(rng):
    vals = rng.uniform(0.2, 1.0, 256)
    mu = DrivingMeasure([MeasureSlice(0, 0.5, CircleDensity(vals).normalized().scaled(2.0))])
    z = np.array([1e6])
    ratio = abs(solve_map(mu, 0.5, z)[0] / z[0])
    assert ratio == pytest.approx(math.exp(1.0), rel=1e-5)


def test_derivative_matches_finite_difference(poisson2):
    z = np.array([1.7 + 0.4j, -2.5j])
    _, df = solve_map(poisson2, 0.6, z, derivative=True)
    h = 1e-5
    fd = (solve_map(poisson2, 0.6, z + h) - solve_map(poisson2, 0.6, z - h)) / (2 * h)
    assert np.allclose(df, fd, rtol=1e-6)


def test_domain_errors(poisson2):
    with pytest.raises(DomainError):
        solve_map(poisson2, 0.5, 0.9)
    with pytest.raises(DomainError):
        solve_map(poisson2, 0.5, 1.0)
    with pytest.raises(DomainError):
        solve_map(poisson2, 1.5, 2.0)


def test_winding_number_of_circle():
    pts = np.exp(2j * np.pi * np.arange(100) / 100)
    assert winding_number(pts, 0.0) == 1
    assert winding_number(pts, 2.0) == 0
    assert winding_number(pts[::-1], 0.0) == -1


def test_trace_encloses_unit_disc(poisson2):
    tr = trace_hull(poisson2, 0.5, 128)
    assert tr.winding_number(0.0) == 1
    assert np.all(np.abs(tr.points) > 1)
    assert tr.contains(np.array([0.5, -0.5j])).all()


def test_orthogonal_trace_close_to_closed_form():
    ch = NamedChain("orthogonal-disks")
    mu = ch.driver(0.5, 1024)
    tr = trace_hull(mu, 0.5, 64, standoff=1e-3)
    exact = ch.map(0.5, (1 + 1e-3) * np.exp(1j * tr.angles))
    assert tr.hausdorff(exact) < 2e-2


def test_recover_uniform():
    rho = recover_density(measure_evaluator(DrivingMeasure.uniform(1.0, 64)), 0.5, grid=64)
    assert np.max(np.abs(rho.values - 1 / (2 * np.pi))) < 1e-8


def test_recover_poisson(poisson2):
    rho = recover_density(measure_evaluator(poisson2), 0.5, grid=128)
    err = np.max(np.abs(rho.values - poisson_values(2.0, 128)))
    assert err < 5e-3


def test_recover_at_end_of_window(poisson2):
    rho = recover_density(measure_evaluator(poisson2), 1.0, grid=64)
    assert np.max(np.abs(rho.values - poisson_values(2.0, 64))) < 5e-3


def test_recover_orthogonal_from_closed_form():
    ch = NamedChain("orthogonal-disks")
    rho = recover_density(lambda t, z: ch.map(t, z), 0.5, grid=256, richardson=True)
    exact = ch.density(0.5, rho.theta)
    assert np.max(np.abs(rho.values - exact)) < 1e-2


def test_recovery_round_trip(poisson2):
    rho = recover_density(measure_evaluator(poisson2), 0.5, grid=256, richardson=True)
    mu = DrivingMeasure.constant(rho.normalized(), 1.0)
    assert np.max(np.abs(solve_map(mu, 0.5, Z2) - solve_map(poisson2, 0.5, Z2))) < 1e-3


def test_becker_uniform_and_poisson():
    rep = becker_check(DrivingMeasure.uniform(1.0, 64))
    assert rep.kappa_estimate == 0.0
    assert not rep.kappa_at_least_one
    for R in (1.5, 2.0, 4.0):
        rep = becker_check(DrivingMeasure.constant(poisson_density(R, 2048), 1.0))
        assert rep.kappa_estimate == pytest.approx(1 / R, abs=1e-6)


def test_becker_atomic_has_no_constant():
    mu = DrivingMeasure([MeasureSlice(0, 0.1, AtomicSlice.single(0.0))])
    rep = becker_check(mu)
    # The sup over the exterior is 1 but is only approached at the boundary.
    assert rep.kappa_estimate > 1 - 1e-7
    assert math.isinf(rep.entropy_bound)


def test_xlogx_sup():
    assert xlogx_sup(0.0) == 0.0
    assert xlogx_sup(0.2) == pytest.approx(-0.2 * math.log(0.2))
    assert xlogx_sup(1.0) == pytest.approx(math.exp(-1))
    assert xlogx_sup(5.0) == pytest.approx(5 * math.log(5))
