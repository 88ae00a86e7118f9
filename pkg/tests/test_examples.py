import math

import numpy as np
import pytest
from scipy.integrate import quad

from lklab.errors import InvalidInputError
from lklab.examples import (
    NamedChain,
    alpha,
    alpha_prime,
    beta,
    cusp_diagnostic,
    example_entropy_integral,
    example_total_entropy,
    poisson_entropy,
    tangent_entropies,
)
from lklab.lk_solver import solve_map
from lklab.measures import slice_entropy

SMOOTH = [
    ("orthogonal-disks", {}),
    ("tangent-disks", {}),
    ("poisson-const", {"R": 2.0}),
    ("poisson-var", {"family": "sqrt"}),
    ("poisson-var", {"family": "inverse"}),
    ("pacman", {"eps": 0.3}),
]


@pytest.mark.parametrize("name,params", SMOOTH)
@pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
def test_slices_have_unit_mass(name, params, t):
    ch = NamedChain(name, params)
    mass = quad(lambda th: float(ch.density(t, th)), -np.pi, np.pi, limit=400, points=[0.0])[0]
    assert mass == pytest.approx(1.0, abs=1e-7)
    cdf = ch.cdf(t)
    assert float(cdf(np.pi) - cdf(-np.pi)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("name,params", SMOOTH)
def test_cdf_derivative_is_density(name, params):
    ch = NamedChain(name, params)
    th = np.linspace(-3.0, 3.0, 37) + 0.013
    h = 1e-6
    fd = (ch.cdf(0.5)(th + h) - ch.cdf(0.5)(th - h)) / (2 * h)
    assert np.allclose(fd, ch.density(0.5, th), atol=1e-6)


def test_tangent_time_change():
    assert alpha(math.log(math.pi / 2)) == pytest.approx(0.5, abs=1e-14)
    for t in (1e-6, 0.1, 1.0, 3.0):
        assert math.log(beta(alpha(t))) == pytest.approx(t, rel=1e-12)
    h = 1e-6
    assert alpha_prime(0.7) == pytest.approx((alpha(0.7 + h) - alpha(0.7 - h)) / (2 * h), rel=1e-7)


@pytest.mark.parametrize("name,params", [("orthogonal-disks", {}), ("tangent-disks", {}), ("pacman", {"eps": 0.4})])
def test_closed_form_map_matches_solver(name, params):
    ch = NamedChain(name, params)
    z = 2.0 * np.exp(2j * np.pi * np.arange(16) / 16)
    f = solve_map(ch.driver(0.5, 2048), 0.5, z)
    if name == "pacman":
        assert np.all(np.abs(f) > 2)
        return
    assert np.max(np.abs(f - ch.map(0.5, z))) < 1e-5


def _distance_to_hull_boundary(w, center, radius):
    return np.minimum(np.abs(np.abs(w) - 1), np.abs(np.abs(w - center) - radius))


def test_orthogonal_geometry():
    t = 0.7
    E = math.exp(t)
    w = NamedChain("orthogonal-disks").map(t, np.exp(1j * np.linspace(0, 2 * np.pi, 513)))
    assert np.max(_distance_to_hull_boundary(w, E, math.sqrt(E * E - 1))) < 1e-12
    # The disc meets the unit circle at right angles.
    assert 1 + (E * E - 1) == pytest.approx(E * E)


def test_tangent_geometry_at_half():
    t = math.log(math.pi / 2)
    w = NamedChain("tangent-disks").map(t, np.exp(1j * np.linspace(0.001, 2 * np.pi - 0.001, 512)))
    assert np.max(_distance_to_hull_boundary(w, 2.0, 1.0)) < 1e-12
    assert np.max(w.real) == pytest.approx(3.0, abs=1e-4)


def test_capacity_of_closed_forms():
    for name in ("orthogonal-disks", "tangent-disks"):
        f = NamedChain(name).map(0.4, np.array([1e7]))
        assert abs(f[0] / 1e7) == pytest.approx(math.exp(0.4), rel=1e-6)


@pytest.mark.parametrize("name,t", [("orthogonal-disks", 0.3), ("orthogonal-disks", 1.0),
                                    ("tangent-disks", 0.3), ("tangent-disks", 1.0)])
def test_slice_entropy_against_fine_grid(name, t):
    ch = NamedChain(name)
    fine = slice_entropy(ch.circle_density(t, 2**16, "cell"))
    assert ch.slice_entropy(t) == pytest.approx(fine, abs=1e-4)


@pytest.mark.parametrize("R", [1.5, 2.0, 4.0])
def test_poisson_entropy_integral_form(R):
    a = (R - 1) / (R + 1)
    b = 4 * R / (R * R - 1)

    def g(y):
        v = 1.0 / (a + b * y)
        return v * math.log(v)

    val = quad(g, 0, 1, weight="alg", wvar=(-0.5, -0.5))[0] / math.pi
    assert val == pytest.approx(poisson_entropy(R), abs=1e-10)


def test_poisson_entropy_decreasing_in_R():
    Rs = np.linspace(1.01, 20, 50)
    h = [poisson_entropy(R) for R in Rs]
    assert np.all(np.diff(h) < 0)
    assert poisson_entropy(math.inf) == 0.0


def test_entropy_totals_are_mesh_stable():
    for name in ("orthogonal-disks", "tangent-disks"):
        res = example_entropy_integral(name)
        assert not res.diverging
        assert math.isfinite(res.value)
        assert res.mesh_change < 1e-3


def test_poisson_const_total():
    assert example_total_entropy("poisson-const", {"R": 2.0}) == pytest.approx(math.log(4 / 3), abs=1e-12)


def test_inverse_family_total_matches_antiderivative():
    # h(t) = -log(1 - t^2) integrates to 2 - 2 log 2 on [0, 1].
    H = example_total_entropy("poisson-var", {"family": "inverse"})
    assert H == pytest.approx(2 - 2 * math.log(2), abs=1e-6)


def test_exp_family_diverges():
    res = example_entropy_integral("poisson-var", {"family": "exp"})
    assert res.diverging
    assert math.isinf(res.value)


def test_pacman_entropy_is_linear_in_eps():
    ratios = [example_total_entropy("pacman", {"eps": e}) / e for e in (0.1, 0.05, 0.025)]
    assert max(ratios) / min(ratios) - 1 < 0.05
    assert ratios[-1] == pytest.approx(1 / math.pi, rel=0.01)


def test_tangent_entropies_relation():
    d = tangent_entropies()
    assert d["invariant"] == d["capacity_parametrized"]
    assert d["plain"] == pytest.approx(d["invariant"] - d["log_alpha_prime_integral"])


def test_invalid_parameters():
    with pytest.raises(InvalidInputError):
        NamedChain("nope")
    with pytest.raises(InvalidInputError):
        NamedChain("poisson-const", {"R": 0.5})
    with pytest.raises(InvalidInputError):
        NamedChain("orthogonal-disks").density(0.0, 0.0)
    with pytest.raises(InvalidInputError):
        NamedChain("poisson-var", {"family": "sqrt"}).density(1.0, 0.0)


def test_cusp_diagnostic():
    cd = cusp_diagnostic()
    assert abs(cd.compensated_plus[-1]) < 0.05
    assert abs(cd.compensated_minus[-1]) < 0.05
    assert abs(cd.arg_plus[-1] - math.pi) < 0.05
    # One-sided arguments differ by 2 pi across the cusp.
    assert abs(cd.arg_plus[-1] - cd.arg_minus[-1]) < 0.1 or abs(abs(cd.arg_plus[-1] - cd.arg_minus[-1]) - 2 * math.pi) < 0.1
    assert np.all(np.isfinite(np.abs(cd.q_values)))
