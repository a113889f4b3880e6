import json
import math

import numpy as np
import pytest

from xsect.errors import BudgetExceeded
from xsect.sections import build_continuous_section, build_discrete_section, derive_discrete_section
from xsect.shaping import to_finite_measure
from xsect.verify import check_continuous_tiling, check_discrete_tiling, jacobian_check, orbit_integral

from conftest import DIAG21, SHEAR, SPIRAL


def gaussian_density(x):
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    return math.exp(-float(x @ x) / 2.0) / (2 * math.pi) ** (n / 2)


def case4_generator(beta=math.pi):
    om = np.array([[0.0, beta], [-beta, 0.0]])
    return np.block([[om, np.eye(2)], [np.zeros((2, 2)), om]])


def test_discrete_tiling_pass_1d():
    report = check_discrete_tiling(build_discrete_section([[2.0]]), samples=5000, seed=11)
    assert report.passed
    assert report.histogram == {1: 5000}


def test_discrete_tiling_detects_gaps():
    # the dyadic interval pair does not tile under A = 3: some orbits skip
    # it entirely, others hit twice
    class Candidate:
        matrix = np.array([[3.0]])

        def membership(self, pts):
            a = np.abs(np.asarray(pts)[:, 0])
            return (a >= 1.0) & (a < 2.0), np.zeros(len(pts), dtype=bool)

    report = check_discrete_tiling(Candidate(), samples=3000, seed=11)
    assert not report.passed
    assert 0 in report.histogram or 2 in report.histogram


def test_discrete_tiling_orthogonal_probe():
    # a rotation preserves norms, so a bounded positive-measure candidate
    # is hit a bounded-away-from-one number of times on most orbits
    class Annulus:
        matrix = np.array([[0.0, 1.0], [-1.0, 0.0]])

        def membership(self, pts):
            r = np.linalg.norm(np.asarray(pts), axis=1)
            return (r >= 0.5) & (r < 1.5), np.zeros(len(pts), dtype=bool)

    report = check_discrete_tiling(Annulus(), samples=2000, seed=13)
    assert not report.passed
    hit = sum(c for m, c in report.histogram.items() if m >= 1)
    wrong = sum(c for m, c in report.histogram.items() if m >= 2)
    assert wrong >= 0.99 * hit


def test_discrete_tiling_shaped_section():
    shaped = to_finite_measure(build_discrete_section(DIAG21))
    report = check_discrete_tiling(shaped, samples=4000, seed=17)
    assert report.passed


def test_discrete_tiling_heavy_tail_widening():
    report = check_discrete_tiling(build_discrete_section(SHEAR), samples=5000, seed=19)
    assert report.passed
    assert report.scan["outlier_windows"] > 0


@pytest.mark.parametrize(
    "generator",
    [
        [[math.log(2.0)]],
        [[1.0, 2 * math.pi], [-2 * math.pi, 1.0]],
        [[0.0, 1.0], [0.0, 0.0]],
        case4_generator(),
    ],
    ids=["scaling", "rotating", "shear", "rotating_shear"],
)
def test_continuous_tiling(generator):
    section = build_continuous_section(generator)
    report = check_continuous_tiling(section, samples=2000, seed=23, grid_subsample=40)
    assert report.passed
    assert report.extras["max_length_deviation"] <= 1e-6
    assert set(report.histogram) == {1}


def test_report_json_is_deterministic():
    s = build_discrete_section(SPIRAL)
    a = check_discrete_tiling(s, samples=2000, seed=5).to_json()
    b = check_discrete_tiling(s, samples=2000, seed=5).to_json()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    c = check_discrete_tiling(s, samples=2000, seed=6).to_json()
    assert json.dumps(a, sort_keys=True) != json.dumps(c, sort_keys=True)


@pytest.mark.parametrize(
    "generator",
    [
        [[math.log(2.0), 1.0], [0.0, math.log(2.0)]],
        [[1.0, 2 * math.pi], [-2 * math.pi, 1.0]],
        [[0.0, 1.0], [0.0, 0.0]],
    ],
    ids=["scaling_chain", "rotating", "shear"],
)
def test_orbit_integral_gaussian_2d(generator):
    section = build_continuous_section(generator)
    value = orbit_integral(gaussian_density, section, decay_radius=8.0)
    assert abs(value - 1.0) < 0.01


def test_orbit_integral_gaussian_4d():
    section = build_continuous_section(case4_generator())
    value = orbit_integral(gaussian_density, section, decay_radius=7.0, epsabs=1e-4, epsrel=1e-4)
    assert abs(value - 1.0) < 0.01


def test_orbit_integral_indicator_1d():
    # weight |alpha| delta^t with alpha = ln 2 reproduces the interval length
    section = build_continuous_section([[math.log(2.0)]])

    def indicator(x):
        return 1.0 if 1.0 <= x[0] < 2.0 else 0.0

    value = orbit_integral(indicator, section, decay_radius=4.0, epsabs=1e-6, epsrel=1e-6)
    assert abs(value - 1.0) < 0.01


def test_orbit_integral_zero_field():
    section = build_continuous_section([[math.log(2.0)]])
    assert orbit_integral(lambda x: 0.0, section, decay_radius=4.0) == 0.0


def test_orbit_integral_budget():
    section = build_continuous_section([[1.0, 2 * math.pi], [-2 * math.pi, 1.0]])
    with pytest.raises(BudgetExceeded):
        orbit_integral(gaussian_density, section, decay_radius=8.0, budget=100)


@pytest.mark.parametrize(
    "generator, expect_sign",
    [
        ([[math.log(2.0), 1.0], [0.0, math.log(2.0)]], +1),
        ([[1.0, 2 * math.pi], [-2 * math.pi, 1.0]], -1),
        ([[0.0, 1.0], [0.0, 0.0]], -1),
        (case4_generator(), -1),
    ],
    ids=["scaling_chain", "rotating", "shear", "rotating_shear"],
)
def test_jacobian_check(generator, expect_sign):
    section = build_continuous_section(generator)
    assert jacobian_check(section, points=100, seed=7) <= 1e-6


def test_jacobian_closed_form_shear_value():
    # at (t, s) = (2, 1.5) the closed form is -s * delta^t = -1.5
    section = build_continuous_section([[0.0, 1.0], [0.0, 0.0]])
    trace = 0.0
    s = 1.5
    assert abs(-s * math.exp(trace * 2.0) - (-1.5)) < 1e-15
    assert jacobian_check(section, points=5, seed=1) <= 1e-6


def test_jacobian_closed_form_rotating_shear_value():
    # at (t, p, q, s) = (0.3, 1, 0.5, 0): -beta p delta^t = -pi
    beta = math.pi
    assert abs(-beta * 1.0 * math.exp(0.0) - (-math.pi)) < 1e-15
    section = build_continuous_section(case4_generator(beta))
    assert jacobian_check(section, points=5, seed=2) <= 1e-6


def test_continuous_tiling_on_derived_discrete_sum(rng):
    # the swept section also tiles discretely: Calderon sum equals 1
    for gen in ([[math.log(2.0)]], [[1.0, 2 * math.pi], [-2 * math.pi, 1.0]]):
        t = derive_discrete_section(build_continuous_section(gen))
        report = check_discrete_tiling(t, samples=3000, seed=29)
        assert report.passed


def test_orbit_integral_vs_monte_carlo_oracle():
    # independent oracle: plain Monte Carlo integration of the same field
    section = build_continuous_section([[1.0, 2 * math.pi], [-2 * math.pi, 1.0]])
    value = orbit_integral(gaussian_density, section, decay_radius=8.0)
    rng = np.random.default_rng(31)
    box = 8.0
    pts = rng.uniform(-box, box, size=(1_000_000, 2))
    mc = float(np.mean(np.exp(-np.sum(pts**2, axis=1) / 2.0))) / (2 * math.pi) * (2 * box) ** 2
    assert abs(value - mc) <= 0.01 * max(abs(mc), 1.0)
