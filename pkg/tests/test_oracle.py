import math

import numpy as np
import pytest

from uemetrics.cases import CASE_BUILDERS, build_cases
from uemetrics.construction import euclidean_cone, round_sphere
from uemetrics.oracle import (MetricField, OracleError, christoffel, compare_closed_form,
                              convergence_order, euclidean_field, mean_curvature_fd,
                              metric_derivatives, relative_deviation, scal_fd)
from uemetrics.spheres import (LatitudeTwist, Pullback, Round, ScaledRound, chart_transition,
                               metric_matrix_at)
from uemetrics.warped import metric_field


def _conformal_exp(dim):
    """e^{2 x^1} delta: Gamma^1_11 = 1 and scal = 0 in dimension 2."""
    def batch(X):
        w = np.exp(2.0 * X[:, 0])
        return w[:, None, None] * np.eye(dim)
    return MetricField(dim, batch, name="exp")


def test_euclidean_christoffel_vanish():
    gf = euclidean_field(4)
    x = np.array([0.1, -0.3, 0.7, 2.0])
    assert np.array_equal(christoffel(gf, x, 0.01), np.zeros((4, 4, 4)))
    assert scal_fd(gf, x, 0.01) == 0.0


def test_exponential_christoffel():
    gf = _conformal_exp(2)
    x = np.array([0.2, -0.4])
    gam = christoffel(gf, x, 0.01)
    # Gamma^1_11 = 1, Gamma^1_22 = -1, Gamma^2_12 = Gamma^2_21 = 1
    want = np.zeros((2, 2, 2))
    want[0, 0, 0] = 1.0
    want[0, 1, 1] = -1.0
    want[1, 0, 1] = want[1, 1, 0] = 1.0
    assert np.allclose(gam, want, atol=1e-8)
    assert abs(scal_fd(gf, x, 0.01)) < 1e-6


def test_christoffel_symmetry():
    g = euclidean_cone(4, ScaledRound(3, 2.0))
    gam = christoffel(metric_field(g), np.array([0.3, 0.2, -0.1, 0.4]))
    assert np.array_equal(gam, np.swapaxes(gam, 1, 2))


def test_scaled_cone_closed_form():
    """Cone over c h_round at |x| = 1 has scal (n-1)(n-2)(1/c - 1)."""
    n, c = 8, 2.0
    g = euclidean_cone(n, ScaledRound(n - 1, c), T=2.0)
    rng = np.random.default_rng(0)
    for _ in range(3):
        d = rng.standard_normal(n)
        x = d / np.linalg.norm(d)
        assert scal_fd(metric_field(g), x) == pytest.approx(42.0 * (1.0 / c - 1.0), rel=1e-6)


def test_step_halving_order():
    g = round_sphere(4)
    gf = metric_field(g)
    x = np.array([0.5, 0.4, -0.3, 0.6])
    assert convergence_order(gf, x, 0.2) >= 3.5


def test_chart_invariance():
    """The same sphere metric read in the N and S charts gives the same scal."""
    h = Pullback(LatitudeTwist(3, 1.3), Round(3))
    gn = MetricField(3, lambda U: metric_matrix_at(h, "N", U))
    gs = MetricField(3, lambda U: metric_matrix_at(h, "S", U))
    u = np.array([0.6, -0.5, 0.7])
    v, _ = chart_transition(u[None, :])
    a, b = scal_fd(gn, u, 0.01), scal_fd(gs, v[0], 0.01)
    assert a == pytest.approx(b, rel=1e-6) and a == pytest.approx(6.0, rel=1e-6)


def test_mean_curvature_fd():
    gf = euclidean_field(4)
    level = lambda p: np.linalg.norm(p, axis=-1)  # noqa: E731
    x = np.array([0.0, 0.6, 0.0, 0.8])
    assert mean_curvature_fd(gf, x, level, 0.05) == pytest.approx(3.0, rel=1e-6)
    g = round_sphere(5)
    x = np.array([math.pi / 2, 0, 0, 0, 0])
    assert abs(mean_curvature_fd(metric_field(g), x, level, 0.02)) < 1e-6


def test_errors():
    gf = metric_field(euclidean_cone(3))
    with pytest.raises(OracleError):
        metric_derivatives(gf, np.array([0.01, 0.0, 0.0]), 0.01)
    with pytest.raises(OracleError):
        metric_derivatives(gf, np.array([0.5, 0.0]), 0.01)
    with pytest.raises(OracleError):
        metric_derivatives(gf, np.array([0.5, 0.0, 0.0]), 0.0)
    degenerate = MetricField(2, lambda X: np.zeros((len(X), 2, 2)))
    with pytest.raises(OracleError):
        metric_derivatives(degenerate, np.zeros(2), 0.1)


def test_relative_deviation():
    assert relative_deviation(1.0, 1.0) == 0.0
    assert relative_deviation(1e-9, 0.0) == 1e-9
    assert relative_deviation(101.0, 100.0) == pytest.approx(0.01)


def test_compare_closed_form_report():
    g = round_sphere(3)
    rep = compare_closed_form(metric_field(g), lambda x: 6.0, [np.array([1.0, 0.2, 0.1])])
    assert rep.passed and rep.verdict == "PASS" and rep.points == 1
    bad = compare_closed_form(metric_field(g), lambda x: 7.0, [np.array([1.0, 0.2, 0.1])])
    assert bad.verdict == "FAIL"


def test_build_cases():
    names = [c.name for c in build_cases()]
    assert len(names) == len(set(names)) >= 10
    assert len(build_cases("conformal")) == 2
    with pytest.raises(ValueError):
        build_cases("nope")
    assert set(CASE_BUILDERS) >= {"flat-cone", "sine", "torus-flat"}


@pytest.mark.parametrize("case", build_cases(), ids=lambda c: c.name)
def test_builtin_cases_pass(case):
    rep = case.run(points=12, seed=3)
    assert rep.passed, (case.name, rep.max_rel)
