import math

import numpy as np
import pytest

from uemetrics.construction import (ConstructionError, InfeasibleError, LambdaError,
                                    PscRequiredError, assemble_conical_cap, build_alpha, build_f,
                                    build_pullback_singularity, build_rn_counterexample,
                                    default_parameters, lambda_min, min_feasible_length,
                                    profile_bounds, rn_lambda, round_sphere)
from uemetrics.interval import Interval
from uemetrics.oracle import scal_fd
from uemetrics.spheres import Berger3, Identity, LatitudeTwist, Round, ScaledRound
from uemetrics.warped import scal_point, scal_warped


def test_profile_bounds_examples():
    b = profile_bounds(8, 42.0)
    assert b.slope_bound == 0.25 and b.curvature_bound == 0.75
    b3 = profile_bounds(3, 2.0)
    assert b3.slope_bound == pytest.approx(0.25) and b3.curvature_bound == pytest.approx(0.125)
    with pytest.raises(ConstructionError):
        profile_bounds(2, 1.0)
    with pytest.raises(ConstructionError):
        profile_bounds(5, 0.0)


def test_min_length_and_defaults():
    assert min_feasible_length(profile_bounds(8, 42.0)) == 7.5
    d = default_parameters(8, 42.0)
    assert d == {"L_min": 7.5, "eps": 0.9375, "R": 9.38, "lambda": 9.38}


def test_lambda_min():
    assert lambda_min(3, 2.0, 4.0) == 4.0
    assert lambda_min(8, 42.0, 2.0) == pytest.approx(2.0 * math.sqrt(4.0))
    assert lambda_min(8, 42.0, 9.38) == 9.38


def test_infeasible_parameters():
    with pytest.raises(InfeasibleError) as exc:
        build_alpha(8, 42.0, 2.0, 0.1)
    assert exc.value.min_length == 7.5
    assert exc.value.hints["R_min"] == pytest.approx(7.7)
    with pytest.raises(ConstructionError):
        build_alpha(8, 42.0, 0.5, 0.1)
    with pytest.raises(ConstructionError):
        build_alpha(8, 42.0, 10.0, 0.0)
    alpha = build_alpha(8, 42.0, 9.38, 0.9375)
    with pytest.raises(LambdaError) as exc:
        build_f(alpha, 9.38, 5.0)
    assert exc.value.lambda_min == 9.38


def test_psc_required():
    with pytest.raises(PscRequiredError):
        assemble_conical_cap(4, Berger3(5.0, 1.0))
    with pytest.raises(ConstructionError):
        assemble_conical_cap(5, Round(3))
    with pytest.raises(ConstructionError):
        build_rn_counterexample(5, ScaledRound(4, 100.0))


@pytest.fixture(scope="module")
def cap():
    return assemble_conical_cap(8, Round(7))


def test_cap_info(cap):
    info = cap.info
    assert (info["R"], info["eps"], info["lambda"]) == (9.38, 0.9375, 9.38)
    assert info["lambda_gt_1"] and info["C"] == 42.0
    assert cap.domain == Interval(-9.38, 0.0)


def test_boundary_values(cap):
    f, R, lam = cap.f, 9.38, 9.38
    assert f.evaluate(-R, 0) == pytest.approx(0.0, abs=1e-15)
    assert f.evaluate(-R, 1) == pytest.approx(1.0 / lam)
    assert f.evaluate(0.0, 0) == 1.0
    assert f.evaluate(0.0, 1) == 0.0 and f.evaluate(0.0, 2) == 0.0
    assert cap.singular_left and not cap.singular_right


def test_alpha_profile():
    alpha = build_alpha(8, 42.0, 9.38, 0.9375)
    b = profile_bounds(8, 42.0)
    t = np.linspace(-9.38, 0.0, 20001)
    a0, a1, a2 = (alpha.evaluate(t, k) for k in range(3))
    assert a0[0] == 1.0 and a0[-1] == 0.0
    assert np.all(np.diff(a0) <= 1e-15)
    assert np.max(np.abs(a1)) <= b.slope_bound and np.max(np.abs(a2)) <= b.curvature_bound
    assert alpha.enclose(Interval(-9.38, 0.0), 1).mag <= b.slope_bound * (1 + 1e-9) + 1e-3


def test_derivative_chain_at_knots(cap):
    """f is C^2 across the knots."""
    for knot in cap.f.knots:
        for k in range(3):
            left, right = cap.f.evaluate(knot - 1e-9, k), cap.f.evaluate(knot + 1e-9, k)
            assert left == pytest.approx(right, abs=1e-6)


def test_f_range(cap):
    t = np.linspace(-9.38 + 1e-6, 0.0, 5001)
    f = cap.f.evaluate(t, 0)
    assert np.all(f > 0.0) and np.all(f <= 1.0)


@pytest.mark.parametrize("lam", [9.38, 12.0, 40.0])
def test_cap_scal_above_half_C(cap, lam):
    g = assemble_conical_cap(8, Round(7), lam=lam)
    t = np.linspace(-9.3, -0.01, 3000)
    assert np.min(scal_point(g, t)) >= 21.0


def test_rn_construction():
    assert rn_lambda(8) == pytest.approx(math.sqrt(84.0))
    g = build_rn_counterexample(8, ScaledRound(7, 42.0))
    assert g.info["lambda"] == pytest.approx(9.16515139)
    assert scal_warped(g, Interval(2.0)).contains(10.5)


def test_pullback_identity_is_round_sphere():
    g = build_pullback_singularity("sphere", Identity(3))
    s = round_sphere(4)
    t = np.linspace(0.2, 2.9, 30)
    assert np.allclose(scal_point(g, t), scal_point(s, t))


def test_pullback_errors():
    with pytest.raises(ConstructionError):
        build_pullback_singularity("torus", Identity(3))
    with pytest.raises(ConstructionError):
        build_pullback_singularity("klein", LatitudeTwist(3, 1.0))


def test_torus_field_is_flat():
    gf = build_pullback_singularity("torus", LatitudeTwist(3, 1.3))
    c = np.full(4, math.pi)
    rng = np.random.default_rng(0)
    for _ in range(10):
        d = rng.standard_normal(4)
        x = c + rng.uniform(0.2, 1.3) * d / np.linalg.norm(d)
        assert abs(scal_fd(gf, x)) <= 1e-6
    # the identity outside the unit ball and for the trivial twist
    far = c + np.array([1.5, 0.0, 0.0, 0.0])
    assert np.allclose(gf(far), np.eye(4), atol=1e-15)
    trivial = build_pullback_singularity("torus", LatitudeTwist(3, 0.0))
    assert np.allclose(trivial(c + 0.3), np.eye(4), atol=1e-14)
