import dataclasses
import math

import numpy as np
import pytest

from uemetrics.blowup import (EXPONENT_TOL, GreenSolverError, blowup_metric, completeness_check,
                              conformal_constant, conformal_identity, default_sigma,
                              dirac_constant, ode_residual, solve_green, sphere_volume,
                              terminal_log_amplitude, verify_green_bounds)
from uemetrics.certificates import CERTIFIED_ON_GRID, REFUTED_ON_GRID
from uemetrics.construction import build_rn_counterexample, euclidean_cone, round_sphere
from uemetrics.profiles import Constant, Power, WarpingProfile
from uemetrics.spheres import ScaledRound


@pytest.fixture(scope="module")
def rn():
    return build_rn_counterexample(8, ScaledRound(7, 42.0))


@pytest.fixture(scope="module")
def green_rn(rn):
    return solve_green(rn)


def test_constants():
    assert conformal_constant(3) == 8.0
    assert sphere_volume(2) == pytest.approx(4 * math.pi)
    assert sphere_volume(3) == pytest.approx(2 * math.pi**2)
    # n = 3: a = 8 and the Euclidean fundamental solution is 1/(4 pi r) / 8
    assert dirac_constant(3) == pytest.approx(1.0 / (32.0 * math.pi))


@pytest.mark.parametrize("n", [3, 4, 5, 8])
def test_flat_green_is_exact_power(n):
    g = euclidean_cone(n)
    G = solve_green(g, sigma=0.0, normalization="unit")
    rel = np.abs(G.values * G.grid ** (n - 2.0) - 1.0)
    assert np.max(rel) <= 1e-8
    assert G.p_fit == pytest.approx(2.0 - n, abs=1e-8)


def test_small_sigma_sits_below_the_power(rn):
    G = solve_green(rn, sigma=0.1, normalization="unit")
    ratio = G.values * G.grid**6.0
    assert np.all(ratio <= 1.0 + 1e-9) and np.all(ratio > 0.0)
    assert abs(G.p_fit + 6.0) <= EXPONENT_TOL


def test_p_fit_and_ode_residual(rn, green_rn):
    assert green_rn.p_fit == pytest.approx(-6.0, abs=1e-4)
    assert ode_residual(green_rn, rn) <= 1e-6
    assert green_rn.kappa == dirac_constant(8)


def test_verify_green_bounds_constant():
    g = euclidean_cone(5)
    G = solve_green(g, sigma=0.0, normalization="unit")
    cert = verify_green_bounds(G)
    assert cert.status == CERTIFIED_ON_GRID and cert.params["c"] == pytest.approx(1.0, abs=1e-8)
    doubled = dataclasses.replace(G, values=2.0 * G.values)
    assert verify_green_bounds(doubled).params["c"] == pytest.approx(2.0, rel=1e-8)
    drifted = dataclasses.replace(G, p_fit=-2.5)
    assert verify_green_bounds(drifted).status == REFUTED_ON_GRID


def test_solver_input_errors(rn):
    with pytest.raises(ValueError):
        solve_green(rn, sigma=5.0)
    with pytest.raises(ValueError):
        solve_green(rn, normalization="weird")
    with pytest.raises(ValueError):
        solve_green(rn, grid=np.array([1.0, 0.5]))
    with pytest.raises(ValueError):
        solve_green(rn, grid=np.array([1.0, 1e3]))
    collar = euclidean_cone(4)
    shifted = dataclasses.replace(collar, domain=collar.domain + 1.0)
    with pytest.raises(ValueError):
        solve_green(shifted, sigma=0.0)
    assert issubclass(GreenSolverError, RuntimeError)


def test_default_sigma(rn, green_rn):
    assert default_sigma(rn, green_rn.grid) == pytest.approx(0.5 * 42.0 / (2 * math.sqrt(84.0)) ** 2)


def test_eps_zero_is_unchanged(rn, green_rn):
    assert blowup_metric(rn, green_rn, 0.0) is rn
    with pytest.raises(ValueError):
        blowup_metric(rn, green_rn, -1.0)


def test_completeness_verdicts():
    n = 4
    g = euclidean_cone(n)
    one = WarpingProfile.single(Constant(1.0), g.domain, label="u")
    assert completeness_check(g.with_conformal(one)).verdict == "FAIL"
    assert completeness_check(g).verdict == "FAIL"
    u = WarpingProfile.single(Power(1.0, 2.0 - n, 1.0, 0.0), g.domain, label="u")
    rep = completeness_check(g.with_conformal(u))
    assert rep.verdict == "PASS" and rep.slope == pytest.approx(-1.0, abs=0.05)
    assert np.all(np.diff(rep.lengths) > 0)


@pytest.mark.parametrize("eps", [1e-3, 1e-2, 1e-1, 1.0, 10.0])
def test_blowup_identity_and_positivity(rn, green_rn, eps):
    r, lhs, rhs, rel = conformal_identity(rn, green_rn, eps)
    assert np.max(rel) <= 1e-5
    assert np.min(lhs) > 0.0
    assert completeness_check(blowup_metric(rn, green_rn, eps)).verdict == "PASS"


def test_identity_on_round_sphere_model():
    g = round_sphere(5)
    grid = np.logspace(-4, math.log10(math.pi / 2), 200)
    G = solve_green(g, sigma=0.5, grid=grid)
    _, lhs, _, rel = conformal_identity(g, G, 0.1)
    assert np.max(rel) <= 1e-5 and np.min(lhs) > 0.0


def test_rk4_order(rn):
    a = [terminal_log_amplitude(rn, 0.1, s) for s in (50, 100, 200, 400)]
    orders = [math.log2(abs(a[i] - a[i + 1]) / abs(a[i + 1] - a[i + 2])) for i in range(2)]
    assert min(orders) >= 3.5
