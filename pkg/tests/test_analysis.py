import json
import math

import numpy as np
import pytest

from uemetrics.analysis import (bilipschitz_constant, blowup_slope, certify_alpha_bounds,
                                certify_derivative_chain, certify_scal_positive,
                                exhaustion_pieces, scal_blowup_rate, sobolev_certificate,
                                sobolev_norm)
from uemetrics.certificates import (CERTIFIED, CERTIFIED_ON_GRID, GRID_ONLY, REFUTED,
                                    Certificate, CertificateError)
from uemetrics.construction import (assemble_conical_cap, build_alpha, build_pullback_singularity,
                                    build_rn_counterexample, euclidean_cone, profile_bounds)
from uemetrics.interval import Interval
from uemetrics.spheres import Berger3, LatitudeTwist, Round, ScaledRound
from uemetrics.warped import scal_point

SOB = {"annuli": 24, "dirs": 12}


@pytest.fixture(scope="module")
def cap():
    return assemble_conical_cap(8, Round(7))


def test_cap_certificate(cap):
    c = certify_scal_positive(cap, target=21.0)
    assert c.status == CERTIFIED and c.achieved.lo >= 21.0
    assert c.params["R"] == 9.38 and c.params["lambda_gt_1"] is True
    assert all(e.status == CERTIFIED for e in c.evidence)


def test_cap_certificate_is_sound(cap):
    c = certify_scal_positive(cap, target=21.0)
    t = np.linspace(-9.38, 0.0, 100_001)[1:]
    assert np.min(scal_point(cap, t)) >= c.achieved.lo


def test_derivative_chain_and_alpha_bounds(cap):
    assert all(c.status == CERTIFIED for c in certify_derivative_chain(cap))
    alpha = build_alpha(8, 42.0, 9.38, 0.9375)
    assert all(c.status == CERTIFIED for c in certify_alpha_bounds(alpha, profile_bounds(8, 42.0)))


def test_cone_targets():
    g = euclidean_cone(5)
    ok = certify_scal_positive(g, dom=Interval(0.1, 1.0), target=0.0)
    assert ok.status == CERTIFIED
    bad = certify_scal_positive(g, dom=Interval(0.1, 1.0), target=1.0)
    assert bad.status == REFUTED


def test_exhaustion_pieces():
    g = euclidean_cone(4)
    pieces = exhaustion_pieces(g, g.domain, depth=5)
    assert len(pieces) == 5 and pieces[-1].lo == 2.0**-5 and pieces[0].hi == 1.0
    assert exhaustion_pieces(g, Interval(0.2, 0.5)) == [Interval(0.2, 0.5)]


def test_monotone_in_lambda():
    lows = [certify_scal_positive(assemble_conical_cap(8, Round(7), lam=lam), target=21.0).achieved.lo
            for lam in (9.38, 10.0, 12.0, 15.0, 20.0, 40.0)]
    assert all(b >= a for a, b in zip(lows, lows[1:]))


def test_bilipschitz_examples():
    assert bilipschitz_constant(euclidean_cone(4), samples=256).params["Lambda"] == 1.0
    for c in (4.0, 0.25, 2.5):
        cert = bilipschitz_constant(euclidean_cone(5, ScaledRound(4, c)), samples=256)
        assert cert.params["Lambda"] == pytest.approx(max(c, 1.0 / c), rel=1e-14)
        assert cert.status == CERTIFIED
    b = bilipschitz_constant(euclidean_cone(4, Berger3(0.5, 2.0)), samples=256)
    assert b.params["Lambda"] == 2.0


def test_bilipschitz_twist_and_symmetry():
    g = build_pullback_singularity("sphere", LatitudeTwist(3, 1.3))
    s = build_pullback_singularity("sphere", LatitudeTwist(3, 0.0))
    a = bilipschitz_constant(g, s, samples=2048)
    b = bilipschitz_constant(s, g, samples=2048)
    assert a.params["Lambda"] == pytest.approx(b.params["Lambda"], rel=1e-12)
    assert a.params["Lambda"] > 1.0
    sampled = a.params["relative_eigen"]
    assert a.params["Lambda"] >= max(sampled[1], 1.0 / sampled[0])


def test_bilipschitz_sampled_field():
    gf = build_pullback_singularity("torus", LatitudeTwist(3, 1.3))
    c = gf.info["center"]
    cert = bilipschitz_constant(gf, region={"center": c, "r_min": 0.05, "r_max": 0.45}, samples=500)
    assert cert.method == GRID_ONLY and cert.status == CERTIFIED_ON_GRID
    assert cert.params["Lambda"] > 1.0


def test_sobolev_round_cone_is_finite():
    est = sobolev_norm(euclidean_cone(5), 9.0, **SOB)
    assert est.finite
    cert = sobolev_certificate(euclidean_cone(5), 9.0, **SOB)
    assert cert.status == CERTIFIED_ON_GRID and cert.params["expected"] == "finite"


def test_sobolev_p_sweep():
    g = euclidean_cone(5, ScaledRound(4, 2.0))
    ests = [sobolev_norm(g, p, **SOB) for p in (3.0, 4.0, 4.9, 5.0, 6.0)]
    assert [e.finite for e in ests] == [True, True, True, False, False]
    finite = [e.norm_value for e in ests if e.finite]
    assert all(b >= a for a, b in zip(finite, finite[1:]))
    for p in (4.0, 6.0):
        assert sobolev_certificate(g, p, **SOB).status == CERTIFIED_ON_GRID
    with pytest.raises(ValueError):
        sobolev_norm(g, 0.0)


def test_blowup_slopes():
    g = euclidean_cone(5, ScaledRound(4, 2.0))
    assert blowup_slope(g, 1, dirs=16).slope == pytest.approx(-1.0, abs=0.05)
    assert blowup_slope(g, 2, dirs=16).slope == pytest.approx(-2.0, abs=0.05)
    assert blowup_slope(euclidean_cone(5), 1, dirs=8).status == "undefined-zero-field"
    with pytest.raises(ValueError):
        blowup_slope(g, 3)


def test_scal_rate():
    rate = scal_blowup_rate(build_rn_counterexample(8, ScaledRound(7, 42.0)))
    assert rate.passed and rate.slope == pytest.approx(-2.0, abs=1e-9)
    assert rate.prefactor_min == pytest.approx(42.0)


def test_certificate_roundtrip(cap):
    c = certify_scal_positive(cap, target=21.0)
    d = json.loads(c.to_json())
    back = Certificate.from_dict(d)
    assert back.to_json() == c.to_json()
    assert c.to_json() == certify_scal_positive(cap, target=21.0).to_json()
    assert set(d) >= {"claim", "subject", "params", "domain", "target", "achieved",
                      "method", "depth", "samples", "status", "tool_version"}


def test_certificate_rules():
    with pytest.raises(CertificateError):
        Certificate("x", "y", None, 0.0, Interval(1.0), GRID_ONLY, CERTIFIED)
    with pytest.raises(CertificateError):
        Certificate("x", "y", None, 0.0, Interval(1.0), GRID_ONLY, "MAYBE")
    assert not math.isnan(Certificate("x", "y", None, 0.0, Interval(1.0), GRID_ONLY,
                                      CERTIFIED_ON_GRID).achieved.lo)
