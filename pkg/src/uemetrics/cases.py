"""Built-in closed-form versus finite-difference comparisons.

Each case pairs a coordinate metric field with an independent closed-form
scalar curvature and a sampler of admissible points (away from tips, knots
and the edge of the model).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .construction import (assemble_conical_cap, build_pullback_singularity,
                           build_rn_counterexample, euclidean_cone, round_sphere)
from .interval import Interval
from .oracle import PASS_TOL, MetricField, OracleReport, compare_closed_form
from .profiles import Power, WarpingProfile
from .spheres import Berger3, LatitudeTwist, Round, ScaledRound
from .warped import WarpedMetric, metric_field, scal_conformal, scal_point


@dataclass(frozen=True)
class OracleCase:
    name: str
    field: MetricField
    closed: Callable
    sampler: Callable  # (count, rng) -> (count, dim) points
    tol: float = PASS_TOL

    def run(self, points: int = 40, seed: int = 0, tol: float | None = None) -> OracleReport:
        rng = np.random.default_rng(seed)
        pts = self.sampler(points, rng)
        return compare_closed_form(self.field, self.closed, pts, name=self.name,
                                   tol=self.tol if tol is None else tol)


def _shell_sampler(dim, r_lo, r_hi, center=None, avoid=()):
    """Uniform directions, radii uniform in [r_lo, r_hi] away from ``avoid``."""
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)

    def sample(count, rng):
        out = []
        while len(out) < count:
            d = rng.standard_normal(dim)
            d /= np.linalg.norm(d)
            r = rng.uniform(r_lo, r_hi)
            if any(abs(r - a) < w for a, w in avoid):
                continue
            out.append(c + r * d)
        return np.array(out)

    return sample


def _warped_case(name, g: WarpedMetric, r_lo, r_hi, avoid=(), tol=PASS_TOL):
    tip = g.origin

    def closed(x):
        t = float(np.linalg.norm(x)) + tip
        if g.conformal is not None:
            return scal_conformal(g, Interval(t)).mid
        return float(scal_point(g, np.array([t]))[0])

    return OracleCase(name, metric_field(g), closed, _shell_sampler(g.n, r_lo, r_hi, avoid=avoid), tol)


def _knots_avoid(g: WarpedMetric, width):
    return tuple((k - g.origin, width) for k in g.f.knots)


def flat_cone_case():
    return _warped_case("flat-cone", euclidean_cone(5), 0.1, 0.95)


def sine_case():
    return _warped_case("sine", round_sphere(4), 0.3, math.pi - 0.3)


def cap_case():
    g = assemble_conical_cap(8, Round(7))
    R = g.info["R"]
    return _warped_case("cap", g, 0.2, R - 0.1, avoid=_knots_avoid(g, 0.05))


def scaled_cone_case():
    return _warped_case("scaled-cone", euclidean_cone(5, ScaledRound(4, 2.5)), 0.2, 0.95)


def berger_case():
    return _warped_case("berger", euclidean_cone(4, Berger3(0.7, 1.2)), 0.3, 0.95)


def conformal_cases():
    """u = 1 + t^{2-n} on the flat cone (harmonic, scal 0) and u = 1 + t^2/5 on sine."""
    n = 4
    cone = euclidean_cone(n)
    u1 = WarpingProfile.single(Power(1.0, 2.0 - n, 1.0, 0.0), cone.domain, label="u")
    sine = round_sphere(n)
    u2 = WarpingProfile.single(Power(0.2, 2.0, 1.0, 0.0), sine.domain, label="u")
    return [_warped_case("conformal-harmonic", cone.with_conformal(u1), 0.2, 0.95),
            _warped_case("conformal-sine", sine.with_conformal(u2), 0.3, math.pi - 0.3)]


def exotic_pullback_case(theta: float = 1.3):
    g = build_pullback_singularity("sphere", LatitudeTwist(3, theta))
    return _warped_case("exotic-pullback", g, 0.3, math.pi - 0.3)


def torus_flat_case(theta: float = 1.3):
    f = LatitudeTwist(3, theta)
    gf = build_pullback_singularity("torus", f)
    c = np.asarray(gf.info["center"])
    return OracleCase("torus-flat", gf, lambda x: 0.0, _shell_sampler(4, 0.1, 1.4, center=c))


def rn_case():
    n = 8
    g = build_rn_counterexample(n, ScaledRound(n - 1, float((n - 1) * (n - 2))))
    return _warped_case("rn", g, 0.2, 10.0)


CASE_BUILDERS = {
    "flat-cone": lambda: [flat_cone_case()],
    "sine": lambda: [sine_case()],
    "cap": lambda: [cap_case()],
    "scaled-cone": lambda: [scaled_cone_case()],
    "berger": lambda: [berger_case()],
    "conformal": conformal_cases,
    "exotic-pullback": lambda: [exotic_pullback_case()],
    "torus-flat": lambda: [torus_flat_case()],
    "rn": lambda: [rn_case()],
}


def build_cases(name: str = "all"):
    if name == "all":
        return [c for b in CASE_BUILDERS.values() for c in b()]
    if name not in CASE_BUILDERS:
        raise ValueError(f"unknown oracle case {name!r}")
    return CASE_BUILDERS[name]()
