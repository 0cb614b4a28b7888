"""Explicit singular metrics: conical caps, the R^n metric and cone pullbacks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .interval import Interval
from .oracle import MetricField
from .profiles import (Blend, Constant, Descent, Linear, Sine, WarpingProfile,
                       get_template)
from .spheres import (LatitudeTwist, Pullback, Round, SphereDiffeo, SphereMetric,
                      scal_range)
from .warped import WarpedMetric


class ConstructionError(ValueError):
    pass


class InfeasibleError(ConstructionError):
    """(R, eps) leaves too little room for the transition profile."""

    def __init__(self, msg, min_length, **hints):
        self.min_length = min_length
        self.hints = hints
        super().__init__(msg)


class LambdaError(ConstructionError):
    def __init__(self, msg, lambda_min):
        self.lambda_min = lambda_min
        super().__init__(msg)


class PscRequiredError(ConstructionError):
    pass


@dataclass(frozen=True)
class ProfileBounds:
    slope_bound: float
    curvature_bound: float

    def __post_init__(self):
        if not (self.slope_bound > 0.0 and self.curvature_bound > 0.0):
            raise ConstructionError("profile bounds must be positive")


def profile_bounds(n: int, C: float) -> ProfileBounds:
    """Admissible |alpha'| and |alpha''| for a boundary metric with scal >= C."""
    if n < 3 or not C > 0.0:
        raise ConstructionError("need n >= 3 and C > 0")
    return ProfileBounds(0.5 * math.sqrt(C / (4.0 * (n - 1) * (n - 2))), C / (8.0 * (n - 1)))


def min_feasible_length(bounds: ProfileBounds, template: str = "quintic") -> float:
    """Shortest descent length L with A1/L <= slope and A2/L^2 <= curvature."""
    tpl = get_template(template)
    return max(tpl.a1 / bounds.slope_bound, math.sqrt(tpl.a2 / bounds.curvature_bound))


def lambda_min(n: int, C: float, R: float) -> float:
    return max(R, 2.0 * math.sqrt(4.0 * (n - 1) * (n - 2) / C))


def default_parameters(n: int, C: float, template: str = "quintic") -> dict:
    """eps = min(1, L/8), R = L + 2 eps rounded up to 2 decimals, lambda minimal."""
    L = min_feasible_length(profile_bounds(n, C), template)
    eps = min(1.0, L / 8.0)
    R = math.ceil(round((L + 2.0 * eps) * 100.0, 9)) / 100.0
    return {"L_min": L, "eps": eps, "R": R, "lambda": lambda_min(n, C, R)}


def build_alpha(n: int, C: float, R: float, eps: float, template: str = "quintic") -> WarpingProfile:
    """alpha = 1 on (-inf, -R+eps], 0 on [-eps, inf), template descent between."""
    if not R > 1.0:
        raise ConstructionError("R must exceed 1")
    if not eps > 0.0:
        raise ConstructionError("eps must be positive")
    bounds = profile_bounds(n, C)
    L_min = min_feasible_length(bounds, template)
    length = R - 2.0 * eps
    if length < L_min:
        raise InfeasibleError(
            f"transition length R - 2 eps = {length:g} is below the minimum {L_min:g}",
            L_min, R_min=L_min + 2.0 * eps)
    tpl = get_template(template)
    pieces = (Constant(1.0), Descent(-R + eps, length, template), Constant(0.0))
    return WarpingProfile(Interval(-R, 0.0), pieces, knots=(-R + eps, -eps),
                          smoothness=tpl.smoothness, label="alpha",
                          info={"n": n, "C": C, "R": R, "eps": eps, "L_min": L_min,
                                "template": template, "bounds": bounds})


def build_f(alpha: WarpingProfile, R: float, lam: float) -> WarpingProfile:
    """f = alpha (t + R)/lam + (1 - alpha) on (-R, 0]."""
    n, C, eps = alpha.info["n"], alpha.info["C"], alpha.info["eps"]
    lmin = lambda_min(n, C, R)
    if lam < lmin:
        raise LambdaError(f"lambda = {lam:g} is below the admissible minimum {lmin:g}", lmin)
    desc = alpha.pieces[1]
    pieces = (Linear(1.0 / lam, -R), Blend(desc, R, lam), Constant(1.0))
    return WarpingProfile(Interval(-R, 0.0), pieces, knots=alpha.knots,
                          smoothness=alpha.smoothness, label="f",
                          info={**alpha.info, "lambda": lam, "lambda_min": lmin})


def _resolve(value, auto):
    if value is None or (isinstance(value, str) and value == "auto"):
        return auto
    return float(value)


def assemble_conical_cap(n: int, h: SphereMetric, R="auto", eps="auto", lam="auto",
                         template: str = "quintic") -> WarpedMetric:
    """f(t)^2 h + dt^2 on S^{n-1} x (-R, 0]: conical at -R, collared near 0."""
    if h.dim != n - 1:
        raise ConstructionError(f"sphere metric has dimension {h.dim}, need {n - 1}")
    C = scal_range(h).lo
    if not C > 0.0:
        raise PscRequiredError(f"boundary metric needs positive scalar curvature (inf scal_h = {C:g})")
    auto = default_parameters(n, C, template)
    eps_v = _resolve(eps, auto["eps"])
    if isinstance(R, str) and R == "auto" and not (isinstance(eps, str) and eps == "auto"):
        R_v = math.ceil(round((auto["L_min"] + 2.0 * eps_v) * 100.0, 9)) / 100.0
    else:
        R_v = _resolve(R, auto["R"])
    alpha = build_alpha(n, C, R_v, eps_v, template)
    lam_v = _resolve(lam, lambda_min(n, C, R_v))
    f = build_f(alpha, R_v, lam_v)
    info = {"kind": "conical-cap", "C": C, "R": R_v, "eps": eps_v, "lambda": lam_v,
            "lambda_min": f.info["lambda_min"], "lambda_gt_1": lam_v > 1.0,
            "L_min": auto["L_min"], "template": template,
            "slope_bound": alpha.info["bounds"].slope_bound,
            "curvature_bound": alpha.info["bounds"].curvature_bound}
    return WarpedMetric(n, f, h, Interval(-R_v, 0.0), label="conical-cap", info=info)


def rn_lambda(n: int) -> float:
    return math.sqrt(2.0 * (n - 1) * (n - 2))


def build_rn_counterexample(n: int, h: SphereMetric, T: float | None = None) -> WarpedMetric:
    """(t/lam)^2 h + dt^2 on S^{n-1} x (0, T] with lam = sqrt(2(n-1)(n-2))."""
    if h.dim != n - 1:
        raise ConstructionError(f"sphere metric has dimension {h.dim}, need {n - 1}")
    if scal_range(h).lo < 1.0:
        raise ConstructionError("the R^n construction needs scal_h >= 1")
    lam = rn_lambda(n)
    T = 2.0 * lam if T is None else float(T)
    f = WarpingProfile.single(Linear(1.0 / lam, 0.0), Interval(0.0, T))
    return WarpedMetric(n, f, h, Interval(0.0, T), label="rn",
                        info={"kind": "rn", "lambda": lam, "T": T})


def euclidean_cone(n: int, h: SphereMetric | None = None, T: float = 1.0) -> WarpedMetric:
    """t^2 h + dt^2 on (0, T]; the Euclidean metric when h is round."""
    h = Round(n - 1) if h is None else h
    f = WarpingProfile.single(Linear(1.0, 0.0), Interval(0.0, T))
    return WarpedMetric(n, f, h, Interval(0.0, T), label="cone", info={"kind": "cone", "T": T})


def round_sphere(n: int, h: SphereMetric | None = None) -> WarpedMetric:
    """sin(t)^2 h + dt^2 on (0, pi)."""
    h = Round(n - 1) if h is None else h
    dom = Interval(0.0, math.pi)
    f = WarpingProfile.single(Sine(0.0), dom)
    return WarpedMetric(n, f, h, dom, label="sine", info={"kind": "sine"})


# -- cone pullbacks -------------------------------------------------------------

def _cutoff(r, k=0):
    """1 for r <= 1/2, 0 for r >= 1, C-infinity in between."""
    # the transition satisfies s(u) + s(1 - u) = 1; evaluating at the
    # reflected point avoids cancellation in 1 - s(u) as r -> 1
    tpl = get_template("smooth")
    return (-2.0) ** k * tpl.evaluate(2.0 - 2.0 * r, k)


def torus_pullback_field(f: LatitudeTwist, center=None) -> MetricField:
    """F^* g_flat with F(c + y) = c + |y| f_{s(|y|)}(y/|y|) on the punctured box.

    f_s is the isotopy member s * theta and s(r) cuts off from 1 (r <= 1/2)
    to 0 (r >= 1), so F is the cone of f near the puncture and the identity
    outside radius 1. The field is flat wherever it is smooth.
    """
    n = f.dim + 1
    c = np.full(n, math.pi) if center is None else np.asarray(center, dtype=float)

    def batch(X):
        y = np.asarray(X, dtype=float) - c
        r = np.linalg.norm(y, axis=-1)
        q = y / r[:, None]
        s = _cutoff(r)
        ds = _cutoff(r, 1)
        th = f.theta * s
        b = f.angle(q[:, -1]) / f.theta if f.theta != 0.0 else np.zeros_like(r)
        phi = th * b
        cph, sph = np.cos(phi), np.sin(phi)
        Phi = q.copy()
        Phi[:, 0] = cph * q[:, 0] - sph * q[:, 1]
        Phi[:, 1] = sph * q[:, 0] + cph * q[:, 1]
        # d Phi / d s
        dPhi = np.zeros_like(q)
        dPhi[:, 0] = (-sph * q[:, 0] - cph * q[:, 1]) * f.theta * b
        dPhi[:, 1] = (cph * q[:, 0] - sph * q[:, 1]) * f.theta * b
        # ambient differential of the twist with angle th * b(z)
        Dq = np.broadcast_to(np.eye(n), (len(r), n, n)).copy()
        Dq[:, 0, 0], Dq[:, 0, 1] = cph, -sph
        Dq[:, 1, 0], Dq[:, 1, 1] = sph, cph
        db = f.angle_d1(q[:, -1]) / f.theta if f.theta != 0.0 else np.zeros_like(r)
        dphi = th * db
        Dq[:, 0, -1] += (-sph * q[:, 0] - cph * q[:, 1]) * dphi
        Dq[:, 1, -1] += (cph * q[:, 0] - sph * q[:, 1]) * dphi
        P = np.eye(n) - q[:, :, None] * q[:, None, :]
        radial = Phi + (r * ds)[:, None] * dPhi
        D = radial[:, :, None] * q[:, None, :] + Dq @ P
        return np.swapaxes(D, 1, 2) @ D

    def inside(X):
        y = np.asarray(X, dtype=float)
        r = np.linalg.norm(y - c, axis=-1)
        return (r > 0.0) & np.all((y > 0.0) & (y < 2.0 * math.pi), axis=-1)

    def scale(x):
        # balances truncation (steep cutoff, twist near the poles) against
        # round-off, which grows like r^-2 towards the puncture
        r = float(np.linalg.norm(x - c))
        return min(0.2 * r, float(np.min(np.minimum(x, 2 * math.pi - x))), 0.05)

    return MetricField(n, batch, inside, scale, name="torus-pullback",
                       info={"center": c.tolist(), "theta": f.theta})


def build_pullback_singularity(kind: str, f: SphereDiffeo, params: dict | None = None):
    """Sphere kind: sin(t)^2 f^*h_round + dt^2; torus kind: the flat cone pullback."""
    params = dict(params or {})
    if kind == "sphere":
        h = Pullback(f, Round(f.dim))
        g = round_sphere(f.dim + 1, h)
        return WarpedMetric(g.n, g.f, h, g.domain, label="sphere-pullback",
                            info={"kind": "sphere-pullback", "diffeo": f.describe()})
    if kind == "torus":
        if not isinstance(f, LatitudeTwist):
            raise ConstructionError("torus kind needs a twist (an isotopy to the identity)")
        return torus_pullback_field(f, params.get("center"))
    raise ConstructionError(f"unknown pullback kind {kind!r}")
