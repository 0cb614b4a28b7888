"""Warped products g = f(t)^2 h + dt^2 on S^{n-1} x I and their geometry.

With a radial conformal factor u the metric is u^{4/(n-2)} (f^2 h + dt^2).
All closed-form curvature evaluations run in interval arithmetic; point
queries are width-zero intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .interval import EnclosureFn, Interval, IntervalDomainError
from .oracle import MetricField
from .profiles import WarpingProfile
from .spheres import SphereMetric


_ROOT_TOL = 1e-12


class WarpedGeometryError(ValueError):
    pass


@dataclass(frozen=True)
class WarpedMetric:
    n: int
    f: WarpingProfile
    h: SphereMetric
    domain: Interval
    conformal: Optional[WarpingProfile] = None
    label: str = "g"
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise WarpedGeometryError("total dimension must be an integer >= 3")
        if self.h.dim != self.n - 1:
            raise WarpedGeometryError(f"sphere metric has dimension {self.h.dim}, need {self.n - 1}")
        if self.domain.width <= 0.0:
            raise WarpedGeometryError("t-domain must have positive length")

    def _vanishes_at(self, t: float) -> bool:
        # a float endpoint can miss the exact root (sin at float pi is 1.2e-16)
        v = self.f.enclose(Interval(t), 0)
        return v.contains_zero() or v.mag <= _ROOT_TOL

    @property
    def singular_left(self) -> bool:
        return self._vanishes_at(self.domain.lo)

    @property
    def singular_right(self) -> bool:
        return self._vanishes_at(self.domain.hi)

    @property
    def origin(self) -> float:
        """t-value of the tip: the Cartesian radius is |x| = t - origin."""
        return self.domain.lo

    def with_conformal(self, u: Optional[WarpingProfile]) -> "WarpedMetric":
        return WarpedMetric(self.n, self.f, self.h, self.domain, u, self.label, dict(self.info))

    def describe(self) -> dict:
        d = {"n": self.n, "label": self.label, "domain": [self.domain.lo, self.domain.hi],
             "f": self.f.describe(), "h": self.h.describe()}
        if self.conformal is not None:
            d["conformal"] = self.conformal.describe()
        return d


def _check_t(g: WarpedMetric, t: Interval):
    if not g.domain.contains(t):
        raise WarpedGeometryError(f"{t!r} is not inside the domain {g.domain!r}")
    if g.singular_left and t.lo <= g.domain.lo:
        raise WarpedGeometryError("t touches the singular end of the metric")
    if g.singular_right and t.hi >= g.domain.hi:
        raise WarpedGeometryError("t touches the singular end of the metric")


def _scal_parts(n, scal_h, f0, f1, f2):
    m = n - 1
    num = scal_h - 2.0 * m * f0 * f2 - (m * (m - 1)) * f1.sqr()
    return num, f0.sqr()


def _scal_expr(n, scal_h, f0, f1, f2):
    num, den = _scal_parts(n, scal_h, f0, f1, f2)
    return num / den


def _scal_dt(n, scal_h, f0, f1, f2, f3):
    m = n - 1
    num, den = _scal_parts(n, scal_h, f0, f1, f2)
    dnum = -2.0 * m * (f1 * f2 + f0 * f3) - (2.0 * m * (m - 1)) * f1 * f2
    return dnum / den - 2.0 * f1 * num / (den * f0)


def scal_warped(g: WarpedMetric, t: Interval) -> Interval:
    """Enclosure of (scal_h - 2(n-1) f f'' - (n-1)(n-2) f'^2) / f^2 over ``t``.

    The enclosure ranges over all points of the sphere factor as well.
    """
    t = t if isinstance(t, Interval) else Interval(t)
    _check_t(g, t)
    f = g.f
    try:
        return _scal_expr(g.n, g.h.scal_range(), f.enclose(t, 0), f.enclose(t, 1), f.enclose(t, 2))
    except IntervalDomainError as exc:
        raise WarpedGeometryError(f"warping function not bounded away from 0 on {t!r}") from exc


def scal_enclosure_fn(g: WarpedMetric, dom: Interval, scal_h: Optional[Interval] = None) -> EnclosureFn:
    """scal_g as an EnclosureFn on ``dom`` (mean-value form via f''')."""
    _check_t(g, dom)
    sh = g.h.scal_range() if scal_h is None else scal_h
    f = g.f
    n = g.n

    def val(t):
        return _scal_expr(n, sh, f.enclose(t, 0), f.enclose(t, 1), f.enclose(t, 2))

    def der(t):
        return _scal_dt(n, sh, f.enclose(t, 0), f.enclose(t, 1), f.enclose(t, 2), f.enclose(t, 3))

    return EnclosureFn(dom, val, der, name="scal")


def scal_point(g: WarpedMetric, t) -> np.ndarray:
    """Float scal for arrays of t, using the midpoint of scal_range(h)."""
    t = np.asarray(t, dtype=float)
    sh = g.h.scal_range().mid
    m = g.n - 1
    f0, f1, f2 = (g.f.evaluate(t, k) for k in range(3))
    return (sh - 2 * m * f0 * f2 - m * (m - 1) * f1 * f1) / (f0 * f0)


def mean_curvature_slice(g: WarpedMetric, t0: float) -> float:
    """Mean curvature of {t = t0} w.r.t. d/dt; (n-1) f'/f without conformal factor.

    With a conformal factor u the slice has mean curvature
    u^{-2/(n-2)} ((n-1) f'/f + 2(n-1)/(n-2) u'/u).
    """
    return mean_curvature_enclosure(g, t0).mid


def mean_curvature_enclosure(g: WarpedMetric, t0: float) -> Interval:
    t = Interval(float(t0))
    if not g.domain.contains(t):
        raise WarpedGeometryError(f"t0 = {t0} is outside the domain")
    f0 = g.f.enclose(t, 0)
    if f0.contains_zero():
        raise WarpedGeometryError("f(t0) = 0: the slice degenerates to a point")
    m = g.n - 1
    H = m * g.f.enclose(t, 1) / f0
    if g.conformal is not None:
        u0, u1 = g.conformal.enclose(t, 0), g.conformal.enclose(t, 1)
        H = (H + (2.0 * m / (g.n - 2)) * u1 / u0) * u0.rpow(-2.0 / (g.n - 2))
    return H


def scal_conformal(g: WarpedMetric, t: Interval) -> Interval:
    """Scalar curvature of u^{4/(n-2)} (f^2 h + dt^2) over ``t``.

    u^{-(n+2)/(n-2)} (-a (u'' + (n-1) (f'/f) u') + scal u), a = 4(n-1)/(n-2).
    """
    t = t if isinstance(t, Interval) else Interval(t)
    if g.conformal is None:
        return scal_warped(g, t)
    _check_t(g, t)
    u = g.conformal
    u0 = u.enclose(t, 0)
    if u0.lo <= 0.0:
        raise WarpedGeometryError(f"conformal factor not bounded away from 0 on {t!r}")
    n = g.n
    f0, f1 = g.f.enclose(t, 0), g.f.enclose(t, 1)
    base = scal_warped(g, t)
    a = 4.0 * (n - 1) / (n - 2)
    lap = u.enclose(t, 2) + (n - 1) * (f1 / f0) * u.enclose(t, 1)
    return (-a * lap + base * u0) * u0.rpow(-(n + 2.0) / (n - 2.0))


# -- Cartesian realization -------------------------------------------------------

def _cartesian(g: WarpedMetric, X):
    X = np.asarray(X, dtype=float)
    r = np.linalg.norm(X, axis=-1)
    if np.any(r == 0.0):
        raise WarpedGeometryError("x = 0 is the cone tip")
    q = X / r[..., None]
    t = r + g.origin
    f0 = g.f.evaluate(t, 0)
    n = g.n
    qq = q[..., :, None] * q[..., None, :]
    iso = getattr(g.h, "isotropic_factor", None)
    if iso is not None:
        # c (f/r)^2 P + q q^T, exactly the identity for the round cone
        w = (iso * (f0 / r) ** 2)[..., None, None]
        G = w * np.eye(n) + (1.0 - w) * qq
    else:
        P = np.eye(n) - qq
        G = ((f0 / r) ** 2)[..., None, None] * (P @ g.h.ambient(q) @ P) + qq
    if g.conformal is not None:
        G = G * (g.conformal.evaluate(t, 0) ** (4.0 / (n - 2)))[..., None, None]
    return G


def coordinate_metric_matrix(g: WarpedMetric, x):
    """g_ij at x in R^n \\ {0} with |x| = t - t_tip.

    For f(t) = t this is h_{x/|x|}(d_i - x^i x/|x|^2, d_j - x^j x/|x|^2)
    + x^i x^j/|x|^2, homogeneous of degree 0. For general f the tangential
    block is scaled by (f(t)/|x|)^2.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n,):
        raise WarpedGeometryError(f"point must have shape ({g.n},)")
    return _cartesian(g, x[None, :])[0]


def metric_field(g: WarpedMetric, r_max: Optional[float] = None) -> MetricField:
    """The Cartesian metric as a MetricField for the curvature oracle."""
    tip = g.origin
    right = g.domain.hi - tip
    r_cap = right if r_max is None else r_max
    sing_right = g.singular_right

    def inside(X):
        r = np.linalg.norm(X, axis=-1)
        ok = r > 0.0
        if sing_right:
            ok &= r < right
        return ok

    def scale(x):
        r = float(np.linalg.norm(x))
        s = r * g.h.length_scale(x / r)
        if sing_right:
            s = min(s, right - r)
        kd = g.f.knot_distance(r + tip)
        if g.conformal is not None:
            kd = min(kd, g.conformal.knot_distance(r + tip))
        return min(s, 8.0 * kd)

    return MetricField(g.n, lambda X: _cartesian(g, X), inside, scale, name=g.label,
                       info={"r_max": r_cap})
