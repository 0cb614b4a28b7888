"""Closed-form metrics on S^m and explicit self-diffeomorphisms.

Every metric is represented by an ambient symmetric tensor ``A(x)`` on
R^{m+1}; only its restriction to tangent vectors matters. Chart matrices
are ``J(u)^T A(x(u)) J(u)`` for the two stereographic charts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .interval import EnclosureFn, Interval, enclose_range

CHARTS = ("N", "S")


class SphereMetricError(ValueError):
    pass


# -- charts -------------------------------------------------------------------

def chart_to_sphere(chart: str, u):
    """Inverse stereographic projection; ``u`` has shape (..., m)."""
    u = np.asarray(u, dtype=float)
    if chart not in CHARTS:
        raise SphereMetricError(f"unknown chart {chart!r}")
    if not np.all(np.isfinite(u)):
        raise SphereMetricError("chart point outside chart domain (non-finite)")
    r2 = np.sum(u * u, axis=-1, keepdims=True)
    denom = 1.0 + r2
    last = (r2 - 1.0) / denom if chart == "N" else (1.0 - r2) / denom
    return np.concatenate([2.0 * u / denom, last], axis=-1)


def sphere_to_chart(chart: str, x):
    x = np.asarray(x, dtype=float)
    z = x[..., -1:]
    if chart == "N":
        d = 1.0 - z
    elif chart == "S":
        d = 1.0 + z
    else:
        raise SphereMetricError(f"unknown chart {chart!r}")
    if np.any(d <= 0.0):
        raise SphereMetricError(f"point is the projection pole of chart {chart}")
    return x[..., :-1] / d


def chart_jacobian(chart: str, u):
    """d x / d u with shape (..., m+1, m)."""
    u = np.asarray(u, dtype=float)
    m = u.shape[-1]
    r2 = np.sum(u * u, axis=-1)[..., None, None]
    denom = 1.0 + r2
    eye = np.eye(m)
    top = 2.0 * eye / denom - 4.0 * u[..., :, None] * u[..., None, :] / denom**2
    bottom = 4.0 * u[..., None, :] / denom**2
    if chart == "S":
        bottom = -bottom
    return np.concatenate([top, bottom], axis=-2)


def round_chart_matrix(u):
    u = np.asarray(u, dtype=float)
    m = u.shape[-1]
    r2 = np.sum(u * u, axis=-1)[..., None, None]
    return 4.0 / (1.0 + r2) ** 2 * np.eye(m)


def chart_transition(u):
    """N-chart -> S-chart map u -> u/|u|^2 and its Jacobian."""
    u = np.asarray(u, dtype=float)
    m = u.shape[-1]
    r2 = np.sum(u * u, axis=-1)[..., None]
    v = u / r2
    jac = np.eye(m) / r2[..., None] - 2.0 * u[..., :, None] * u[..., None, :] / (r2[..., None] ** 2)
    return v, jac


# -- diffeomorphisms ----------------------------------------------------------

class SphereDiffeo:
    """Smooth map of S^m given by an ambient formula ``apply`` with
    ambient differential ``differential`` (valid on tangent vectors)."""

    dim: int
    tag = "diffeo"

    def apply(self, x):
        raise NotImplementedError

    def differential(self, x):
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.tag}


@dataclass(frozen=True)
class Identity(SphereDiffeo):
    dim: int
    tag = "identity"

    def apply(self, x):
        return np.asarray(x, dtype=float)

    def differential(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(self.dim + 1), x.shape + (x.shape[-1],)).copy()


@dataclass(frozen=True)
class RigidRotation(SphereDiffeo):
    dim: int
    matrix: tuple

    tag = "rotation"

    def __post_init__(self):
        q = np.asarray(self.matrix, dtype=float)
        if q.shape != (self.dim + 1, self.dim + 1):
            raise SphereMetricError("rotation matrix has the wrong shape")
        if not np.allclose(q.T @ q, np.eye(self.dim + 1), atol=1e-12):
            raise SphereMetricError("rotation matrix is not orthogonal")

    @classmethod
    def from_array(cls, q):
        q = np.asarray(q, dtype=float)
        return cls(q.shape[0] - 1, tuple(map(tuple, q)))

    @classmethod
    def plane(cls, dim, i, j, angle):
        q = np.eye(dim + 1)
        c, s = math.cos(angle), math.sin(angle)
        q[i, i], q[i, j], q[j, i], q[j, j] = c, -s, s, c
        return cls.from_array(q)

    @property
    def q(self):
        return np.asarray(self.matrix, dtype=float)

    def apply(self, x):
        return np.asarray(x, dtype=float) @ self.q.T

    def differential(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.q, x.shape + (x.shape[-1],)).copy()

    def describe(self):
        return {"kind": self.tag, "matrix": [list(r) for r in self.matrix]}


def _bump(z):
    """exp(1 - 1/(1 - z^2)) for |z| < 1, 0 otherwise; flat to all orders at |z| = 1."""
    z = np.asarray(z, dtype=float)
    s = 1.0 - z * z
    out = np.zeros_like(z)
    inside = s > 0.0
    with np.errstate(over="ignore", divide="ignore"):
        out[inside] = np.exp(1.0 - 1.0 / s[inside])
    return out


def _bump_d1(z):
    z = np.asarray(z, dtype=float)
    s = 1.0 - z * z
    out = np.zeros_like(z)
    inside = s > 0.0
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        si = s[inside]
        out[inside] = np.exp(1.0 - 1.0 / si) * (-2.0 * z[inside] / si**2)
    return np.nan_to_num(out)


@dataclass(frozen=True)
class LatitudeTwist(SphereDiffeo):
    """Rotate the (x_1, x_2)-plane by an angle depending on the height x_{m+1}.

    The angle is ``theta * exp(1 - 1/(1 - z^2))``: it vanishes to all orders
    at the poles and scaling ``theta`` by s in [0, 1] gives an isotopy to the
    identity.
    """

    dim: int
    theta: float
    tag = "twist"

    def scaled(self, s: float) -> "LatitudeTwist":
        return LatitudeTwist(self.dim, self.theta * s)

    def angle(self, z):
        return self.theta * _bump(z)

    def angle_d1(self, z):
        return self.theta * _bump_d1(z)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        phi = self.angle(x[..., -1])
        c, s = np.cos(phi), np.sin(phi)
        out = x.copy()
        out[..., 0] = c * x[..., 0] - s * x[..., 1]
        out[..., 1] = s * x[..., 0] + c * x[..., 1]
        return out

    def differential(self, x):
        x = np.asarray(x, dtype=float)
        n1 = x.shape[-1]
        phi = self.angle(x[..., -1])
        dphi = self.angle_d1(x[..., -1])
        c, s = np.cos(phi), np.sin(phi)
        d = np.broadcast_to(np.eye(n1), x.shape + (n1,)).copy()
        d[..., 0, 0], d[..., 0, 1] = c, -s
        d[..., 1, 0], d[..., 1, 1] = s, c
        # derivative of the rotation w.r.t. the height
        d[..., 0, -1] += (-s * x[..., 0] - c * x[..., 1]) * dphi
        d[..., 1, -1] += (c * x[..., 0] - s * x[..., 1]) * dphi
        return d

    def shear_bound(self, delta: float = 1e-3) -> float:
        """Certified Q = sup_z |angle'(z)| (1 - z^2).

        The twist restricted to T_x S^m is a rotation composed with a shear
        of size q(x) <= Q; the singular values are sqrt(1 + q^2/4) +- q/2.
        """
        if self.theta == 0.0:
            return 0.0
        th = abs(self.theta)

        def g(z):
            s = 1.0 - z.sqr()
            y = 1.0 / s
            return (2.0 * th) * z.abs() * y * (1.0 - y).exp()

        zmax = 1.0 - delta
        core = enclose_range(EnclosureFn(Interval(-zmax, zmax), g), Interval(-zmax, zmax), max_depth=14)
        y_d = 1.0 / (1.0 - zmax * zmax)
        # y e^{1-y} decreases for y > 1, so the tail is bounded by its value at y_d
        tail = 2.0 * th * y_d * math.exp(1.0 - y_d) * 1.0000001
        return max(core.hi, tail)

    def shear_gradient_bound(self, delta: float = 1e-3) -> float:
        """Bound on the spherical gradient of q(x) (for Lipschitz padding)."""
        if self.theta == 0.0:
            return 0.0
        th = abs(self.theta)

        def psi(z):  # |angle'(z)| sqrt(1 - z^2)
            y = 1.0 / (1.0 - z.sqr())
            return (2.0 * th) * z.abs() * (1.0 - y).exp() * y.rpow(1.5)

        def dpsi(z):
            y = 1.0 / (1.0 - z.sqr())
            br = y + 2.0 * z.sqr() * y.sqr() * (1.5 - y)
            return (2.0 * th) * (1.0 - y).exp() * y.sqrt() * br

        zmax = 1.0 - delta
        dom = Interval(-zmax, zmax)
        b1 = enclose_range(EnclosureFn(dom, psi), dom, max_depth=14).hi
        b2 = enclose_range(EnclosureFn(dom, dpsi), dom, max_depth=14).mag
        y_d = 1.0 / (1.0 - zmax * zmax)
        tail = 2.0 * th * math.exp(1.0 - y_d) * 4.0 * y_d**3.5
        return max(b1, tail) + max(b2, tail)

    def length_scale(self, x):
        """Angular length over which the twist varies appreciably near ``x``."""
        if self.theta == 0.0:
            return 1.0
        z = float(np.asarray(x)[..., -1])
        return max(1.0 - z * z, 0.1)

    def condition_bound(self) -> float:
        q = self.shear_bound()
        smax = math.sqrt(1.0 + q * q / 4.0) + q / 2.0
        return smax * smax

    def describe(self):
        return {"kind": self.tag, "theta": self.theta}


# -- metrics --------------------------------------------------------------------

class SphereMetric:
    """Base class; ``dim`` is the sphere dimension m = n - 1."""

    dim: int
    tag = "metric"

    def ambient(self, x):
        raise NotImplementedError

    def scal_range(self) -> Interval:
        raise NotImplementedError

    # relative eigenvalues vs the round metric, exact when known
    def exact_eigen_bounds(self):
        return None

    def eigen_lipschitz(self):
        """Bound on the spherical gradient of the relative eigenvalues, or None."""
        return None

    def describe(self) -> dict:
        return {"kind": self.tag, "dim": self.dim}

    def length_scale(self, x) -> float:
        """Angular scale of variation at the unit vector ``x`` (oracle step policy)."""
        return 1.0

    def metric_matrix_at(self, chart, u):
        return metric_matrix_at(self, chart, u)


def _check_dim(dim):
    if int(dim) != dim or dim < 2:
        raise SphereMetricError("sphere dimension must be an integer >= 2")


@dataclass(frozen=True)
class Round(SphereMetric):
    """Round sphere of radius r: metric r^2 h_round."""

    dim: int
    radius: float = 1.0
    tag = "round"

    def __post_init__(self):
        _check_dim(self.dim)
        if not self.radius > 0.0:
            raise SphereMetricError("radius must be positive")

    @property
    def factor(self):
        return self.radius * self.radius

    @property
    def isotropic_factor(self):
        return self.factor

    def ambient(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.factor * np.eye(x.shape[-1]), x.shape + (x.shape[-1],)).copy()

    def scal_range(self):
        m = self.dim
        v = Interval(m * (m - 1)) / Interval(self.radius).sqr()
        return v

    def exact_eigen_bounds(self):
        f = Interval(self.radius).sqr()
        return f

    def eigen_lipschitz(self):
        return 0.0

    def describe(self):
        return {"kind": self.tag, "dim": self.dim, "radius": self.radius}


@dataclass(frozen=True)
class ScaledRound(SphereMetric):
    """c * h_round."""

    dim: int
    c: float
    tag = "scaled"

    def __post_init__(self):
        _check_dim(self.dim)
        if not self.c > 0.0:
            raise SphereMetricError("scale must be positive")

    def ambient(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.c * np.eye(x.shape[-1]), x.shape + (x.shape[-1],)).copy()

    def scal_range(self):
        m = self.dim
        return Interval(m * (m - 1)) / self.c

    def exact_eigen_bounds(self):
        return Interval(self.c)

    @property
    def isotropic_factor(self):
        return self.c

    def eigen_lipschitz(self):
        return 0.0

    def describe(self):
        return {"kind": self.tag, "dim": self.dim, "c": self.c}


def _quat_frames(x):
    """q*i, q*j, q*k for unit quaternions q = (q0, q1, q2, q3)."""
    q0, q1, q2, q3 = (x[..., i] for i in range(4))
    qi = np.stack([-q1, q0, q3, -q2], axis=-1)
    qj = np.stack([-q2, -q3, q0, q1], axis=-1)
    qk = np.stack([-q3, q2, -q1, q0], axis=-1)
    return qi, qj, qk


@dataclass(frozen=True)
class Berger3(SphereMetric):
    """Left-invariant metric a*s1^2 + b*(s2^2 + s3^2) on S^3 = SU(2).

    The coframe s_k is dual to q -> q e_k, so a = b = 1 is the unit round
    metric. Scalar curvature is the constant 8/b - 2a/b^2.
    """

    a: float
    b: float
    dim: int = 3
    tag = "berger"

    def __post_init__(self):
        if self.dim != 3:
            raise SphereMetricError("Berger metrics live on S^3")
        if not (self.a > 0.0 and self.b > 0.0):
            raise SphereMetricError("Berger parameters must be positive")

    def ambient(self, x):
        x = np.asarray(x, dtype=float)
        qi, qj, qk = _quat_frames(x)
        outer = lambda v: v[..., :, None] * v[..., None, :]  # noqa: E731
        return self.a * outer(qi) + self.b * (outer(qj) + outer(qk))

    def scal_range(self):
        a, b = Interval(self.a), Interval(self.b)
        return 8.0 / b - 2.0 * a / b.sqr()

    def exact_eigen_bounds(self):
        return Interval(min(self.a, self.b), max(self.a, self.b))

    def eigen_lipschitz(self):
        return 0.0

    def describe(self):
        return {"kind": self.tag, "dim": 3, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Pullback(SphereMetric):
    """F^* base for a diffeomorphism F."""

    diffeo: SphereDiffeo
    base: SphereMetric
    tag = "pullback"

    def __post_init__(self):
        if self.diffeo.dim != self.base.dim:
            raise SphereMetricError("diffeomorphism and metric dimensions differ")

    @property
    def dim(self):
        return self.base.dim

    def ambient(self, x):
        x = np.asarray(x, dtype=float)
        d = self.diffeo.differential(x)
        a = self.base.ambient(self.diffeo.apply(x))
        return np.swapaxes(d, -1, -2) @ a @ d

    def scal_range(self):
        # scalar curvature is natural under diffeomorphisms
        return self.base.scal_range()

    def exact_eigen_bounds(self):
        if isinstance(self.diffeo, (Identity, RigidRotation)):
            return self.base.exact_eigen_bounds()
        if isinstance(self.diffeo, LatitudeTwist) and isinstance(self.base, (Round, ScaledRound)):
            # shear singular values squared: s^{-1} <= . <= s with q <= Q certified
            c = self.base.exact_eigen_bounds()
            s = self.diffeo.condition_bound()
            return Interval(c.lo / s, c.hi * s)
        return None

    def eigen_lipschitz(self):
        if isinstance(self.diffeo, (Identity, RigidRotation)):
            return self.base.eigen_lipschitz()
        if isinstance(self.diffeo, LatitudeTwist) and isinstance(self.base, (Round, ScaledRound)):
            scale = self.base.exact_eigen_bounds().hi
            q = self.diffeo.shear_bound()
            smax = math.sqrt(1.0 + q * q / 4.0) + q / 2.0
            return scale * 2.0 * smax * self.diffeo.shear_gradient_bound()
        return None

    def length_scale(self, x):
        own = self.diffeo.length_scale(x) if hasattr(self.diffeo, "length_scale") else 1.0
        return min(own, self.base.length_scale(self.diffeo.apply(x)))

    def describe(self):
        return {"kind": self.tag, "dim": self.dim, "diffeo": self.diffeo.describe(),
                "base": self.base.describe()}


def apply_diffeo(f: SphereDiffeo, h: SphereMetric) -> SphereMetric:
    return Pullback(f, h)


def scal_range(h: SphereMetric) -> Interval:
    return h.scal_range()


def metric_matrix_at(h: SphereMetric, chart: str, u):
    """Matrix of ``h`` in stereographic chart ``chart`` at ``u`` (shape (..., m))."""
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != h.dim:
        raise SphereMetricError(f"chart point has dimension {u.shape[-1]}, sphere has {h.dim}")
    x = chart_to_sphere(chart, u)
    j = chart_jacobian(chart, u)
    return np.swapaxes(j, -1, -2) @ h.ambient(x) @ j


# -- eigenvalue sandwich vs the round metric -----------------------------------

def sample_sphere(dim: int, samples: int, seed: int = 0):
    """Deterministic sample: both poles, 2(m+1) axis points, then uniform points."""
    rng = np.random.default_rng(seed)
    axes = np.concatenate([np.eye(dim + 1), -np.eye(dim + 1)])
    extra = max(samples - len(axes), 0)
    g = rng.standard_normal((extra, dim + 1))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.concatenate([axes, g])[: max(samples, 1)] if samples < len(axes) else np.concatenate([axes, g])


def _to_charts(x):
    """Split sphere points into the chart where |u| <= 1."""
    south = x[:, -1] <= 0.0
    return (("N", sphere_to_chart("N", x[south])), ("S", sphere_to_chart("S", x[~south])))


def relative_eigenvalues(h: SphereMetric, x):
    """Eigenvalues of h relative to h_round at sphere points ``x`` (N, m+1)."""
    out = []
    for chart, u in _to_charts(np.asarray(x, dtype=float)):
        if len(u) == 0:
            continue
        hm = metric_matrix_at(h, chart, u)
        rho = 4.0 / (1.0 + np.sum(u * u, axis=-1)) ** 2
        ev = np.linalg.eigvalsh(hm) / rho[:, None]
        if np.any(ev <= 0.0) or not np.all(np.isfinite(ev)):
            raise SphereMetricError("degenerate metric matrix at a sample point")
        out.append(ev)
    return np.concatenate(out)


def covering_radius_estimate(pts, probes: int = 4000, seed: int = 1):
    """Largest geodesic distance from a probe point to the sample set."""
    rng = np.random.default_rng(seed)
    p = rng.standard_normal((probes, pts.shape[1]))
    p /= np.linalg.norm(p, axis=1, keepdims=True)
    best = np.full(probes, -1.0)
    for i in range(0, len(pts), 2048):
        best = np.maximum(best, np.max(p @ pts[i:i + 2048].T, axis=1))
    return float(np.max(np.arccos(np.clip(best, -1.0, 1.0))))


@dataclass(frozen=True)
class EigenBounds:
    sampled: Interval
    padding: float
    padded: Interval
    samples: int
    method: str
    extra: dict = field(default_factory=dict)

    @property
    def lambda_round(self) -> float:
        """max(lambda_max, 1/lambda_min): the uniformly-round constant."""
        return max(self.padded.hi, 1.0 / self.padded.lo)


def eigen_bounds_detail(h: SphereMetric, samples: int = 4096, seed: int = 0) -> EigenBounds:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    pts = sample_sphere(h.dim, samples, seed)
    ev = relative_eigenvalues(h, pts)
    sampled = Interval(float(ev.min()), float(ev.max()))
    exact = h.exact_eigen_bounds()
    if exact is not None:
        # closed-form global range; samples must fall inside it up to rounding
        slack = 1e-9 * exact.hi
        if sampled.lo < exact.lo - slack or sampled.hi > exact.hi + slack:
            raise SphereMetricError("sampled eigenvalues escape the closed-form range")
        return EigenBounds(sampled, 0.0, exact, len(pts), "grid+padding", {"closed_form": True})
    lip = h.eigen_lipschitz()
    if lip is None:
        return EigenBounds(sampled, 0.0, sampled, len(pts), "grid-only")
    delta = covering_radius_estimate(pts)
    pad = lip * delta
    lo = sampled.lo - pad
    if lo <= 0.0:
        # padding swamps the sample; no uniform lower bound from this grid
        return EigenBounds(sampled, pad, sampled, len(pts), "grid-only",
                           {"lipschitz": lip, "covering_radius": delta})
    padded = Interval(lo, sampled.hi + pad)
    return EigenBounds(sampled, pad, padded, len(pts), "grid+padding",
                       {"lipschitz": lip, "covering_radius": delta})


def eigen_bounds_vs_round(h: SphereMetric, samples: int = 4096) -> Interval:
    """[lambda_min, lambda_max] with lambda_min h_round <= h <= lambda_max h_round."""
    return eigen_bounds_detail(h, samples).padded
