"""Finite-difference curvature of coordinate metric fields.

This is a floating-point cross-check, never a certificate. Derivatives of
the metric use fourth-order central stencils (a 16-point product stencil for
mixed second derivatives); scalar curvature is Richardson-extrapolated over
the step pair (h, h/2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

# fourth-order central first derivative: offsets and weights (/12h)
_D1 = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))
# fourth-order central second derivative (/12h^2)
_D2 = ((-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0))

PASS_TOL = 1e-5
STEP_FRACTION = 0.02


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class MetricField:
    """A coordinate metric x -> g_ij(x) on an open region of R^dim.

    ``batch`` maps an (N, dim) array to (N, dim, dim). ``inside`` (optional)
    flags points of the evaluation region; ``scale`` (optional) gives a local
    length (distance to singularities, kinks, boundary) for the step policy.
    """

    dim: int
    batch: Callable
    inside: Optional[Callable] = None
    scale: Optional[Callable] = None
    floor: float = 0.0
    name: str = "g"
    info: dict = field(default_factory=dict, compare=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.batch(x[None, :])[0]

    def default_step(self, x) -> float:
        s = 1.0 if self.scale is None else float(self.scale(np.asarray(x, dtype=float)))
        return STEP_FRACTION * min(s, 1.0)


def euclidean_field(dim: int) -> MetricField:
    return MetricField(dim, lambda x: np.broadcast_to(np.eye(dim), x.shape[:-1] + (dim, dim)).copy(),
                       name="euclidean")


@lru_cache(maxsize=None)
def _stencil_weights(dim):
    """Integer offsets of the stencil and the linear maps to dg and ddg.

    Weights are integers (over 12 h, 12 h^2 or 144 h^2) so that they sum to exactly
    zero and constant fields have exactly zero derivatives.
    """
    offs = [np.zeros(dim, dtype=int)]
    eye = np.eye(dim, dtype=int)
    w1 = {}
    w2 = {}
    for i in range(dim):
        w2[(i, i)] = [(0, -30.0)]
        for a, wa in _D1:
            offs.append(a * eye[i])
            w1.setdefault(i, []).append((len(offs) - 1, wa))
        for a, wa in _D2:
            if a != 0:
                w2[(i, i)].append((1 + 4 * i + (0, 1, None, 2, 3)[a + 2], wa))
    for i in range(dim):
        for j in range(i + 1, dim):
            lst = []
            for a, wa in _D1:
                for b, wb in _D1:
                    offs.append(a * eye[i] + b * eye[j])
                    lst.append((len(offs) - 1, wa * wb))
            w2[(i, j)] = lst
    return np.array(offs, dtype=float), w1, w2


def metric_derivatives_batch(gf: MetricField, X, steps):
    """Vectorized :func:`metric_derivatives` for points X (P, n), steps (P,)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = gf.dim
    P = len(X)
    h = np.broadcast_to(np.asarray(steps, dtype=float), (P,))
    offs, w1, w2 = _stencil_weights(n)
    pts = X[:, None, :] + h[:, None, None] * offs[None, :, :]
    flat = pts.reshape(-1, n)
    if gf.inside is not None and not np.all(gf.inside(flat)):
        raise OracleError("finite-difference stencil exits the domain")
    vals = gf.batch(flat).reshape(P, len(offs), n, n)
    g = vals[:, 0]
    dg = np.zeros((P, n, n, n))
    ddg = np.zeros((P, n, n, n, n))
    for i, lst in w1.items():
        dg[:, i] = sum(w * vals[:, k] for k, w in lst) / (12.0 * h)[:, None, None]
    for (i, j), lst in w2.items():
        den = 12.0 if i == j else 144.0
        d = sum(w * vals[:, k] for k, w in lst) / (den * h * h)[:, None, None]
        ddg[:, i, j] = d
        ddg[:, j, i] = d
    return g, dg, ddg


def metric_derivatives(gf: MetricField, x, step: float):
    """g, dg[m,i,j] = d_m g_ij and ddg[m,l,i,j] = d_m d_l g_ij at x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (gf.dim,):
        raise OracleError(f"point has shape {x.shape}, expected ({gf.dim},)")
    if not step > 0.0:
        raise OracleError("step must be positive")
    g, dg, ddg = metric_derivatives_batch(gf, x[None, :], step)
    g, dg, ddg = g[0], dg[0], ddg[0]
    ev = np.linalg.eigvalsh(0.5 * (g + g.T))
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(ddg))) or ev[0] <= max(gf.floor, 0.0):
        raise OracleError("singular or non-finite metric matrix")
    return g, dg, ddg


def _christoffel_parts(g, dg):
    ginv = np.linalg.inv(g)
    # first kind: G[l,i,j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    first = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)
    gamma = np.einsum("kl,lij->kij", ginv, first)
    return ginv, first, gamma


def christoffel(gf: MetricField, x, step: Optional[float] = None):
    """Gamma[k, i, j] = Gamma^k_ij by fourth-order central differences."""
    h = gf.default_step(x) if step is None else step
    g, dg, _ = metric_derivatives(gf, x, h)
    gamma = _christoffel_parts(g, dg)[2]
    return 0.5 * (gamma + np.swapaxes(gamma, 1, 2))


def _scal_from_derivs(g, dg, ddg):
    ginv, first, gamma = _christoffel_parts(g, dg)
    # d_m g^{kl} = -g^{ka} d_m g_ab g^{bl}
    dginv = -np.einsum("ka,mab,bl->mkl", ginv, dg, ginv)
    # d_m of the first-kind symbols
    dfirst = 0.5 * (np.einsum("milj->mlij", ddg) + np.einsum("mjli->mlij", ddg)
                    - np.einsum("mlij->mlij", ddg))
    dgamma = np.einsum("mkl,lij->mkij", dginv, first) + np.einsum("kl,mlij->mkij", ginv, dfirst)
    # R_ij = d_k G^k_ij - d_i G^k_kj + G^k_kl G^l_ij - G^k_il G^l_kj
    ric = (np.einsum("kkij->ij", dgamma) - np.einsum("ikkj->ij", dgamma)
           + np.einsum("kkl,lij->ij", gamma, gamma) - np.einsum("kil,lkj->ij", gamma, gamma))
    return float(np.einsum("ij,ij->", ginv, ric))


def scal_raw(gf: MetricField, x, step: float) -> float:
    """Scalar curvature from one step size (no extrapolation)."""
    return _scal_from_derivs(*metric_derivatives(gf, x, step))


def scal_fd(gf: MetricField, x, step: Optional[float] = None) -> float:
    """Richardson-extrapolated scalar curvature at ``x``."""
    h = gf.default_step(x) if step is None else step
    a = scal_raw(gf, x, h)
    b = scal_raw(gf, x, 0.5 * h)
    return (16.0 * b - a) / 15.0


def convergence_order(gf: MetricField, x, step: float) -> float:
    """Observed order from |S(h) - S(h/2)| / |S(h/2) - S(h/4)|."""
    s = [scal_raw(gf, x, step / 2**k) for k in range(3)]
    e1, e2 = abs(s[0] - s[1]), abs(s[1] - s[2])
    if e2 == 0.0:
        return float("inf")
    return float(np.log2(e1 / e2))


def mean_curvature_fd(gf: MetricField, x, level: Callable, step: Optional[float] = None) -> float:
    """Mean curvature div_g(nu) of the level set of ``level`` through ``x``.

    ``nu`` is the g-unit normal along grad ``level``; with this convention the
    unit sphere in Euclidean space has mean curvature n - 1.
    """
    x = np.asarray(x, dtype=float)
    n = gf.dim
    h = gf.default_step(x) if step is None else step

    def flux(p):
        # sqrt(det g) nu at the points p (N, n)
        g = gf.batch(p)
        ginv = np.linalg.inv(g)
        grad = np.empty_like(p)
        eps = 1e-3 * h
        for i in range(n):
            e = np.zeros(n)
            e[i] = eps
            grad[:, i] = (-level(p + 2 * e) + 8 * level(p + e) - 8 * level(p - e) + level(p - 2 * e)) / (12 * eps)
        up = np.einsum("nij,nj->ni", ginv, grad)
        norm = np.sqrt(np.einsum("ni,ni->n", up, grad))
        return np.sqrt(np.linalg.det(g))[:, None] * up / norm[:, None]

    def div(hh):
        eye = np.eye(n)
        pts = np.array([x + a * hh * eye[i] for i in range(n) for a, _ in _D1])
        if gf.inside is not None and not np.all(gf.inside(pts)):
            raise OracleError("finite-difference stencil exits the domain")
        fl = flux(pts).reshape(n, len(_D1), n)
        tot = 0.0
        for i in range(n):
            tot += sum(w * fl[i, k, i] for k, (_, w) in enumerate(_D1)) / (12.0 * hh)
        return tot / np.sqrt(np.linalg.det(gf(x)))

    a, b = div(h), div(0.5 * h)
    return float((16.0 * b - a) / 15.0)


@dataclass
class OracleReport:
    name: str
    points: int
    max_rel: float
    max_abs: float
    rows: list
    tol: float = PASS_TOL

    @property
    def passed(self) -> bool:
        return self.max_rel <= self.tol

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


def relative_deviation(fd: float, closed: float) -> float:
    """|fd - closed| / max(|closed|, 1): relative for large values, absolute near 0."""
    return abs(fd - closed) / max(abs(closed), 1.0)


def compare_closed_form(gf: MetricField, closed: Callable, points, step: Optional[float] = None,
                        name: str = "", tol: float = PASS_TOL) -> OracleReport:
    """Compare scal_fd with ``closed(x)`` at every point."""
    rows = []
    for x in points:
        x = np.asarray(x, dtype=float)
        fd = scal_fd(gf, x, step)
        cl = float(closed(x))
        rows.append((x, fd, cl, relative_deviation(fd, cl)))
    max_rel = max((r[3] for r in rows), default=0.0)
    max_abs = max((abs(r[1] - r[2]) for r in rows), default=0.0)
    return OracleReport(name or gf.name, len(rows), max_rel, max_abs, rows, tol)
