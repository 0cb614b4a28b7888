"""Certificates and regularity estimates for constructed metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .certificates import (BISECTION, CERTIFIED, CERTIFIED_ON_GRID, GRID_ONLY,
                           GRID_PADDING, INCONCLUSIVE, REFUTED_ON_GRID, Certificate,
                           combine)
from .interval import (DEFAULT_LEAF_BUDGET, DEFAULT_MAX_DEPTH, EnclosureFn,
                       Interval, certify_lower_bound)
from .oracle import MetricField, euclidean_field, metric_derivatives_batch
from .spheres import Round, ScaledRound, eigen_bounds_detail
from .warped import WarpedMetric, metric_field, scal_enclosure_fn, scal_point

EXHAUSTION_DEPTH = 20


def _subject(g: WarpedMetric) -> str:
    return f"{g.label}[n={g.n},h={g.h.tag}]"


def exhaustion_pieces(g: WarpedMetric, dom: Interval, depth: int = EXHAUSTION_DEPTH):
    """Compact pieces [lo + 2^-j, hi] (and symmetric at a singular right end)."""
    lo_open = g.singular_left and dom.lo <= g.domain.lo
    hi_open = g.singular_right and dom.hi >= g.domain.hi
    if not (lo_open or hi_open):
        return [dom]
    out = []
    for j in range(1, depth + 1):
        m = 2.0**-j
        a = dom.lo + m if lo_open else dom.lo
        b = dom.hi - m if hi_open else dom.hi
        if a < b:
            out.append(Interval(a, b))
    return out


def certify_scal_positive(g: WarpedMetric, dom: Optional[Interval] = None, target: float = 0.0,
                          depth: int = EXHAUSTION_DEPTH, max_depth: int = DEFAULT_MAX_DEPTH,
                          leaf_budget: int = DEFAULT_LEAF_BUDGET) -> Certificate:
    """Certificate that scal_g >= target on ``dom``.

    Open singular ends are handled by an exhaustion by compact pieces; the
    union statement carries the per-piece certificates as evidence.
    """
    dom = g.domain if dom is None else dom
    pieces = exhaustion_pieces(g, dom, depth)
    certs = []
    for piece in pieces:
        fn = scal_enclosure_fn(g, piece)
        certs.append(certify_lower_bound(fn, piece, target, max_depth, leaf_budget,
                                         claim=f"scal >= {target:g}", subject=_subject(g),
                                         params={"piece": [piece.lo, piece.hi]}))
    if len(certs) == 1:
        return certs[0]
    return combine(f"scal >= {target:g}", _subject(g), dom, target, certs,
                   params={"exhaustion_depth": depth, **_cap_params(g)})


def _cap_params(g: WarpedMetric) -> dict:
    keys = ("C", "R", "eps", "lambda", "lambda_gt_1", "L_min", "template")
    return {k: g.info[k] for k in keys if k in g.info}


def certify_derivative_chain(g: WarpedMetric, max_depth: int = DEFAULT_MAX_DEPTH):
    """(n-1)(n-2) f'^2 <= C/4 and 2(n-1) f f'' <= C/4 on the closed cap domain."""
    n, f = g.n, g.f
    C = g.info.get("C", g.h.scal_range().lo)
    quarter = C / 4.0
    dom = g.domain

    def slack1(t):
        return quarter - (n - 1) * (n - 2) * f.enclose(t, 1).sqr()

    def slack2(t):
        return quarter - 2.0 * (n - 1) * f.enclose(t, 0) * f.enclose(t, 2)

    out = []
    for name, fn in (("(n-1)(n-2) f'^2 <= C/4", slack1), ("2(n-1) f f'' <= C/4", slack2)):
        out.append(certify_lower_bound(EnclosureFn(dom, fn, name=name), dom, 0.0, max_depth,
                                       claim=name, subject=_subject(g), params=_cap_params(g)))
    return out


def certify_alpha_bounds(alpha, bounds, max_depth: int = 16):
    """-slope <= alpha' <= 0 and |alpha''| <= curvature on the alpha domain."""
    dom = alpha.domain
    tests = (
        ("alpha' >= -slope_bound", lambda t: alpha.enclose(t, 1) + bounds.slope_bound),
        ("alpha' <= 0", lambda t: -alpha.enclose(t, 1)),
        ("|alpha''| <= curvature_bound", lambda t: bounds.curvature_bound - alpha.enclose(t, 2).abs()),
    )
    return [certify_lower_bound(EnclosureFn(dom, fn, name=nm), dom, 0.0, max_depth, claim=nm,
                                subject="alpha") for nm, fn in tests]


# -- bilipschitz constants --------------------------------------------------------

def _is_isotropic(h):
    return isinstance(h, (Round, ScaledRound))


def _iso_factor(h):
    return h.exact_eigen_bounds().lo


def _lin_slope(g: WarpedMetric):
    """Slope k when f(t) = k (t - tip) on the whole domain, else None."""
    from .profiles import Linear

    if len(g.f.pieces) == 1 and isinstance(g.f.pieces[0], Linear) and g.f.pieces[0].root == g.origin:
        return g.f.pieces[0].slope
    return None


def _sandwich_cert(rel: Interval, method: str, samples: int, subject: str, evidence: dict):
    lam_hi = max(rel.hi, 1.0 / rel.lo, 1.0)
    status = CERTIFIED if method == GRID_PADDING else CERTIFIED_ON_GRID
    return Certificate(claim="bilipschitz", subject=subject, domain="all points",
                       target=lam_hi, achieved=Interval(1.0, lam_hi) if lam_hi > 1.0 else Interval(1.0),
                       method=method, status=status, samples=samples,
                       params={"Lambda": lam_hi, "relative_eigen": [rel.lo, rel.hi], **evidence})


def bilipschitz_constant(g, g0=None, region=None, samples: int = 4096, seed: int = 0) -> Certificate:
    """Smallest Lambda with Lambda^{-1} g0 <= g <= Lambda g0.

    Cones t^2 h + dt^2 against the Euclidean metric (and pairs of warped
    metrics sharing f with an isotropic reference) reduce to the eigenvalue
    bounds of h against the round metric; ``achieved`` is [1, Lambda] and
    the relative eigenvalue range is recorded. Other pairs are sampled.
    """
    # Lemma-type reductions
    if isinstance(g, WarpedMetric) and g0 is None and _lin_slope(g) == 1.0:
        eb = eigen_bounds_detail(g.h, samples)
        rel = eb.padded.hull(Interval(1.0))
        return _sandwich_cert(rel, eb.method, eb.samples, _subject(g),
                              {"reduction": "cone-vs-euclidean", "sampled": [eb.sampled.lo, eb.sampled.hi],
                               "padding": eb.padding})
    if isinstance(g0, WarpedMetric) and g is None:
        return bilipschitz_constant(g0, None, region, samples, seed)
    if (isinstance(g, WarpedMetric) and isinstance(g0, WarpedMetric) and g.f == g0.f
            and g.conformal is None and g0.conformal is None):
        if _is_isotropic(g0.h):
            eb = eigen_bounds_detail(g.h, samples)
            c = _iso_factor(g0.h)
            rel = Interval(eb.padded.lo / c, eb.padded.hi / c).hull(Interval(1.0))
            return _sandwich_cert(rel, eb.method, eb.samples, _subject(g),
                                  {"reduction": "shared-warping", "sampled": [eb.sampled.lo, eb.sampled.hi]})
        if _is_isotropic(g.h):
            return bilipschitz_constant(g0, g, region, samples, seed)
    # generic: sample both fields
    gf = metric_field(g) if isinstance(g, WarpedMetric) else g
    if g0 is None:
        g0f = euclidean_field(gf.dim)
    else:
        g0f = metric_field(g0) if isinstance(g0, WarpedMetric) else g0
    pts = _region_samples(gf, region, samples, seed)
    A = gf.batch(pts)
    B = g0f.batch(pts)
    L = np.linalg.cholesky(B)
    Linv = np.linalg.inv(L)
    M = Linv @ A @ np.swapaxes(Linv, 1, 2)
    ev = np.linalg.eigvalsh(0.5 * (M + np.swapaxes(M, 1, 2)))
    if np.any(ev <= 0.0):
        raise ValueError("degenerate metric matrix in the sample")
    rel = Interval(float(ev.min()), float(ev.max()))
    return _sandwich_cert(rel, GRID_ONLY, len(pts), getattr(gf, "name", "g"), {"reduction": "sampled"})


def _region_samples(gf: MetricField, region, samples, seed):
    rng = np.random.default_rng(seed)
    n = gf.dim
    if region is None:
        region = {"center": np.zeros(n), "r_min": 1e-3, "r_max": gf.info.get("r_max", 1.0)}
    c = np.asarray(region.get("center", np.zeros(n)), dtype=float)
    d = rng.standard_normal((samples, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = np.exp(rng.uniform(math.log(region["r_min"]), math.log(region["r_max"]), samples))
    return c + r[:, None] * d


# -- derivative tables, Sobolev norms and blow-up slopes ----------------------------

NOISE_FLOOR = 1e-9
CHUNK = 32


def _sphere_dirs(n, count, seed=0):
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((count, n))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def _as_field(g) -> MetricField:
    return metric_field(g) if isinstance(g, WarpedMetric) else g


def derivative_magnitudes(g, radii, dirs, center=None):
    """Per point: |g_ij|, |d g_ij| and |dd g_ij| as (3, R, D, n^2 or more) arrays.

    Values below NOISE_FLOOR times the natural scale r^-k are set to zero.
    """
    gf = _as_field(g)
    n = gf.dim
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    radii = np.asarray(radii, dtype=float)
    X = c + (radii[:, None, None] * dirs[None, :, :]).reshape(-1, n)
    steps = np.array([gf.default_step(x) for x in X])
    rr = np.repeat(radii, len(dirs))
    a0 = np.empty((len(X), n * n))
    a1 = np.empty((len(X), n**3))
    a2 = np.empty((len(X), n**4))
    for i in range(0, len(X), CHUNK):
        sl = slice(i, i + CHUNK)
        g0, dg, ddg = metric_derivatives_batch(gf, X[sl], steps[sl])
        a0[sl] = np.abs(g0).reshape(len(g0), -1)
        a1[sl] = np.abs(dg).reshape(len(g0), -1)
        a2[sl] = np.abs(ddg).reshape(len(g0), -1)
    a1 = np.where(a1 < NOISE_FLOOR / rr[:, None], 0.0, a1)
    a2 = np.where(a2 < NOISE_FLOOR / rr[:, None] ** 2, 0.0, a2)
    shape = (len(radii), len(dirs))
    return a0.reshape(shape + (-1,)), a1.reshape(shape + (-1,)), a2.reshape(shape + (-1,))


@dataclass
class SobolevEstimate:
    p: float
    k: int
    norm_value: float
    finite: bool
    status: str
    table: list = field(default_factory=list)
    ratio: float = math.nan


@dataclass
class _SobolevData:
    n: int
    radii: np.ndarray
    weights: np.ndarray
    annulus: np.ndarray
    mags: tuple


_SOBOLEV_CACHE: dict = {}


def _sobolev_data(g, annuli: int, order: int, dirs: int, seed: int):
    key = (id(g), annuli, order, dirs, seed)
    if key in _SOBOLEV_CACHE and _SOBOLEV_CACHE[key][0] is g:
        return _SOBOLEV_CACHE[key][1]
    gf = _as_field(g)
    n = gf.dim
    nodes, w = np.polynomial.legendre.leggauss(order)
    radii, weights, idx = [], [], []
    for j in range(annuli):
        a, b = 2.0 ** -(j + 1), 2.0**-j
        r = 0.5 * (b - a) * nodes + 0.5 * (b + a)
        radii.append(r)
        weights.append(0.5 * (b - a) * w)
        idx.append(np.full(order, j))
    radii, weights, idx = map(np.concatenate, (radii, weights, idx))
    D = _sphere_dirs(n, dirs, seed)
    mags = derivative_magnitudes(gf, radii, D)
    data = _SobolevData(n, radii, weights, idx, mags)
    _SOBOLEV_CACHE[key] = (g, data)
    return data


def sobolev_norm(g, p: float, k: int = 2, annuli: int = 40, order: int = 16, dirs: int = 24,
                 seed: int = 0) -> SobolevEstimate:
    """Dyadic-annulus estimate of sum_{|beta|<=k} int_{|x|<1} |d^beta g_ij|^{p/2} dx.

    Annulus j is 2^-(j+1) < |x| < 2^-j; radial Gauss-Legendre nodes times a
    sphere average. ``finite`` follows a ratio test on the innermost annuli.
    """
    if not p > 0.0:
        raise ValueError("p must be positive")
    d = _sobolev_data(g, annuli, order, dirs, seed)
    n = d.n
    q = p / 2.0
    dens = sum(np.sum(d.mags[i] ** q, axis=-1) for i in range(k + 1))  # (R, D)
    area = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
    radial = dens.mean(axis=1) * area * d.radii ** (n - 1) * d.weights
    contrib = np.bincount(d.annulus, weights=radial, minlength=annuli)
    table = [{"annulus": j, "r_outer": 2.0**-j, "contribution": float(contrib[j]),
              "sup_d1": float(d.mags[1][d.annulus == j].max()),
              "sup_d2": float(d.mags[2][d.annulus == j].max())} for j in range(annuli)]
    total = float(contrib.sum())
    if not np.all(np.isfinite(contrib)):
        return SobolevEstimate(p, k, math.inf, False, "indeterminate", table)
    tail = contrib[annuli // 2:]
    pos = tail[tail > 0.0]
    if len(pos) < 2:
        # derivative terms vanish: only the bounded |g_ij|^{p/2} term remains
        return SobolevEstimate(p, k, total, True, "finite", table, 0.0)
    ratios = pos[1:] / pos[:-1]
    rho = float(np.exp(np.mean(np.log(ratios)))) if len(ratios) else math.nan
    spread = float(np.std(np.log(ratios))) if len(ratios) else math.inf
    if spread > 0.1:
        status = "indeterminate"
    elif rho < 0.99:
        status = "finite"
    else:
        status = "divergent"
    if status == "finite":
        # geometric tail beyond the last annulus
        total += float(contrib[-1] * rho / (1.0 - rho))
    return SobolevEstimate(p, k, total, status == "finite", status, table, rho)


def sobolev_certificate(g, p: float, **kw) -> Certificate:
    """Grid verdict on the expected W^{2,p/2} behaviour of ``g`` near the origin.

    Finiteness is expected for p < n. For p >= n divergence is expected when
    first derivatives do not vanish identically (a genuinely conical field),
    finiteness otherwise.
    """
    est = sobolev_norm(g, p, **kw)
    n = _as_field(g).dim
    nontrivial = any(row["sup_d1"] > 0.0 for row in est.table)
    expect = "finite" if (p < n or not nontrivial) else "divergent"
    if est.status == "indeterminate":
        status = INCONCLUSIVE
    elif est.status == expect:
        status = CERTIFIED_ON_GRID
    else:
        status = REFUTED_ON_GRID
    value = est.norm_value if est.finite else math.inf
    subject = _subject(g) if isinstance(g, WarpedMetric) else getattr(g, "name", "g")
    return Certificate(
        claim=f"sobolev-{expect}", subject=subject, domain=Interval(0.0, 1.0), target=p,
        achieved=Interval(value), method=GRID_ONLY, status=status, samples=len(est.table),
        params={"p": p, "k": est.k, "estimate": est.status, "ratio": est.ratio, "expected": expect})


@dataclass
class BlowupSlope:
    k: int
    slope: float
    status: str
    radii: np.ndarray
    sups: np.ndarray


def blowup_slope(g, k: int, radii=None, dirs: int = 48, discard: int = 4, seed: int = 0) -> BlowupSlope:
    """Least-squares slope of log sup_{|x|=r} |d^k g| against log r.

    The ``discard`` outermost and innermost radii are left out of the fit.
    """
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    radii = 2.0 ** -np.arange(1, 39) if radii is None else np.asarray(radii, dtype=float)
    gf = _as_field(g)
    mags = derivative_magnitudes(gf, radii, _sphere_dirs(gf.dim, dirs, seed))[k]
    sups = mags.max(axis=(1, 2))
    if np.all(sups == 0.0):
        return BlowupSlope(k, math.nan, "undefined-zero-field", radii, sups)
    order = np.argsort(radii)
    r, s = radii[order], sups[order]
    keep = slice(discard, len(r) - discard)
    slope = float(np.polyfit(np.log(r[keep]), np.log(s[keep]), 1)[0])
    return BlowupSlope(k, slope, "ok", radii, sups)


@dataclass
class ScalRate:
    slope: float
    prefactor_min: float
    half_lambda_sq: float
    passed: bool


def scal_blowup_rate(g: WarpedMetric, radii=None, tol: float = 0.05) -> ScalRate:
    """Slope of log scal vs log r and min of scal r^2 (>= lambda^2/2 expected)."""
    lam = g.info.get("lambda", math.nan)
    top = g.domain.hi - g.origin
    radii = top * 2.0 ** -np.arange(1, 31) if radii is None else np.asarray(radii, dtype=float)
    sc = scal_point(g, radii + g.origin)
    slope = float(np.polyfit(np.log(radii), np.log(sc), 1)[0])
    pref = float(np.min(sc * radii**2))
    half = 0.5 * lam * lam
    return ScalRate(slope, pref, half, abs(slope + 2.0) <= tol and pref >= half * (1 - 1e-12))


def inconclusive(cert: Certificate) -> bool:
    return cert.status == INCONCLUSIVE


__all__ = [
    "BISECTION", "BlowupSlope", "SobolevEstimate", "bilipschitz_constant", "blowup_slope",
    "certify_alpha_bounds", "certify_derivative_chain", "certify_scal_positive",
    "exhaustion_pieces", "scal_blowup_rate", "sobolev_certificate", "sobolev_norm",
]
