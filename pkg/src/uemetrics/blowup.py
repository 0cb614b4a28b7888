"""Green-type functions of the modified conformal Laplacian on radial models
and the conformal blow-up (1 + eps G)^{4/(n-2)} g.

The radial equation is -a (G'' + (n-1) (f'/f) G') + sigma G = 0 with
a = 4(n-1)/(n-2). Integrating outward from the tip amplifies errors like
(r/r_start)^{n-2}, so the solver integrates inward in s = ln r for the
log-derivative psi = r G'/G, which is attracted to 2 - n near the tip:

    d psi/ds = psi + r^2 sigma/a - (n-1) r (f'/f) psi - psi^2,
    d L/ds   = psi + n - 2,          L = ln(r^{n-2} G).

The Dirac normalization fixes lim r^{n-2} G through the two-term expansion
G ~ A r^{2-n} (1 + c r^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .certificates import (CERTIFIED_ON_GRID, GRID_ONLY, REFUTED_ON_GRID,
                           Certificate)
from .interval import Interval
from .warped import WarpedMetric, scal_conformal, scal_point

EXPONENT_TOL = 0.05


class GreenSolverError(RuntimeError):
    pass


def conformal_constant(n: int) -> float:
    return 4.0 * (n - 1) / (n - 2)


def sphere_volume(m: int) -> float:
    """Volume of the round unit S^m."""
    return 2.0 * math.pi ** ((m + 1) / 2.0) / math.gamma((m + 1) / 2.0)


def dirac_constant(n: int) -> float:
    """lim r^{n-2} G for the Euclidean Dirac normalization of L_sigma."""
    return 1.0 / ((n - 2) * sphere_volume(n - 1) * conformal_constant(n))


def _sigma_fn(sigma) -> Callable:
    if callable(sigma):
        return sigma
    s = float(sigma)
    return lambda r: np.full_like(np.asarray(r, dtype=float), s) if np.ndim(r) else s


def default_sigma(g: WarpedMetric, radii) -> float:
    """1/2 min(1, inf scal_g) over the given radii."""
    scal = scal_point(g, np.asarray(radii, dtype=float) + g.origin)
    return 0.5 * min(1.0, float(np.min(scal)))


def default_grid(g: WarpedMetric, points: int = 400, decades: float = 4.0):
    top = g.domain.hi - g.origin
    return top * np.logspace(-decades, 0.0, points)


@dataclass
class RadialGreenFunction:
    n: int
    grid: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    second: np.ndarray
    sigma: Callable
    kappa: float
    c_fit: float
    p_fit: float
    normalization: str
    expansion_c: float
    r_start: float
    r_top: float
    origin: float = 0.0
    info: dict = field(default_factory=dict)
    _dense: Optional[Callable] = field(default=None, repr=False)
    _f: Optional[object] = field(default=None, repr=False)

    def _psi_L(self, r):
        s = np.log(r)
        y = self._dense(s)
        return y[0], y[1]

    def __call__(self, r, k: int = 0):
        return self.evaluate(r, k)

    def evaluate(self, r, k: int = 0):
        """G^(k)(r) for k in 0..2; below r_start the expansion is used."""
        scalar = np.ndim(r) == 0
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r <= 0.0) or np.any(r > self.r_top * (1 + 1e-12)):
            raise ValueError("radius outside (0, T]")
        p = 2.0 - self.n
        out = np.empty((3, r.size))
        low = r < self.r_start
        if np.any(low):
            rl = r[low]
            c = self.expansion_c
            out[0, low] = self.kappa * rl**p * (1.0 + c * rl**2)
            out[1, low] = self.kappa * (p * rl ** (p - 1) + c * (p + 2) * rl ** (p + 1))
            out[2, low] = self.kappa * (p * (p - 1) * rl ** (p - 2) + c * (p + 2) * (p + 1) * rl**p)
        hi = ~low
        if np.any(hi):
            rh = np.minimum(r[hi], self.r_top)
            psi, L = self._psi_L(rh)
            G = self.kappa * np.exp(L - self.info["L_inf"]) * rh**p
            G1 = psi * G / rh
            t = rh + self.origin
            fr = self._f.evaluate(t, 1) / self._f.evaluate(t, 0)
            G2 = self.sigma(rh) / conformal_constant(self.n) * G - (self.n - 1) * fr * G1
            out[:, hi] = G, G1, G2
        v = out[k]
        return float(v[0]) if scalar else v


def _b1(g: WarpedMetric, r_top: float) -> float:
    """lim (f'/f - 1/r)/r at the tip."""
    r = 1e-3 * min(r_top, 1.0)
    t = g.origin + r
    return (g.f.evaluate(t, 1) / g.f.evaluate(t, 0) - 1.0 / r) / r


def _rhs(g: WarpedMetric, sigma: Callable, n: int):
    a = conformal_constant(n)
    tip = g.origin

    def rhs(s, y):
        r = math.exp(s)
        psi = y[0]
        t = tip + r
        rf = r * g.f.evaluate(t, 1) / g.f.evaluate(t, 0)
        dpsi = psi + r * r * float(sigma(r)) / a - (n - 1) * rf * psi - psi * psi
        return np.array([dpsi, psi + n - 2.0])

    return rhs


def _rk4(rhs, s0, s1, y0, steps):
    h = (s1 - s0) / steps
    s, y = s0, np.array(y0, dtype=float)
    for _ in range(steps):
        k1 = rhs(s, y)
        k2 = rhs(s + h / 2, y + h / 2 * k1)
        k3 = rhs(s + h / 2, y + h / 2 * k2)
        k4 = rhs(s + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        s += h
    return y


def solve_green(g: WarpedMetric, sigma=None, grid=None, normalization: str = "dirac",
                rtol: float = 1e-10, atol: float = 1e-12) -> RadialGreenFunction:
    """Radial Green-type function of -a Delta + sigma with the pole at the tip.

    At the outer radius the solution matches the exterior decay
    r G'/G = 2 - n, which makes r^{2-n} exact for sigma = 0 on flat cones.
    """
    if not g.singular_left:
        raise ValueError("the model needs a cone tip at the left end")
    if normalization not in ("dirac", "unit"):
        raise ValueError("normalization must be 'dirac' or 'unit'")
    n = g.n
    grid = default_grid(g) if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0.0) or grid[0] <= 0.0:
        raise ValueError("grid must be strictly increasing positive radii")
    r_top = g.domain.hi - g.origin
    if grid[-1] > r_top * (1 + 1e-12):
        raise ValueError("grid exceeds the model's radial range")
    if g.singular_right:
        # closed models (sine): start the inward sweep at the last grid radius
        if grid[-1] >= r_top:
            raise ValueError("grid must stay below the far singular end")
        r_top = float(grid[-1])
    sig = _sigma_fn(default_sigma(g, grid) if sigma is None else sigma)
    sv = np.asarray([float(sig(r)) for r in grid])
    scal = scal_point(g, grid + g.origin)
    if np.any(sv < 0.0) or np.any(sv > np.minimum(1.0, scal) * (1 + 1e-12) + 1e-15):
        raise ValueError("sigma must satisfy 0 <= sigma <= min(1, scal_g)")

    r_start = grid[0] / 10.0
    a = conformal_constant(n)
    b1 = _b1(g, r_top)
    c = 0.0 if n == 4 else (float(sig(r_start)) / a - (n - 1) * (2 - n) * b1) / (2.0 * (4 - n))
    rhs = _rhs(g, sig, n)
    s_top, s_low = math.log(r_top), math.log(r_start)
    sol = solve_ivp(rhs, (s_top, s_low), [2.0 - n, 0.0], method="DOP853",
                    rtol=rtol, atol=atol, dense_output=True)
    if not sol.success:
        raise GreenSolverError(f"ODE integration failed: {sol.message}")
    L_low = sol.y[1, -1]
    L_inf = L_low - math.log1p(c * r_start**2)
    kappa = dirac_constant(n) if normalization == "dirac" else 1.0
    info = {"L_inf": float(L_inf), "b1": b1, "nfev": int(sol.nfev), "rtol": rtol}
    G = RadialGreenFunction(n, grid, np.empty(0), np.empty(0), np.empty(0), sig, kappa,
                            math.nan, math.nan, normalization, c, r_start, r_top,
                            g.origin, info, sol.sol, g.f)
    G.values = G.evaluate(grid, 0)
    G.derivs = G.evaluate(grid, 1)
    G.second = G.evaluate(grid, 2)
    if np.any(G.values <= 0.0):
        raise GreenSolverError("computed G is not positive on the grid")
    inner = grid <= grid[0] * 10.0
    if inner.sum() < 3:
        inner = np.arange(len(grid)) < max(3, len(grid) // 4)
    p_fit, logc = np.polyfit(np.log(grid[inner]), np.log(G.values[inner]), 1)
    G.p_fit, G.c_fit = float(p_fit), float(math.exp(logc))
    return G


def terminal_log_amplitude(g: WarpedMetric, sigma: float, steps: int) -> float:
    """L at r_start from fixed-step RK4 (used to measure the integrator order)."""
    r_top = g.domain.hi - g.origin
    rhs = _rhs(g, _sigma_fn(sigma), g.n)
    y = _rk4(rhs, math.log(r_top), math.log(r_top * 1e-3), [2.0 - g.n, 0.0], steps)
    return float(y[1])


def ode_residual(G: RadialGreenFunction, g: WarpedMetric, h_rel: float = 1e-3) -> float:
    """Relative residual of the radial equation from finite differences of G."""
    n = g.n
    a = conformal_constant(n)
    r = G.grid[(G.grid > G.grid[0] * 1.01) & (G.grid < G.r_top * 0.99)]
    h = h_rel * r
    Gm2, Gm1, G0, Gp1, Gp2 = (G.evaluate(r + k * h) for k in (-2, -1, 0, 1, 2))
    d1 = (Gm2 - 8 * Gm1 + 8 * Gp1 - Gp2) / (12 * h)
    d2 = (-Gm2 + 16 * Gm1 - 30 * G0 + 16 * Gp1 - Gp2) / (12 * h * h)
    t = r + g.origin
    fr = g.f.evaluate(t, 1) / g.f.evaluate(t, 0)
    sig = np.asarray([float(G.sigma(x)) for x in r])
    res = -a * (d2 + (n - 1) * fr * d1) + sig * G0
    scale = a * (np.abs(d2) + (n - 1) * np.abs(fr * d1)) + np.abs(sig * G0)
    return float(np.max(np.abs(res) / scale))


def verify_green_bounds(G: RadialGreenFunction) -> Certificate:
    """Smallest c >= 1 with c^{-1} r^{2-n} <= G <= c r^{2-n} on the grid."""
    ratio = G.values * G.grid ** (G.n - 2.0)
    ok = np.all(np.isfinite(ratio)) and np.all(ratio > 0.0)
    c = float(max(np.max(ratio), np.max(1.0 / ratio))) if ok else math.inf
    c = max(c, 1.0)
    drift = abs(G.p_fit - (2.0 - G.n))
    status = CERTIFIED_ON_GRID if (ok and drift <= EXPONENT_TOL) else REFUTED_ON_GRID
    return Certificate(
        claim="green-two-sided-bound", subject=f"G[n={G.n},{G.normalization}]",
        domain=Interval(float(G.grid[0]), float(G.grid[-1])), target=1.0,
        achieved=Interval(c), method=GRID_ONLY, status=status, samples=len(G.grid),
        params={"c": c, "p_fit": G.p_fit, "c_fit": G.c_fit, "normalization": G.normalization},
    )


@dataclass(frozen=True)
class GreenConformal:
    """u = 1 + eps G as a radial profile in t (floating point, not certified)."""

    G: RadialGreenFunction
    eps: float
    label: str = "u"
    certified = False

    def evaluate(self, t, k: int = 0):
        r = np.asarray(t, dtype=float) - self.G.origin
        v = self.eps * self.G.evaluate(r, k)
        return v + 1.0 if k == 0 else v

    def enclose(self, t: Interval, k: int = 0) -> Interval:
        vals = [float(self.evaluate(x, k)) for x in (t.lo, t.mid, t.hi)]
        return Interval(min(vals), max(vals))

    def knot_distance(self, t):
        return np.full_like(t, np.inf, dtype=float) if isinstance(t, np.ndarray) else math.inf

    def describe(self):
        return {"kind": "one-plus-eps-green", "eps": self.eps, "normalization": self.G.normalization}


def blowup_metric(g: WarpedMetric, G: RadialGreenFunction, eps: float) -> WarpedMetric:
    """(1 + eps G)^{4/(n-2)} g; eps = 0 returns g."""
    if eps < 0.0:
        raise ValueError("eps must be >= 0")
    if eps == 0.0:
        return g
    return WarpedMetric(g.n, g.f, g.h, g.domain, GreenConformal(G, eps), f"{g.label}-blowup",
                        {**g.info, "eps": eps})


def conformal_identity(g: WarpedMetric, G: RadialGreenFunction, eps: float):
    """Closed-form scal of the blow-up against the identity
    (1+eps G)^{-(n+2)/(n-2)} (scal + eps (scal - sigma) G) at grid points.

    Returns (radii, scal_blowup, identity_value, residual relative to max(|identity|, 1)).
    """
    n = g.n
    ge = blowup_metric(g, G, eps)
    r = G.grid
    t = r + g.origin
    ok = (t > g.domain.lo) & (t <= g.domain.hi)
    r, t = r[ok], t[ok]
    lhs = np.array([scal_conformal(ge, Interval(x)).mid for x in t])
    sc = scal_point(g, t)
    Gv = G.evaluate(r)
    sig = np.asarray([float(G.sigma(x)) for x in r])
    rhs = (1.0 + eps * Gv) ** (-(n + 2.0) / (n - 2.0)) * (sc + eps * (sc - sig) * Gv)
    # relative where |rhs| >= 1, absolute near zero (flat models)
    rel = np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1.0)
    return r, lhs, rhs, rel


@dataclass
class CompletenessReport:
    radii: np.ndarray
    lengths: np.ndarray
    increments: np.ndarray
    slope: float
    law: str
    passed: bool

    @property
    def verdict(self):
        return "PASS" if self.passed else "FAIL"


def _radial_integrand(g: WarpedMetric, r):
    if g.conformal is None:
        return np.ones_like(r)
    u = g.conformal.evaluate(r + g.origin, 0)
    return u ** (2.0 / (g.n - 2))


def completeness_check(g_eps: WarpedMetric, radii=None, order: int = 16,
                       slope_target: float = -1.0, slope_tol: float = 0.1) -> CompletenessReport:
    """Radial lengths int_{r_k}^{T} u^{2/(n-2)} dr for dyadic r_k -> 0.

    The slope of log(shell length) against log r_k measures the divergence
    law; PASS iff lengths grow without bound at the target rate.
    """
    top = g_eps.domain.hi - g_eps.origin
    radii = top * 2.0 ** -np.arange(1, 31) if radii is None else np.sort(np.asarray(radii, float))[::-1]
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.concatenate([[top], radii])
    inc = np.empty(len(radii))
    for k in range(len(radii)):
        s0, s1 = math.log(edges[k + 1]), math.log(edges[k])
        s = 0.5 * (s1 - s0) * nodes + 0.5 * (s1 + s0)
        r = np.exp(s)
        inc[k] = 0.5 * (s1 - s0) * np.sum(weights * _radial_integrand(g_eps, r) * r)
    lengths = np.cumsum(inc)
    tail = slice(len(radii) // 2, None)
    slope = float(np.polyfit(np.log(radii[tail]), np.log(inc[tail]), 1)[0])
    growing = lengths[-1] > 4.0 * lengths[len(radii) // 2]
    passed = bool(growing and abs(slope - slope_target) <= slope_tol)
    law = f"shell length ~ r^{slope:.3f}, total length ~ r^{min(slope, 0.0):.3f}"
    return CompletenessReport(radii, lengths, inc, slope, law, passed)
