"""Radial warping profiles with value and derivative enclosures.

A profile is an ordered tiling of its domain by closed-form pieces. Every
piece answers two kinds of queries for derivative orders 0..3:

* ``enclose(T, k)``: an Interval containing the k-th derivative on ``T``;
* ``evaluate(t, k)``: a float (or numpy array) for pointwise use.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from .interval import Interval

MAX_ORDER = 3


class Poly:
    """Polynomial with exact float coefficients (highest degree first).

    ``crit`` holds Interval enclosures of the real critical points in the
    region of interest; the range on ``U`` is the hull of the endpoint values
    and the values on critical enclosures meeting ``U``.
    """

    def __init__(self, coeffs, crit=()):
        self.coeffs = [float(c) for c in coeffs]
        self.crit = tuple(crit)

    def horner(self, u):
        acc = self.coeffs[0]
        if isinstance(u, Interval):
            acc = Interval.point(acc)
        for c in self.coeffs[1:]:
            acc = acc * u + c
        return acc

    def __call__(self, u):
        if isinstance(u, Interval):
            return self.enclose(u)
        return np.polyval(self.coeffs, u) if isinstance(u, np.ndarray) else self.horner(u)

    def enclose(self, u: Interval) -> Interval:
        parts = [self.horner(Interval.point(u.lo)), self.horner(Interval.point(u.hi))]
        for c in self.crit:
            cu = c.intersect(u)
            if cu is not None:
                parts.append(self.horner(cu))
        return Interval.hull_of(parts)

    def derivative(self, crit=()):
        deg = len(self.coeffs) - 1
        if deg == 0:
            return Poly([0.0], crit)
        return Poly([c * (deg - i) for i, c in enumerate(self.coeffs[:-1])], crit)


def _quintic_family():
    sqrt3 = Interval(3.0).sqrt()
    c_lo = (3.0 - sqrt3) / 6.0
    c_hi = (3.0 + sqrt3) / 6.0
    zero, half, one = Interval(0.0), Interval(0.5), Interval(1.0)
    s0 = Poly([6, -15, 10, 0, 0, 0], crit=(zero, one))
    s1 = s0.derivative(crit=(zero, half, one))
    s2 = s1.derivative(crit=(c_lo, c_hi))
    s3 = s2.derivative(crit=(half,))
    return (s0, s1, s2, s3)


class Template:
    """A monotone transition u -> s(u) from 0 (u<=0) to 1 (u>=1)."""

    name = "template"
    # certified (quintic) or estimated (smooth) extrema of |s'| and |s''|
    a1 = math.nan
    a2 = math.nan
    certified = False
    smoothness = 0

    def enclose(self, u: Interval, k: int) -> Interval:
        raise NotImplementedError

    def evaluate(self, u, k):
        raise NotImplementedError


class QuinticSmoothstep(Template):
    """s(u) = 6u^5 - 15u^4 + 10u^3; C^2 joins with the constant extensions."""

    name = "quintic"
    a1 = 15.0 / 8.0
    a2 = 10.0 / math.sqrt(3.0)
    certified = True
    smoothness = 2

    def __init__(self):
        self.polys = _quintic_family()

    def _clip(self, u: Interval, k):
        parts = []
        if u.lo < 0.0:
            parts.append(Interval(0.0))
        if u.hi > 1.0:
            parts.append(Interval(1.0) if k == 0 else Interval(0.0))
        inner = u.intersect(Interval(0.0, 1.0))
        return parts, inner

    def enclose(self, u, k):
        parts, inner = self._clip(u, k)
        if inner is not None:
            parts.append(self.polys[k].enclose(inner))
        return Interval.hull_of(parts)

    def evaluate(self, u, k):
        u_arr = np.asarray(u, dtype=float)
        uc = np.clip(u_arr, 0.0, 1.0)
        out = np.polyval(self.polys[k].coeffs, uc)
        if k > 0:
            out = np.where((u_arr < 0.0) | (u_arr > 1.0), 0.0, out)
        return out if isinstance(u, np.ndarray) else float(out)


class SmoothTransition(Template):
    """C-infinity transition 1/(1 + exp(w)), w = 1/u - 1/(1-u).

    Extrema are estimated by dense sampling, not certified.
    """

    name = "smooth"
    certified = False
    smoothness = 10**9
    _EDGE = 0.01
    _EDGE_BOUND = 1e-30  # |s^(k)| on [0, 0.01] for k <= 3 is far below this

    def __init__(self):
        u = np.linspace(0.0, 1.0, 200001)
        self.a1 = float(np.max(np.abs(self.evaluate(u, 1))))
        self.a2 = float(np.max(np.abs(self.evaluate(u, 2))))

    @staticmethod
    def _derivs(u):
        # works for floats, arrays and Intervals
        v = 1.0 - u
        w = 1.0 / u - 1.0 / v
        w1 = -(1.0 / (u * u)) - 1.0 / (v * v)
        w2 = 2.0 / (u * u * u) - 2.0 / (v * v * v)
        w3 = -(6.0 / (u * u * u * u)) - 6.0 / (v * v * v * v)
        return w, w1, w2, w3

    def _scalar(self, u, k):
        if isinstance(u, Interval):
            if u.hi <= self._EDGE:
                return Interval(0.0, self._EDGE_BOUND) if k == 0 else Interval(-self._EDGE_BOUND, self._EDGE_BOUND)
            if u.lo >= 1.0 - self._EDGE:
                return (Interval(1.0 - self._EDGE_BOUND, 1.0) if k == 0
                        else Interval(-self._EDGE_BOUND, self._EDGE_BOUND))
        w, w1, w2, w3 = self._derivs(u)
        e = w.exp() if isinstance(u, Interval) else np.exp(np.clip(w, -700, 700))
        t = 1.0 / (1.0 + e)
        q = t * (1.0 - t)
        if k == 0:
            return t
        t1 = -(q * w1)
        if k == 1:
            return t1
        q1 = t1 * (1.0 - 2.0 * t)
        t2 = -(q1 * w1 + q * w2)
        if k == 2:
            return t2
        q2 = t2 * (1.0 - 2.0 * t) - 2.0 * t1 * t1
        return -(q2 * w1 + 2.0 * q1 * w2 + q * w3)

    def enclose(self, u, k):
        parts = []
        if u.lo < 0.0:
            parts.append(Interval(0.0))
        if u.hi > 1.0:
            parts.append(Interval(1.0) if k == 0 else Interval(0.0))
        inner = u.intersect(Interval(0.0, 1.0))
        if inner is not None:
            pieces = [inner]
            edges = (self._EDGE, 1.0 - self._EDGE)
            for e in edges:
                nxt = []
                for p in pieces:
                    if p.lo < e < p.hi:
                        nxt += [Interval(p.lo, e), Interval(e, p.hi)]
                    else:
                        nxt.append(p)
                pieces = nxt
            for p in pieces:
                parts.append(self._scalar(p, k))
        return Interval.hull_of(parts)

    def evaluate(self, u, k):
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.zeros_like(u_arr)
        inside = (u_arr > 0.0) & (u_arr < 1.0)
        if k == 0:
            out[u_arr >= 1.0] = 1.0
        if np.any(inside):
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                vals = self._scalar(u_arr[inside], k)
            out[inside] = np.nan_to_num(vals, nan=0.0, posinf=0.0, neginf=0.0)
        return out if isinstance(u, np.ndarray) else float(out[0])


QUINTIC = QuinticSmoothstep()
_TEMPLATES = {"quintic": QUINTIC}


def get_template(name: str) -> Template:
    if name not in _TEMPLATES:
        if name == "smooth":
            _TEMPLATES[name] = SmoothTransition()
        else:
            raise KeyError(f"unknown transition template {name!r}")
    return _TEMPLATES[name]


# -- pieces ------------------------------------------------------------------

class Piece:
    kind = "piece"

    def enclose(self, t: Interval, k: int) -> Interval:
        raise NotImplementedError

    def evaluate(self, t, k):
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class Constant(Piece):
    c: float
    kind = "constant"

    def enclose(self, t, k):
        return Interval(self.c) if k == 0 else Interval(0.0)

    def evaluate(self, t, k):
        v = self.c if k == 0 else 0.0
        return np.full_like(t, v, dtype=float) if isinstance(t, np.ndarray) else v

    def describe(self):
        return {"kind": self.kind, "c": self.c}


@dataclass(frozen=True)
class Linear(Piece):
    """f(t) = slope * (t - root)."""

    slope: float
    root: float
    kind = "linear"

    def enclose(self, t, k):
        if k == 0:
            return (t - self.root) * self.slope
        return Interval(self.slope) if k == 1 else Interval(0.0)

    def evaluate(self, t, k):
        if k == 0:
            return self.slope * (t - self.root)
        v = self.slope if k == 1 else 0.0
        return np.full_like(t, v, dtype=float) if isinstance(t, np.ndarray) else v

    def describe(self):
        return {"kind": self.kind, "slope": self.slope, "root": self.root}


@dataclass(frozen=True)
class Sine(Piece):
    """f(t) = sin(t - root)."""

    root: float = 0.0
    kind = "sin"

    def enclose(self, t, k):
        x = t - self.root
        return (x.sin(), x.cos(), -x.sin(), -x.cos())[k]

    def evaluate(self, t, k):
        x = t - self.root
        fn = np.sin if isinstance(x, np.ndarray) else math.sin
        gn = np.cos if isinstance(x, np.ndarray) else math.cos
        return (fn(x), gn(x), -fn(x), -gn(x))[k]

    def describe(self):
        return {"kind": self.kind, "root": self.root}


@dataclass(frozen=True)
class Power(Piece):
    """f(t) = offset + coef * (t - root)**p on t > root."""

    coef: float
    p: float
    offset: float = 0.0
    root: float = 0.0
    kind = "power"

    def _fall(self, k):
        c = self.coef
        for j in range(k):
            c *= self.p - j
        return c

    def enclose(self, t, k):
        x = t - self.root
        v = x.rpow(self.p - k) * self._fall(k)
        return v + self.offset if k == 0 else v

    def evaluate(self, t, k):
        x = t - self.root
        v = self._fall(k) * np.power(x, self.p - k)
        if not isinstance(x, np.ndarray):
            v = float(v)
        return v + self.offset if k == 0 else v

    def describe(self):
        return {"kind": self.kind, "coef": self.coef, "p": self.p,
                "offset": self.offset, "root": self.root}


@dataclass(frozen=True)
class Descent(Piece):
    """alpha(t) = 1 - s((t - start) / length): from 1 down to 0."""

    start: float
    length: float
    template: str = "quintic"
    kind = "alpha"

    @property
    def tpl(self):
        return get_template(self.template)

    def _u(self, t):
        return (t - self.start) / self.length

    def enclose(self, t, k):
        s = self.tpl.enclose(self._u(t), k)
        if k == 0:
            return 1.0 - s
        return -s / (self.length ** k)

    def evaluate(self, t, k):
        s = self.tpl.evaluate(self._u(t), k)
        if k == 0:
            return 1.0 - s
        return -s / self.length ** k

    def describe(self):
        return {"kind": self.kind, "start": self.start, "length": self.length,
                "template": self.template}


@dataclass(frozen=True)
class Blend(Piece):
    """f = alpha * (t + R) / lam + (1 - alpha) with alpha a Descent.

    Written as 1 + alpha * (ell - 1), ell = (t + R)/lam, and differentiated
    by Leibniz: f^(k) = alpha^(k) (ell - 1) + k alpha^(k-1) / lam.
    """

    alpha: Descent
    R: float
    lam: float
    kind = "blend"

    def enclose(self, t, k):
        ell_m1 = (t + self.R) / self.lam - 1.0
        a_k = self.alpha.enclose(t, k)
        out = a_k * ell_m1
        if k == 0:
            return out + 1.0
        return out + self.alpha.enclose(t, k - 1) * (k / self.lam)

    def evaluate(self, t, k):
        ell_m1 = (t + self.R) / self.lam - 1.0
        out = self.alpha.evaluate(t, k) * ell_m1
        if k == 0:
            return out + 1.0
        return out + self.alpha.evaluate(t, k - 1) * (k / self.lam)

    def describe(self):
        return {"kind": self.kind, "R": self.R, "lambda": self.lam,
                "alpha": self.alpha.describe()}


# -- profile -----------------------------------------------------------------

@dataclass(frozen=True)
class WarpingProfile:
    """Piecewise closed-form radial function on ``domain``.

    ``knots`` are the interior breakpoints (sorted); piece i lives on
    ``[knots[i-1], knots[i]]``. The end pieces extend past the domain.
    ``smoothness`` is the guaranteed differentiability class at the knots.
    """

    domain: Interval
    pieces: tuple
    knots: tuple = ()
    smoothness: int = 10**9
    label: str = "f"
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.pieces) != len(self.knots) + 1:
            raise ValueError("need exactly len(knots) + 1 pieces")
        if list(self.knots) != sorted(self.knots):
            raise ValueError("knots must be sorted")

    @classmethod
    def single(cls, piece, domain, label="f"):
        return cls(domain=domain, pieces=(piece,), label=label)

    def piece_index(self, t: float) -> int:
        return bisect.bisect_right(self.knots, t)

    def subdomains(self):
        edges = [self.domain.lo, *self.knots, self.domain.hi]
        return [Interval(edges[i], edges[i + 1]) for i in range(len(self.pieces))]

    def enclose(self, t: Interval, k: int = 0) -> Interval:
        if k > MAX_ORDER:
            raise ValueError(f"derivative order {k} > {MAX_ORDER}")
        parts = []
        lo = t.lo
        i = bisect.bisect_right(self.knots, t.lo)
        while True:
            hi = min(self.knots[i], t.hi) if i < len(self.knots) else t.hi
            parts.append(self.pieces[i].enclose(Interval(lo, hi), k))
            if hi >= t.hi:
                break
            lo = hi
            i += 1
        if k > self.smoothness:
            # one-sided derivatives may differ at a knot
            for j, kn in enumerate(self.knots):
                if t.lo <= kn <= t.hi:
                    parts.append(self.pieces[j].enclose(Interval(kn), k))
        return Interval.hull_of(parts)

    def evaluate(self, t, k: int = 0):
        if isinstance(t, np.ndarray):
            idx = np.searchsorted(np.asarray(self.knots, dtype=float), t, side="right")
            out = np.empty_like(t, dtype=float)
            for i, piece in enumerate(self.pieces):
                m = idx == i
                if np.any(m):
                    out[m] = piece.evaluate(t[m], k)
            return out
        return float(self.pieces[self.piece_index(t)].evaluate(float(t), k))

    def knot_distance(self, t):
        if not self.knots:
            return np.full_like(t, np.inf, dtype=float) if isinstance(t, np.ndarray) else math.inf
        kn = np.asarray(self.knots, dtype=float)
        if isinstance(t, np.ndarray):
            return np.min(np.abs(t[..., None] - kn), axis=-1)
        return float(np.min(np.abs(t - kn)))

    def describe(self) -> dict:
        return {
            "label": self.label,
            "domain": [self.domain.lo, self.domain.hi],
            "knots": list(self.knots),
            "pieces": [p.describe() for p in self.pieces],
            **self.info,
        }
