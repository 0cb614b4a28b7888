"""Pure-Python directed rounding for the four basic operations and sqrt.

Each function returns the round-to-nearest result nudged by one ulp only when
an error-free transformation shows the nearest result sits on the wrong side
of the exact value. The results therefore coincide with hardware directed
rounding (round-toward -inf / +inf), which is what the compiled kernel uses.
"""

import math
from fractions import Fraction

_SPLIT = 134217729.0  # 2**27 + 1, Veltkamp splitter
_BIG = 2.0 ** 995
_TINY = 2.0 ** -960
_INF = math.inf
_AMBIG = 2.0 ** -48  # below this the float sign test defers to exact rationals


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _prod_err(a, b, p):
    """Exact residual a*b - p, or None when splitting could over/underflow."""
    if not (abs(a) < _BIG and abs(b) < _BIG and abs(p) < _BIG):
        return None
    if p != 0.0 and abs(p) < _TINY:
        return None
    if p == 0.0 and a != 0.0 and b != 0.0:
        return None
    ah, al = _split(a)
    bh, bl = _split(b)
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _down(x):
    return math.nextafter(x, -_INF)


def _up(x):
    return math.nextafter(x, _INF)


def add_rd(a, b):
    s, e = _two_sum(a, b)
    if not (math.isfinite(a) and math.isfinite(b)):
        return s if s == s else -_INF
    if not math.isfinite(s):
        return _down(s)
    if e != e:
        e = float(Fraction(a) + Fraction(b) - Fraction(s))
    return _down(s) if e < 0.0 else s


def add_ru(a, b):
    s, e = _two_sum(a, b)
    if not (math.isfinite(a) and math.isfinite(b)):
        return s if s == s else _INF
    if not math.isfinite(s):
        return _up(s)
    if e != e:
        e = float(Fraction(a) + Fraction(b) - Fraction(s))
    return _up(s) if e > 0.0 else s


def _prod_sign(a, b, p):
    """Sign of the exact a*b - p (exact rationals where splitting is unsafe)."""
    e = _prod_err(a, b, p)
    if e is None:
        d = Fraction(a) * Fraction(b) - Fraction(p)
        return (d > 0) - (d < 0)
    return int(e > 0.0) - int(e < 0.0)


def mul_rd(a, b):
    p = a * b
    if not (math.isfinite(a) and math.isfinite(b)):
        return p if p == p else -_INF
    if not math.isfinite(p):
        return _down(p)
    return _down(p) if _prod_sign(a, b, p) < 0 else p


def mul_ru(a, b):
    p = a * b
    if not (math.isfinite(a) and math.isfinite(b)):
        return p if p == p else _INF
    if not math.isfinite(p):
        return _up(p)
    return _up(p) if _prod_sign(a, b, p) > 0 else p


def _div_sign(a, b, q):
    # sign of (a/b - q) = sign((a - q*b) / b)
    e = _prod_err(q, b, q * b)
    if e is None:
        d = Fraction(a) - Fraction(q) * Fraction(b)
        if d == 0:
            return 0
        return 1 if (d > 0) == (b > 0.0) else -1
    p = q * b
    r, r2 = _two_sum(a, -p)
    d = r + (r2 - e)
    if abs(d) <= _AMBIG * (abs(r) + abs(r2) + abs(e)):
        d = Fraction(a) - Fraction(q) * Fraction(b)
    if d == 0:
        return 0
    return 1 if (d > 0) == (b > 0.0) else -1


def div_rd(a, b):
    q = a / b
    if not (math.isfinite(a) and math.isfinite(b)):
        return q if q == q else -_INF
    if not math.isfinite(q):
        return _down(q)
    sgn = _div_sign(a, b, q)
    return _down(q) if sgn < 0 else q


def div_ru(a, b):
    q = a / b
    if not (math.isfinite(a) and math.isfinite(b)):
        return q if q == q else _INF
    if not math.isfinite(q):
        return _up(q)
    sgn = _div_sign(a, b, q)
    return _up(q) if sgn > 0 else q


def _sqrt_cmp(a, s):
    # sign of s*s - a
    p = s * s
    e = _prod_err(s, s, p)
    if e is None:
        r = Fraction(s) * Fraction(s) - Fraction(a)
        return (r > 0) - (r < 0)
    d, d2 = _two_sum(p, -a)
    r = d + (d2 + e)
    if abs(r) <= _AMBIG * (abs(d) + abs(d2) + abs(e)):
        r = Fraction(s) * Fraction(s) - Fraction(a)
    return (r > 0) - (r < 0)


def sqrt_rd(a):
    s = math.sqrt(a)
    if s == 0.0 or not math.isfinite(s):
        return s
    c = _sqrt_cmp(a, s)
    return _down(s) if c > 0 else s


def sqrt_ru(a):
    s = math.sqrt(a)
    if s == 0.0 or not math.isfinite(s):
        return s
    c = _sqrt_cmp(a, s)
    return _up(s) if c < 0 else s


def iadd(alo, ahi, blo, bhi):
    return add_rd(alo, blo), add_ru(ahi, bhi)


def isub(alo, ahi, blo, bhi):
    return add_rd(alo, -bhi), add_ru(ahi, -blo)


def imul(alo, ahi, blo, bhi):
    if alo >= 0.0 and blo >= 0.0:
        return mul_rd(alo, blo), mul_ru(ahi, bhi)
    if ahi <= 0.0 and bhi <= 0.0:
        return mul_rd(ahi, bhi), mul_ru(alo, blo)
    lo = min(mul_rd(alo, blo), mul_rd(alo, bhi), mul_rd(ahi, blo), mul_rd(ahi, bhi))
    hi = max(mul_ru(alo, blo), mul_ru(alo, bhi), mul_ru(ahi, blo), mul_ru(ahi, bhi))
    return lo, hi


def idiv(alo, ahi, blo, bhi):
    # caller guarantees 0 not in [blo, bhi]
    lo = min(div_rd(alo, blo), div_rd(alo, bhi), div_rd(ahi, blo), div_rd(ahi, bhi))
    hi = max(div_ru(alo, blo), div_ru(alo, bhi), div_ru(ahi, blo), div_ru(ahi, bhi))
    return lo, hi


def isqr(lo, hi):
    if lo >= 0.0:
        return mul_rd(lo, lo), mul_ru(hi, hi)
    if hi <= 0.0:
        return mul_rd(hi, hi), mul_ru(lo, lo)
    m = max(-lo, hi)
    return 0.0, mul_ru(m, m)


def isqrt(lo, hi):
    # caller guarantees hi >= 0
    return (sqrt_rd(lo) if lo > 0.0 else 0.0), sqrt_ru(hi)
