"""Closed real intervals with outward-rounded arithmetic."""

import math

from . import _backend as _b

_INF = math.inf
_TWO_PI = 2.0 * math.pi


class IntervalDomainError(ValueError):
    """An operand lies (partly) outside the domain of an interval operation."""

    def __init__(self, op, operand, detail=""):
        self.op = op
        self.operand = operand
        msg = f"{op}: operand {operand!r} outside domain"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


def _widen(lo, hi, ulps):
    for _ in range(ulps):
        lo = math.nextafter(lo, -_INF)
        hi = math.nextafter(hi, _INF)
    return lo, hi


def _as_interval(x):
    if isinstance(x, Interval):
        return x
    return Interval(x, x)


class Interval:
    """A closed interval ``[lo, hi]`` of doubles.

    Arithmetic with ``+ - * /`` and ``sqrt`` is correctly directed-rounded;
    the elementary functions inflate the libm result by two ulps. Plain floats
    and ints mix freely and are taken to be exact.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        lo = float(lo)
        hi = float(hi)
        if not lo <= hi:
            raise ValueError(f"invalid interval [{lo!r}, {hi!r}]")
        self.lo = lo
        self.hi = hi

    @classmethod
    def point(cls, x):
        return cls(x, x)

    @classmethod
    def pi(cls):
        return cls(math.pi, math.nextafter(math.pi, _INF))

    @classmethod
    def hull_of(cls, items):
        it = iter(items)
        first = _as_interval(next(it))
        lo, hi = first.lo, first.hi
        for x in it:
            x = _as_interval(x)
            if x.lo < lo:
                lo = x.lo
            if x.hi > hi:
                hi = x.hi
        return cls(lo, hi)

    # -- inspection -----------------------------------------------------
    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        m = 0.5 * (self.lo + self.hi)
        if not math.isfinite(m):
            m = 0.5 * self.lo + 0.5 * self.hi
        return m

    @property
    def mag(self):
        return max(abs(self.lo), abs(self.hi))

    @property
    def mig(self):
        if self.lo > 0.0:
            return self.lo
        if self.hi < 0.0:
            return -self.hi
        return 0.0

    def is_point(self):
        return self.lo == self.hi

    def contains(self, other):
        if isinstance(other, Interval):
            return self.lo <= other.lo and other.hi <= self.hi
        return self.lo <= other <= self.hi

    __contains__ = contains

    def contains_zero(self):
        return self.lo <= 0.0 <= self.hi

    def hull(self, other):
        other = _as_interval(other)
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other):
        other = _as_interval(other)
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            return None
        return Interval(lo, hi)

    def bisect(self):
        m = self.mid
        return Interval(self.lo, m), Interval(m, self.hi)

    def __eq__(self, other):
        if isinstance(other, Interval):
            return self.lo == other.lo and self.hi == other.hi
        return NotImplemented

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __iter__(self):
        yield self.lo
        yield self.hi

    # -- arithmetic -----------------------------------------------------
    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __pos__(self):
        return self

    def __add__(self, other):
        if not isinstance(other, Interval):
            other = float(other)
            return Interval(*_b.iadd(self.lo, self.hi, other, other))
        return Interval(*_b.iadd(self.lo, self.hi, other.lo, other.hi))

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Interval):
            other = float(other)
            return Interval(*_b.isub(self.lo, self.hi, other, other))
        return Interval(*_b.isub(self.lo, self.hi, other.lo, other.hi))

    def __rsub__(self, other):
        other = float(other)
        return Interval(*_b.isub(other, other, self.lo, self.hi))

    def __mul__(self, other):
        if not isinstance(other, Interval):
            other = float(other)
            return Interval(*_b.imul(self.lo, self.hi, other, other))
        return Interval(*_b.imul(self.lo, self.hi, other.lo, other.hi))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_interval(other)
        if other.lo <= 0.0 <= other.hi:
            raise IntervalDomainError("div", other, "divisor contains zero")
        return Interval(*_b.idiv(self.lo, self.hi, other.lo, other.hi))

    def __rtruediv__(self, other):
        return _as_interval(other) / self

    def __pow__(self, k):
        if isinstance(k, int) and not isinstance(k, bool):
            return self._ipow(k)
        return self.rpow(k)

    def _ipow(self, k):
        if k == 0:
            return Interval(1.0, 1.0)
        if k < 0:
            return Interval(1.0, 1.0) / self._ipow(-k)
        if k == 1:
            return self
        if k == 2:
            return self.sqr()
        # repeated squaring keeps exact cases exact
        result = None
        base = self
        n = k
        if k % 2 == 0:
            base = self.abs()
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base.sqr()
        return result

    def sqr(self):
        return Interval(*_b.isqr(self.lo, self.hi))

    def abs(self):
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi))

    def sqrt(self):
        if self.hi < 0.0:
            raise IntervalDomainError("sqrt", self, "negative interval")
        return Interval(*_b.isqrt(max(self.lo, 0.0), self.hi))

    def rpow(self, p):
        """``x**p`` for real ``p`` on a positive interval."""
        p = float(p)
        if p == int(p) and abs(p) < 64:
            return self._ipow(int(p))
        if self.lo <= 0.0:
            raise IntervalDomainError("pow", self, "non-positive base with real exponent")
        a = math.pow(self.lo, p)
        b = math.pow(self.hi, p)
        lo, hi = (a, b) if p > 0 else (b, a)
        lo, hi = _widen(lo, hi, 2)
        return Interval(max(lo, 0.0), hi)

    def exp(self):
        lo = math.exp(self.lo) if self.lo > -745.0 else 0.0
        hi = math.exp(self.hi) if self.hi < 709.0 else _INF
        if self.is_point() and self.lo == 0.0:
            return Interval(1.0, 1.0)
        lo, hi = _widen(lo, hi, 2)
        return Interval(max(lo, 0.0), hi)

    def log(self):
        if self.lo <= 0.0:
            raise IntervalDomainError("log", self, "non-positive argument")
        if self.is_point() and self.lo == 1.0:
            return Interval(0.0, 0.0)
        return Interval(*_widen(math.log(self.lo), math.log(self.hi), 2))

    def sin(self):
        return self._trig(math.sin, 0.5 * math.pi, -0.5 * math.pi)

    def cos(self):
        return self._trig(math.cos, 0.0, math.pi)

    def _trig(self, fn, argmax, argmin):
        lo, hi = self.lo, self.hi
        if not (math.isfinite(lo) and math.isfinite(hi)) or hi - lo >= _TWO_PI:
            return Interval(-1.0, 1.0)
        if self.is_point() and lo == 0.0 and fn is math.sin:
            return Interval(0.0, 0.0)
        a, b = fn(lo), fn(hi)
        rlo, rhi = _widen(min(a, b), max(a, b), 2)
        # slack covers the rounding of pi in the critical-point test
        slack = 4e-16 * max(1.0, abs(lo), abs(hi))
        if _hits(lo - slack, hi + slack, argmax):
            rhi = 1.0
        if _hits(lo - slack, hi + slack, argmin):
            rlo = -1.0
        return Interval(max(rlo, -1.0), min(rhi, 1.0))

    def tan(self):
        return self.sin() / self.cos()


def _hits(lo, hi, phase):
    """Whether ``phase + 2*k*pi`` lies in ``[lo, hi]`` for some integer k."""
    k = math.ceil((lo - phase) / _TWO_PI)
    return phase + k * _TWO_PI <= hi


def as_interval(x):
    return _as_interval(x)


_UNARY = {
    "neg": Interval.__neg__,
    "sqr": Interval.sqr,
    "sqrt": Interval.sqrt,
    "sin": Interval.sin,
    "cos": Interval.cos,
    "exp": Interval.exp,
    "log": Interval.log,
    "abs": Interval.abs,
}

_BINARY = {
    "+": Interval.__add__,
    "-": Interval.__sub__,
    "*": Interval.__mul__,
    "/": Interval.__truediv__,
    "pow": Interval.__pow__,
}


def interval_op(a, b, op):
    """Apply operator tag ``op`` to ``a`` (and ``b`` for binary tags)."""
    a = _as_interval(a)
    if op in _UNARY:
        return _UNARY[op](a)
    if op in _BINARY:
        if op == "pow":
            return a ** b
        return _BINARY[op](a, _as_interval(b))
    raise KeyError(f"unsupported interval operator {op!r}")
