# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled interval kernels using hardware directed rounding (fenv.h).

Function names and semantics mirror ``_pyround``; results are bitwise
identical on IEEE-754 platforms.
"""

cdef extern from "fenv.h" nogil:
    int fesetround(int)
    int fegetround()
    int FE_DOWNWARD
    int FE_UPWARD
    int FE_TONEAREST

cdef extern from "math.h" nogil:
    double sqrt(double)
    double fmin(double, double)
    double fmax(double, double)


cdef inline double _opaque(double x) nogil:
    # blocks constant folding across rounding-mode switches
    cdef volatile double v = x
    return v


cpdef double add_rd(double a, double b):
    cdef double r
    fesetround(FE_DOWNWARD)
    r = _opaque(a) + _opaque(b)
    fesetround(FE_TONEAREST)
    return r


cpdef double add_ru(double a, double b):
    cdef double r
    fesetround(FE_UPWARD)
    r = _opaque(a) + _opaque(b)
    fesetround(FE_TONEAREST)
    return r


cpdef double mul_rd(double a, double b):
    cdef double r
    fesetround(FE_DOWNWARD)
    r = _opaque(a) * _opaque(b)
    fesetround(FE_TONEAREST)
    return r


cpdef double mul_ru(double a, double b):
    cdef double r
    fesetround(FE_UPWARD)
    r = _opaque(a) * _opaque(b)
    fesetround(FE_TONEAREST)
    return r


cpdef double div_rd(double a, double b):
    cdef double r
    fesetround(FE_DOWNWARD)
    r = _opaque(a) / _opaque(b)
    fesetround(FE_TONEAREST)
    return r


cpdef double div_ru(double a, double b):
    cdef double r
    fesetround(FE_UPWARD)
    r = _opaque(a) / _opaque(b)
    fesetround(FE_TONEAREST)
    return r


cpdef double sqrt_rd(double a):
    cdef double r
    fesetround(FE_DOWNWARD)
    r = sqrt(_opaque(a))
    fesetround(FE_TONEAREST)
    return r


cpdef double sqrt_ru(double a):
    cdef double r
    fesetround(FE_UPWARD)
    r = sqrt(_opaque(a))
    fesetround(FE_TONEAREST)
    return r


def iadd(double alo, double ahi, double blo, double bhi):
    cdef double lo, hi
    fesetround(FE_DOWNWARD)
    lo = _opaque(alo) + _opaque(blo)
    fesetround(FE_UPWARD)
    hi = _opaque(ahi) + _opaque(bhi)
    fesetround(FE_TONEAREST)
    return lo, hi


def isub(double alo, double ahi, double blo, double bhi):
    cdef double lo, hi
    fesetround(FE_DOWNWARD)
    lo = _opaque(alo) - _opaque(bhi)
    fesetround(FE_UPWARD)
    hi = _opaque(ahi) - _opaque(blo)
    fesetround(FE_TONEAREST)
    return lo, hi


def imul(double alo, double ahi, double blo, double bhi):
    cdef double lo, hi
    if alo >= 0.0 and blo >= 0.0:
        fesetround(FE_DOWNWARD)
        lo = _opaque(alo) * _opaque(blo)
        fesetround(FE_UPWARD)
        hi = _opaque(ahi) * _opaque(bhi)
    elif ahi <= 0.0 and bhi <= 0.0:
        fesetround(FE_DOWNWARD)
        lo = _opaque(ahi) * _opaque(bhi)
        fesetround(FE_UPWARD)
        hi = _opaque(alo) * _opaque(blo)
    else:
        fesetround(FE_DOWNWARD)
        lo = fmin(fmin(_opaque(alo) * _opaque(blo), _opaque(alo) * _opaque(bhi)),
                  fmin(_opaque(ahi) * _opaque(blo), _opaque(ahi) * _opaque(bhi)))
        fesetround(FE_UPWARD)
        hi = fmax(fmax(_opaque(alo) * _opaque(blo), _opaque(alo) * _opaque(bhi)),
                  fmax(_opaque(ahi) * _opaque(blo), _opaque(ahi) * _opaque(bhi)))
    fesetround(FE_TONEAREST)
    return lo, hi


def idiv(double alo, double ahi, double blo, double bhi):
    cdef double lo, hi
    fesetround(FE_DOWNWARD)
    lo = fmin(fmin(_opaque(alo) / _opaque(blo), _opaque(alo) / _opaque(bhi)),
              fmin(_opaque(ahi) / _opaque(blo), _opaque(ahi) / _opaque(bhi)))
    fesetround(FE_UPWARD)
    hi = fmax(fmax(_opaque(alo) / _opaque(blo), _opaque(alo) / _opaque(bhi)),
              fmax(_opaque(ahi) / _opaque(blo), _opaque(ahi) / _opaque(bhi)))
    fesetround(FE_TONEAREST)
    return lo, hi


def isqr(double lo, double hi):
    cdef double rlo, rhi, m
    if lo >= 0.0:
        fesetround(FE_DOWNWARD)
        rlo = _opaque(lo) * _opaque(lo)
        fesetround(FE_UPWARD)
        rhi = _opaque(hi) * _opaque(hi)
    elif hi <= 0.0:
        fesetround(FE_DOWNWARD)
        rlo = _opaque(hi) * _opaque(hi)
        fesetround(FE_UPWARD)
        rhi = _opaque(lo) * _opaque(lo)
    else:
        m = fmax(-lo, hi)
        rlo = 0.0
        fesetround(FE_UPWARD)
        rhi = _opaque(m) * _opaque(m)
    fesetround(FE_TONEAREST)
    return rlo, rhi


def isqrt(double lo, double hi):
    cdef double rlo = 0.0, rhi
    if lo > 0.0:
        fesetround(FE_DOWNWARD)
        rlo = sqrt(_opaque(lo))
    fesetround(FE_UPWARD)
    rhi = sqrt(_opaque(hi))
    fesetround(FE_TONEAREST)
    return rlo, rhi
