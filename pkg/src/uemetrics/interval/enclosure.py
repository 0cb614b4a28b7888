"""Certified range enclosure and lower-bound certification by bisection."""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

from .core import Interval, IntervalDomainError

DEFAULT_MAX_DEPTH = 24
DEFAULT_LEAF_BUDGET = 10**6


@dataclass(frozen=True)
class EnclosureFn:
    """A univariate function known through interval enclosures.

    ``evaluator(D)`` must contain every value of the function on ``D``.
    ``derivative`` (optional) encloses the first derivative and enables the
    mean-value form, which is intersected with the natural enclosure.
    """

    domain: Interval
    evaluator: Callable[[Interval], Interval]
    derivative: Optional[Callable[[Interval], Interval]] = None
    second: Optional[Callable[[Interval], Interval]] = None
    name: str = "f"
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, d: Interval) -> Interval:
        enc = self.evaluator(d)
        if self.derivative is not None and d.width > 0.0:
            m = Interval.point(d.mid)
            try:
                mv = self.evaluator(m) + self.derivative(d) * (d - m)
            except IntervalDomainError:
                return enc
            tight = enc.intersect(mv)
            if tight is not None:
                enc = tight
        return enc

    def point(self, x: float) -> Interval:
        return self.evaluator(Interval.point(x))

    @classmethod
    def from_callable(cls, fn, domain, derivative=None, name="f"):
        """Wrap ``fn`` written with Interval arithmetic (works on floats too)."""
        return cls(domain=domain, evaluator=fn, derivative=derivative, name=name)


def _check_sub(f: EnclosureFn, d: Interval):
    if not f.domain.contains(d):
        raise ValueError(f"{d!r} is not inside the domain {f.domain!r} of {f.name}")


def enclose_range(f: EnclosureFn, d: Interval, max_depth: int = 12,
                  tol: float = 0.0, leaf_budget: int = DEFAULT_LEAF_BUDGET) -> Interval:
    """Enclose the range of ``f`` on ``d``.

    Level-synchronous bisection: at each level every leaf whose enclosure
    sticks out (by more than ``tol``) of the inner range spanned by midpoint
    evaluations is split; children are intersected with their parent. The
    result at depth ``k+1`` is therefore a subset of the result at depth ``k``.
    """
    _check_sub(f, d)
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    root = f(d)
    if d.width == 0.0 or max_depth == 0:
        return root
    p = f.point(d.mid)
    inner_lo, inner_hi = p.hi, p.lo
    leaves = [(d, root)]
    total = 1
    for _ in range(max_depth):
        nxt = []
        split_any = False
        for box, enc in leaves:
            if (enc.lo >= inner_lo - tol and enc.hi <= inner_hi + tol) or box.width == 0.0:
                nxt.append((box, enc))
                continue
            if total + 2 > leaf_budget:
                nxt.append((box, enc))
                continue
            a, b = box.bisect()
            for child in (a, b):
                c_enc = f(child).intersect(enc)
                if c_enc is None:
                    # both contain the true range of a continuous function
                    c_enc = enc
                nxt.append((child, c_enc))
                q = f.point(child.mid)
                inner_lo = min(inner_lo, q.hi)
                inner_hi = max(inner_hi, q.lo)
            total += 2
            split_any = True
        leaves = nxt
        if not split_any:
            break
    return Interval(min(e.lo for _, e in leaves), max(e.hi for _, e in leaves))


@dataclass
class LowerBoundResult:
    status: str
    achieved: Interval
    depth: int
    leaves: int
    witness: Optional[float] = None


def bisect_lower_bound(f: EnclosureFn, d: Interval, target: float,
                       max_depth: int = DEFAULT_MAX_DEPTH,
                       leaf_budget: int = DEFAULT_LEAF_BUDGET) -> LowerBoundResult:
    """Best-first bisection proving ``inf_d f >= target`` or finding a violation.

    Leaves with the widest enclosure are processed first. ``achieved``
    encloses ``inf_d f``: its low end is the proven lower bound, its high end
    the smallest rigorous point value seen.
    """
    _check_sub(f, d)
    counter = itertools.count()
    best_point_hi = float("inf")
    witness = None

    def probe(x):
        nonlocal best_point_hi, witness
        v = f.point(x)
        if v.hi < best_point_hi:
            best_point_hi = v.hi
            witness = x
        return v

    for x in (d.lo, d.hi, d.mid):
        if probe(x).hi < target:
            return LowerBoundResult("REFUTED", Interval(f.point(x).lo, best_point_hi), 0, 1, witness)

    enc = f(d)
    heap = [(-enc.width, next(counter), 0, d, enc)]
    proven_lo = float("inf")
    stuck_lo = float("inf")
    processed = 0
    deepest = 0
    inconclusive = False
    while heap:
        _, _, depth, box, enc = heapq.heappop(heap)
        processed += 1
        deepest = max(deepest, depth)
        if enc.lo >= target:
            proven_lo = min(proven_lo, enc.lo)
            continue
        v = probe(box.mid)
        if v.hi < target:
            lo = min(proven_lo, stuck_lo, enc.lo, *(e.lo for *_, e in heap))
            return LowerBoundResult("REFUTED", Interval(lo, best_point_hi), deepest, processed, witness)
        if depth >= max_depth or box.width == 0.0 or processed + len(heap) + 2 > leaf_budget:
            inconclusive = True
            stuck_lo = min(stuck_lo, enc.lo)
            continue
        for child in box.bisect():
            c = f(child).intersect(enc)
            if c is None:
                c = enc
            heapq.heappush(heap, (-c.width, next(counter), depth + 1, child, c))
    lo = min(proven_lo, stuck_lo)
    hi = max(best_point_hi, lo)
    status = "INCONCLUSIVE" if inconclusive else "CERTIFIED"
    return LowerBoundResult(status, Interval(lo, hi), deepest, processed, witness)


def certify_lower_bound(f: EnclosureFn, d: Interval, target: float,
                        max_depth: int = DEFAULT_MAX_DEPTH,
                        leaf_budget: int = DEFAULT_LEAF_BUDGET,
                        claim: str | None = None, subject: str | None = None,
                        params: dict | None = None):
    """Certificate for ``f >= target`` on ``d`` (see :func:`bisect_lower_bound`)."""
    from ..certificates import BISECTION, Certificate

    res = bisect_lower_bound(f, d, target, max_depth, leaf_budget)
    p = dict(params or {})
    if res.witness is not None and res.status == "REFUTED":
        p["witness"] = res.witness
    return Certificate(
        claim=claim or f"{f.name} >= target",
        subject=subject or f.name,
        domain=d,
        target=float(target),
        achieved=res.achieved,
        method=BISECTION,
        status=res.status,
        depth=res.depth,
        samples=res.leaves,
        params=p,
    )
