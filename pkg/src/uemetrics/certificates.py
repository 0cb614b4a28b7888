"""Machine-checkable verdicts and their JSON form."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any

from .interval import Interval

CERTIFIED = "CERTIFIED"
CERTIFIED_ON_GRID = "CERTIFIED-ON-GRID"
INCONCLUSIVE = "INCONCLUSIVE"
REFUTED = "REFUTED"
REFUTED_ON_GRID = "REFUTED-ON-GRID"

STATUSES = (CERTIFIED, CERTIFIED_ON_GRID, INCONCLUSIVE, REFUTED, REFUTED_ON_GRID)

BISECTION = "interval-bisection"
GRID_PADDING = "grid+padding"
GRID_ONLY = "grid-only"

METHODS = (BISECTION, GRID_PADDING, GRID_ONLY)

TOOL_VERSION = "0.1.0"


class CertificateError(ValueError):
    pass


def _num(x: float | None) -> Any:
    """Fixed-precision JSON number; non-finite values become strings."""
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x + 0.0:.15e}")


def _plain(obj: Any) -> Any:
    if isinstance(obj, Interval):
        return {"lo": _num(obj.lo), "hi": _num(obj.hi)}
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int,)):
        return obj
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, Certificate):
        return obj.to_dict()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _plain(dataclasses.asdict(obj))
    if hasattr(obj, "item"):
        return _plain(obj.item())
    return str(obj)


@dataclass(frozen=True)
class Certificate:
    """A verdict on ``claim`` for ``subject`` over ``domain``.

    ``achieved`` encloses the quantity the claim is about (for lower-bound
    claims: the infimum). Only bisection or padded-grid methods may issue
    ``CERTIFIED``.
    """

    claim: str
    subject: str
    domain: Any
    target: float
    achieved: Interval
    method: str
    status: str
    depth: int = 0
    samples: int = 0
    params: dict = field(default_factory=dict)
    evidence: tuple = ()
    tool_version: str = TOOL_VERSION

    def __post_init__(self):
        if self.status not in STATUSES:
            raise CertificateError(f"unknown status {self.status!r}")
        if self.method not in METHODS:
            raise CertificateError(f"unknown method {self.method!r}")
        if self.status == CERTIFIED and self.method == GRID_ONLY:
            raise CertificateError("grid-only evidence cannot yield CERTIFIED")

    @property
    def ok(self) -> bool:
        return self.status in (CERTIFIED, CERTIFIED_ON_GRID)

    def to_dict(self) -> dict:
        d = {
            "claim": self.claim,
            "subject": self.subject,
            "params": _plain(self.params),
            "domain": _plain(self.domain),
            "target": _num(self.target),
            "achieved": _plain(self.achieved),
            "method": self.method,
            "depth": int(self.depth),
            "samples": int(self.samples),
            "status": self.status,
            "tool_version": self.tool_version,
        }
        if self.evidence:
            d["evidence"] = [_plain(e) for e in self.evidence]
        return d

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        def _f(v):
            return float(v) if v is not None else math.nan

        ach = d["achieved"]
        dom = d["domain"]
        if isinstance(dom, dict) and set(dom) == {"lo", "hi"}:
            dom = Interval(_f(dom["lo"]), _f(dom["hi"]))
        return cls(
            claim=d["claim"],
            subject=d["subject"],
            domain=dom,
            target=_f(d["target"]),
            achieved=Interval(_f(ach["lo"]), _f(ach["hi"])),
            method=d["method"],
            status=d["status"],
            depth=d.get("depth", 0),
            samples=d.get("samples", 0),
            params=d.get("params", {}),
            evidence=tuple(cls.from_dict(e) for e in d.get("evidence", ())),
            tool_version=d.get("tool_version", TOOL_VERSION),
        )


def combine(claim: str, subject: str, domain: Any, target: float,
            pieces: list[Certificate], params: dict | None = None) -> Certificate:
    """Union statement backed by per-piece certificates."""
    if not pieces:
        raise CertificateError("no evidence pieces")
    order = {REFUTED: 0, REFUTED_ON_GRID: 1, INCONCLUSIVE: 2, CERTIFIED_ON_GRID: 3, CERTIFIED: 4}
    status = min((p.status for p in pieces), key=order.__getitem__)
    methods = {p.method for p in pieces}
    method = GRID_ONLY if GRID_ONLY in methods else (
        GRID_PADDING if GRID_PADDING in methods else BISECTION)
    achieved = Interval(min(p.achieved.lo for p in pieces),
                        min(p.achieved.hi for p in pieces))
    return Certificate(
        claim=claim, subject=subject, domain=domain, target=target,
        achieved=achieved, method=method, status=status,
        depth=max(p.depth for p in pieces),
        samples=sum(p.samples for p in pieces),
        params=params or {}, evidence=tuple(pieces),
    )
