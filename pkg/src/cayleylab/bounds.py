"""Interval endpoints with provenance.

An endpoint is *certified* when it is a proven bound on the quantity
(``certified-exact`` if it is the value itself, ``certified-bound``
otherwise). ``heuristic`` endpoints are estimates and must never feed a
certified verdict. When an exact symbolic value is known it rides along in
``exact`` and all comparisons use it; the float ``value`` is rounded outward
so that float comparisons stay sound too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import sympy

from .errors import InvariantError

CERTIFIED_EXACT = "certified-exact"
CERTIFIED_BOUND = "certified-bound"
HEURISTIC = "heuristic"
PROVENANCES = (CERTIFIED_EXACT, CERTIFIED_BOUND, HEURISTIC)

_ULPS = 4


def to_sympy(x) -> sympy.Expr:
    if isinstance(x, sympy.Basic):
        return x
    if isinstance(x, Fraction):
        return sympy.Rational(x.numerator, x.denominator)
    if isinstance(x, int):
        return sympy.Integer(x)
    raise TypeError(f"cannot make an exact value from {x!r}")


def round_out(x: float, side: str, ulps: int = _ULPS) -> float:
    """Move x outward by a few ulps: down for a lower endpoint, up for an upper one."""
    target = -math.inf if side == "lower" else math.inf
    for _ in range(ulps):
        x = math.nextafter(x, target)
    return x


def float_of(expr, side: str) -> float:
    expr = to_sympy(expr)
    if expr.is_Rational:
        q = Fraction(int(expr.p), int(expr.q))
        f = float(q)
        if Fraction(f) == q:
            return f
        return round_out(f, side, 1)
    return round_out(float(expr.evalf(30)), side)


@dataclass(frozen=True)
class Endpoint:
    value: float
    provenance: str
    source: str = ""
    exact: Optional[sympy.Expr] = None

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    @property
    def certified(self) -> bool:
        return self.provenance != HEURISTIC

    def as_dict(self, which: str = "") -> dict:
        d = {"value": self.value, "provenance": self.provenance, "source": self.source}
        if which:
            d = {"endpoint": which, **d}
        if self.exact is not None:
            d["exact"] = str(self.exact)
        return d


def exact_endpoint(expr, side: str, provenance: str = CERTIFIED_EXACT, source: str = "") -> Endpoint:
    expr = to_sympy(expr)
    return Endpoint(float_of(expr, side), provenance, source, expr)


def float_endpoint(value: float, side: str, provenance: str = CERTIFIED_BOUND, source: str = "") -> Endpoint:
    """Endpoint from a float computation; certified ones are rounded outward."""
    if provenance != HEURISTIC:
        value = round_out(value, side)
    return Endpoint(value, provenance, source)


def compare(x, y) -> int:
    """Exact three-way comparison of two real numbers (sympy, Fraction or int)."""
    d = to_sympy(x) - to_sympy(y)
    if d.is_zero:
        return 0
    if d.is_positive:
        return 1
    if d.is_negative:
        return -1
    # Algebraic numbers sympy cannot sign symbolically: equality was ruled
    # out above, so enough digits decide it.
    v = d.evalf(80)
    if v == 0:
        raise ValueError(f"cannot decide the sign of {d}")
    return 1 if v > 0 else -1


def endpoint_le(a: Endpoint, b: Endpoint) -> bool:
    """a <= b, exactly when both carry exact values, else on outward-rounded floats."""
    if a.exact is not None and b.exact is not None:
        return compare(a.exact, b.exact) <= 0
    return a.value <= b.value


@dataclass(frozen=True)
class BoundReport:
    """Two-sided bound on one quantity (rho, h, phi, gr, p_c).

    ``estimate`` holds an optional heuristic point value; ``details`` carries
    whatever produced the bounds (tables, witnesses) for reports.
    """

    quantity: str
    lower: Optional[Endpoint] = None
    upper: Optional[Endpoint] = None
    estimate: Optional[Endpoint] = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.certified_lower, self.certified_upper
        if lo is not None and hi is not None:
            if not endpoint_le(lo, hi):
                raise InvariantError(f"{self.quantity}: certified lower {lo.value} exceeds certified upper {hi.value}")

    @property
    def certified_lower(self) -> Optional[Endpoint]:
        return self.lower if self.lower is not None and self.lower.certified else None

    @property
    def certified_upper(self) -> Optional[Endpoint]:
        return self.upper if self.upper is not None and self.upper.certified else None

    @property
    def exact(self) -> Optional[sympy.Expr]:
        lo, hi = self.lower, self.upper
        if lo is not None and hi is not None and lo.provenance == hi.provenance == CERTIFIED_EXACT:
            return lo.exact
        return None

    def as_dict(self) -> dict:
        out = {"quantity": self.quantity}
        for name in ("lower", "upper", "estimate"):
            ep = getattr(self, name)
            out[name] = None if ep is None else ep.as_dict()
        return out


def exact_report(quantity: str, expr, source: str) -> BoundReport:
    return BoundReport(quantity, exact_endpoint(expr, "lower", source=source),
                       exact_endpoint(expr, "upper", source=source))
