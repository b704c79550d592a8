"""Edge and vertex boundaries, Følner deficiencies and conductance bounds.

Explicit finite sets only ever certify *upper* bounds on phi and h (phi is an
infimum over finite sets). Lower bounds come from a certified upper bound on
rho through Mohar's inequalities

    |S|(1 - rho)/(|S| - 1) <= h <= sqrt(1 - rho^2),
    1 - h(|S| - 1)/|S| <= rho <= sqrt(1 - h^2),

with phi = |S| h.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import sympy

from . import groups
from .bounds import (CERTIFIED_BOUND, BoundReport, Endpoint, exact_endpoint, float_endpoint,
                     to_sympy)
from .cayley import DEFAULT_MAX_VERTICES, EXTERIOR, build_ball
from .errors import ValidationError
from .gensets import GenSet
from .spectral import rho_report
from .groups import FreeAbelian, GroupSpec


@dataclass(frozen=True)
class FiniteSet:
    spec: GroupSpec
    members: frozenset

    def __post_init__(self):
        members = frozenset(self.members)
        if not members:
            raise ValidationError("finite set is empty")
        check = groups._ops(self.spec).check
        for g in members:
            check(g)
        object.__setattr__(self, "members", members)

    def __len__(self):
        return len(self.members)


def finite_set(spec: GroupSpec, members: Iterable) -> FiniteSet:
    return FiniteSet(spec, frozenset(members))


def box(spec: FreeAbelian, side: int) -> FiniteSet:
    """The cube {0..side-1}^d in Z^d."""
    if not isinstance(spec, FreeAbelian):
        raise ValidationError("boxes live in free abelian groups")
    if side < 1:
        raise ValidationError(f"box side must be >= 1, got {side}")
    return FiniteSet(spec, frozenset(itertools.product(range(side), repeat=spec.rank)))


def _shifts(S: GenSet, F: FiniteSet):
    if S.spec != F.spec:
        raise ValidationError("generating set and finite set live in different groups")
    mul = groups.multiplier(S.spec)
    for s in S.elements:
        yield {mul(s, f) for f in F.members}


def edge_boundary(spec: GroupSpec, S: GenSet, F: FiniteSet) -> int:
    """sum over s of |sF minus F|, i.e. the number of edges leaving F."""
    return sum(len(sF - F.members) for sF in _shifts(S, F))


def vertex_boundary(spec: GroupSpec, S: GenSet, F: FiniteSet) -> int:
    """Number of vertices outside F adjacent to F."""
    out: set = set()
    for sF in _shifts(S, F):
        out |= sF
    return len(out - F.members)


def folner_deficiency(spec: GroupSpec, S: GenSet, F: FiniteSet) -> Fraction:
    """max over s of |sF Δ F| / |F|, exact."""
    return Fraction(max(len(sF ^ F.members) for sF in _shifts(S, F)), len(F))


def average_folner_deficiency(spec: GroupSpec, S: GenSet, F: FiniteSet) -> Fraction:
    """(1/(|F||S|)) sum over s of |sF Δ F|, exact."""
    total = sum(len(sF ^ F.members) for sF in _shifts(S, F))
    return Fraction(total, len(F) * len(S))


def _in_unit(ep: Endpoint, what: str) -> None:
    x = ep.exact if ep.exact is not None else ep.value
    if not (0 <= x <= 1):
        raise ValidationError(f"{what} endpoint {ep.value} lies outside [0, 1]")


def _clip_sqrt(x):
    return sympy.sqrt(sympy.Max(x, 0))


def mohar_propagate(report: BoundReport, sizeS: int) -> BoundReport:
    """Turn certified bounds on rho into bounds on h, or the reverse.

    rho-upper gives h-lower, rho-lower gives h-upper, and dually. Outputs are
    certified-bound (the inequalities are not equalities in general).
    """
    if report.quantity not in ("rho", "h"):
        raise ValidationError(f"Mohar's inequalities relate rho and h, not {report.quantity}")
    if sizeS < 2:
        raise ValidationError("Mohar's inequalities need |S| >= 2")
    lo, hi = report.certified_lower, report.certified_upper
    if lo is None and hi is None:
        raise ValidationError(f"no certified endpoint on {report.quantity} to propagate")
    for ep in (lo, hi):
        if ep is not None:
            _in_unit(ep, report.quantity)
    n = sympy.Integer(sizeS)
    new_lo = new_hi = None
    if report.quantity == "rho":
        target = "h"
        if hi is not None:
            new_lo = _apply(lambda r: n * (1 - r) / (n - 1), hi, "lower", "Mohar: |S|(1-rho_up)/(|S|-1)")
        if lo is not None:
            new_hi = _apply(lambda r: _clip_sqrt(1 - r**2), lo, "upper", "Mohar: sqrt(1-rho_lo^2)")
    else:
        target = "rho"
        if hi is not None:
            new_lo = _apply(lambda h: 1 - h * (n - 1) / n, hi, "lower", "Mohar: 1-h_up(|S|-1)/|S|")
        if lo is not None:
            new_hi = _apply(lambda h: _clip_sqrt(1 - h**2), lo, "upper", "Mohar: sqrt(1-h_lo^2)")
    return BoundReport(target, new_lo, new_hi, details={"from": report.quantity, "sizeS": sizeS})


def _apply(fn, ep: Endpoint, side: str, source: str) -> Endpoint:
    if ep.exact is not None:
        return exact_endpoint(sympy.radsimp(fn(to_sympy(ep.exact))), side, CERTIFIED_BOUND, source)
    return float_endpoint(float(fn(sympy.Float(ep.value, 30))), side, CERTIFIED_BOUND, source)


def phi_from_h(report: BoundReport, sizeS: int) -> BoundReport:
    """Scale h bounds by |S| to bounds on phi."""
    def scale(ep: Optional[Endpoint], side: str):
        if ep is None:
            return None
        if ep.exact is not None:
            return exact_endpoint(sympy.radsimp(ep.exact * sizeS), side, ep.provenance, ep.source)
        return float_endpoint(ep.value * sizeS, side, ep.provenance, ep.source)
    return BoundReport("phi", scale(report.lower, "lower"), scale(report.upper, "upper"),
                       details=dict(report.details))


def ball_boundary_table(spec: GroupSpec, S: GenSet, radii: Iterable[int],
                        max_vertices: int = DEFAULT_MAX_VERTICES) -> list[dict]:
    """Edge boundary of each ball B_r, read off the adjacency of one BFS ball."""
    radii = sorted(set(radii))
    if not radii or radii[0] < 0:
        raise ValidationError("radii must be a non-empty list of non-negative integers")
    ball = build_ball(spec, S, radii[-1], max_vertices)
    adj = ball.adjacency
    rows = []
    for r in radii:
        size = ball.size(r)
        block = adj[:size]
        leaving = int(((block == EXTERIOR) | (block >= size)).sum())
        rows.append({"k": r, "setsize": size, "edge_boundary": leaving,
                     "phi_upper": Fraction(leaving, size)})
    return rows


def iso_upper_via_family(spec: GroupSpec, S: GenSet, family: Iterable[int],
                         boxes: Iterable[int] = (), rho: Optional[BoundReport] = None,
                         max_vertices: int = DEFAULT_MAX_VERTICES) -> BoundReport:
    """phi bounds: upper from explicit balls (and boxes in Z^d), lower via Mohar.

    ``rho`` supplies the certified spectral bound for the lower endpoint; if
    omitted the catalog value is used when there is one.
    """
    family = list(family)
    rows = ball_boundary_table(spec, S, family, max_vertices) if family else []
    for side in boxes:
        F = box(spec, side)
        eb = edge_boundary(spec, S, F)
        rows.append({"k": f"box{side}", "setsize": len(F), "edge_boundary": eb,
                     "phi_upper": Fraction(eb, len(F))})
    if not rows:
        raise ValidationError("empty set family")
    best = min(rows, key=lambda row: row["phi_upper"])
    upper = exact_endpoint(best["phi_upper"], "upper", CERTIFIED_BOUND,
                           f"explicit set {best['k']} (|F|={best['setsize']})")
    rho = rho if rho is not None else rho_report(spec, S)
    lower = None
    if rho.certified_upper is not None and len(S) >= 2:
        h = mohar_propagate(BoundReport("rho", None, rho.certified_upper), len(S))
        lower = phi_from_h(h, len(S)).lower
        if lower is not None and lower.value < 0:
            lower = None
    return BoundReport("phi", lower, upper, details={"rows": rows})


def min_boundary_ratio_bruteforce(spec: GroupSpec, S: GenSet, pool: Iterable, max_size: int) -> Fraction:
    """min over non-empty subsets F of pool with |F| <= max_size of edge_boundary/|F|.

    Exponential; a test oracle only.
    """
    pool = list(pool)
    mul = groups.multiplier(spec)
    nbrs = [[mul(s, g) for s in S.elements] for g in pool]
    best = None
    for size in range(1, min(max_size, len(pool)) + 1):
        for combo in itertools.combinations(range(len(pool)), size):
            members = {pool[i] for i in combo}
            leaving = sum(1 for i in combo for w in nbrs[i] if w not in members)
            ratio = Fraction(leaving, size)
            if best is None or ratio < best:
                best = ratio
    return best
