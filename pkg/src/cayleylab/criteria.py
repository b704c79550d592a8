"""Tri-state evaluation of the sufficient conditions and the scan drivers.

Every condition has the shape ``expression < threshold`` with the expression
a product or quotient of non-negative quantities, so its certified interval
is computed endpoint by endpoint. Only certified endpoints reach a verdict:

* certified-true  when the certified upper endpoint is below the threshold,
* certified-false when the certified lower endpoint is at or above it,
* inconclusive    otherwise.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import sympy

from . import groups
from .bounds import (CERTIFIED_BOUND, CERTIFIED_EXACT, BoundReport, Endpoint, compare, float_endpoint,
                     exact_endpoint, to_sympy)
from .cayley import DEFAULT_MAX_VERTICES, build_ball
from .errors import SizeLimitError, ValidationError
from .gensets import GenSet, lift_generating_set, lift_multiset, power_multiset
from .groups import DirectProduct, GroupSpec
from .isoperimetry import ball_boundary_table, mohar_propagate
from .percolation import worker_count
from .spectral import rho_exact_catalog, rho_lower, rho_ratio_estimate, rho_upper_power, walk_series

BS3 = "BS3"
GROWTH4 = "GROWTH4"
RADIUS_HALF = "RADIUS_HALF"

CERTIFIED_TRUE = "certified-true"
CERTIFIED_FALSE = "certified-false"
INCONCLUSIVE = "inconclusive"

SCAN_BUDGET = 200_000
"""Vertex budget per ball inside the scans; radii and horizons shrink to fit."""


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    verdict: str
    lower: Optional[Endpoint]
    upper: Optional[Endpoint]
    threshold: sympy.Expr
    inputs: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def interval(self) -> list:
        return [None if self.lower is None else self.lower.value,
                None if self.upper is None else self.upper.value]

    def as_dict(self) -> dict:
        out = {
            "condition": self.condition,
            "verdict": self.verdict,
            "expression_interval": self.interval,
            "inputs": self.inputs,
            "threshold": str(self.threshold),
        }
        exact = [None if ep is None or ep.exact is None else str(ep.exact) for ep in (self.lower, self.upper)]
        if any(exact):
            out["expression_exact"] = exact
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _input_rows(name: str, report: Optional[BoundReport]) -> list:
    if report is None:
        return []
    rows = []
    for side in ("lower", "upper", "estimate"):
        ep = getattr(report, side)
        if ep is not None:
            rows.append({"quantity": name, "endpoint": side, "value": ep.value,
                         "provenance": ep.provenance, "source": ep.source})
    return rows


def _constant(value) -> Endpoint:
    return exact_endpoint(value, "lower", CERTIFIED_EXACT, "constant")


def _combine(side: str, factors: list, divisors: list = ()) -> Optional[Endpoint]:
    """prod(factors) / prod(divisors) on certified non-negative endpoints, or None."""
    eps = list(factors) + list(divisors)
    if any(ep is None or not ep.certified for ep in eps):
        return None
    provenance = CERTIFIED_EXACT if all(ep.provenance == CERTIFIED_EXACT for ep in eps) else CERTIFIED_BOUND
    if all(ep.exact is not None for ep in eps):
        expr = sympy.Integer(1)
        for ep in factors:
            expr *= to_sympy(ep.exact)
        for ep in divisors:
            expr /= to_sympy(ep.exact)
        return exact_endpoint(sympy.radsimp(expr), side, provenance, "interval arithmetic")
    value = math.prod(ep.value for ep in factors) / math.prod(ep.value for ep in divisors)
    return float_endpoint(value, side, provenance, "interval arithmetic (outward rounded)")


def _below(ep: Endpoint, threshold) -> bool:
    if ep.exact is not None:
        return compare(ep.exact, threshold) < 0
    return ep.value < float(threshold)


def _at_or_above(ep: Endpoint, threshold) -> bool:
    if ep.exact is not None:
        return compare(ep.exact, threshold) >= 0
    return ep.value >= float(threshold)


def _verdict(lower: Optional[Endpoint], upper: Optional[Endpoint], threshold) -> str:
    if upper is not None and _below(upper, threshold):
        return CERTIFIED_TRUE
    if lower is not None and _at_or_above(lower, threshold):
        return CERTIFIED_FALSE
    return INCONCLUSIVE


def _nonnegative(report: BoundReport, name: str) -> None:
    for ep in (report.certified_lower, report.certified_upper):
        if ep is not None and ep.value < 0 and (ep.exact is None or compare(ep.exact, 0) < 0):
            raise ValidationError(f"{name} endpoint {ep.value} is negative")


def _report(condition: str, lower, upper, threshold, inputs, notes) -> ConditionReport:
    verdict = _verdict(lower, upper, threshold)
    if lower is None and upper is None:
        notes = notes + ["no certified endpoints on the needed sides; verdict cannot be certified"]
    return ConditionReport(condition, verdict, lower, upper, sympy.sympify(threshold), inputs, notes)


def check_bs3(rho: BoundReport, pc: BoundReport, sizeS: int) -> ConditionReport:
    """rho * p_c * |S| < 1."""
    if sizeS < 1:
        raise ValidationError("|S| must be positive")
    _nonnegative(rho, "rho")
    _nonnegative(pc, "p_c")
    n = _constant(sizeS)
    lower = _combine("lower", [rho.certified_lower, pc.certified_lower, n])
    upper = _combine("upper", [rho.certified_upper, pc.certified_upper, n])
    inputs = _input_rows("rho", rho) + _input_rows("p_c", pc) + [
        {"quantity": "|S|", "endpoint": "exact", "value": sizeS, "provenance": CERTIFIED_EXACT}]
    return _report(BS3, lower, upper, 1, inputs, [])


def check_growth4(rho: BoundReport, sizeS: int, gr: BoundReport) -> ConditionReport:
    """rho * |S| / gr < 1; when true, rho(S^k) tends to 0 along k."""
    if sizeS < 1:
        raise ValidationError("|S| must be positive")
    _nonnegative(rho, "rho")
    gr_lo = gr.certified_lower
    if gr_lo is not None and (gr_lo.value <= 0 if gr_lo.exact is None else compare(gr_lo.exact, 0) <= 0):
        raise ValidationError(f"growth-rate lower endpoint {gr_lo.value} must be positive")
    n = _constant(sizeS)
    lower = _combine("lower", [rho.certified_lower, n], [gr.certified_upper])
    upper = _combine("upper", [rho.certified_upper, n], [gr_lo])
    inputs = _input_rows("rho", rho) + _input_rows("gr", gr) + [
        {"quantity": "|S|", "endpoint": "exact", "value": sizeS, "provenance": CERTIFIED_EXACT}]
    notes = []
    report = _report(GROWTH4, lower, upper, 1, inputs, notes)
    if report.verdict == CERTIFIED_TRUE:
        report.notes.append("consequence: rho(S^k) -> 0 as k grows (infinitesimally small spectral radius "
                            "along the powers of S)")
    return report


def check_radius_half(rho: BoundReport) -> ConditionReport:
    """rho < 1/2."""
    _nonnegative(rho, "rho")
    return _report(RADIUS_HALF, rho.certified_lower, rho.certified_upper, sympy.Rational(1, 2),
                   _input_rows("rho", rho), [])


def _product_layers(spec: GroupSpec, S: GenSet, kmax: int, cap: int) -> list:
    """[S^1, ..., S^k] as tuples in first-appearance order, stopping early if a layer exceeds cap."""
    mul = groups.multiplier(spec)
    layer = tuple(S.elements)
    layers = [layer]
    for _ in range(kmax - 1):
        nxt: dict = {}
        for p in layer:
            for s in S.elements:
                nxt[mul(p, s)] = None
                if len(nxt) > cap:
                    return layers
        layer = tuple(nxt)
        layers.append(layer)
    return layers


def _largest_ball(spec: GroupSpec, T: GenSet, budget: int, rmax: int = 12):
    ball = None
    for r in range(1, rmax + 1):
        try:
            ball = build_ball(spec, T, r, budget)
        except SizeLimitError:
            break
    return ball


def _largest_series(spec: GroupSpec, T: GenSet, budget: int, hmax: int = 12):
    series = None
    for h in range(2, hmax + 1, 2):
        try:
            series = walk_series(spec, T, h, budget)
        except SizeLimitError:
            break
    return series


def _conductance_cell(spec: GroupSpec, S: GenSet, rho_S: Optional[Endpoint], k: int, layer: tuple,
                      budget: int) -> dict:
    ident = groups.identity(spec)
    T = GenSet(spec, tuple(g for g in layer if g != ident))
    row = {"k": k, "product_size": len(layer), "T_size": len(T)}
    product = sound = None
    if rho_S is not None:
        product = rho_upper_power(rho_S, len(S), len(layer), k).upper
        sound = rho_upper_power(rho_S, len(S), len(T), k).upper
    row["rho_upper_product"] = None if product is None else product.value
    row["rho_upper"] = None if sound is None else sound.value
    row["rho_upper_certified"] = sound is not None and _below(sound, 1)
    h_lower = None
    if row["rho_upper_certified"] and len(T) >= 2:
        h_lower = mohar_propagate(BoundReport("rho", None, sound), len(T)).lower
    row["h_lower"] = None if h_lower is None else h_lower.value
    row["h_lower_certified"] = h_lower is not None and h_lower.value > 0
    ball = _largest_ball(spec, T, budget)
    if ball is not None:
        table = ball_boundary_table(spec, T, range(1, ball.radius + 1), budget)
        best = min(table, key=lambda t: t["phi_upper"])
        row["h_upper"] = float(best["phi_upper"]) / len(T)
        row["h_upper_radius"] = best["k"]
    else:
        row["h_upper"] = None
        row["h_upper_radius"] = None
    series = _largest_series(spec, T, budget)
    if series is not None:
        rep = rho_lower(series)
        row["rho_lower_walk"] = rep.lower.value
        row["walk_horizon"] = series.horizon
    else:
        row["rho_lower_walk"] = None
        row["walk_horizon"] = None
    return row


def uniform_conductance_scan(spec: GroupSpec, S: GenSet, kmax: int, budget: int = SCAN_BUDGET,
                             rho_S: Optional[BoundReport] = None) -> dict:
    """Bounds on h(S^k) for k = 1..kmax.

    The rho(S^k) upper bound is (|S| rho(S))^k / |A| for a set A dominated by
    the multiset power. ``rho_upper_product`` uses A = S^k with the identity (the
    product set); ``rho_upper`` uses the identity-stripped set T, which is
    the generating set of the simple Cayley graph and feeds Mohar's h lower
    bound. A vacuous bound (>= 1) leaves the entry uncertified.
    """
    if not isinstance(kmax, int) or kmax < 1:
        raise ValidationError(f"kmax must be a positive integer, got {kmax!r}")
    if rho_S is None:
        exact = rho_exact_catalog(spec, S)
        rho_S = None if exact is None else BoundReport(
            "rho", None, exact_endpoint(exact, "upper", source="catalog spectral radius"))
    rho_up = None if rho_S is None else rho_S.certified_upper
    layers = _product_layers(spec, S, kmax, budget)
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        rows = list(pool.map(lambda kl: _conductance_cell(spec, S, rho_up, kl[0], kl[1], budget),
                             enumerate(layers, start=1)))
    truncated = len(layers) < kmax
    return {"rows": rows, "truncated": truncated,
            "truncated_at": len(layers) + 1 if truncated else None}


def _quotient_P(Q: GroupSpec, S_q: GenSet, n: int, m: int, budget: int):
    multi = walk_series(Q, power_multiset(Q, S_q, n), 2 * m, budget).P[2 * m]
    plain = walk_series(Q, S_q, 2 * m * n, budget).P[2 * m * n]
    return multi, plain


def lift_rho_scan(ambient: GroupSpec, S_q: GenSet, nmax: int, horizon: int, identity_m: int = 2,
                  budget: int = DEFAULT_MAX_VERTICES) -> list:
    """Walk-based rho bounds for the lifted generating sets, n = 1..nmax.

    Each row also checks the multiset identity P^(n)_{2m} = P_{2mn} on the
    quotient for m = 1..identity_m.
    """
    if not isinstance(nmax, int) or nmax < 1:
        raise ValidationError(f"nmax must be a positive integer, got {nmax!r}")
    if not isinstance(horizon, int) or horizon < 2:
        raise ValidationError(f"horizon must be an integer >= 2, got {horizon!r}")
    if not isinstance(ambient, DirectProduct) or len(ambient.factors) != 2:
        raise ValidationError("lift scans need an ambient direct product Q x N")
    Q = ambient.factors[0]

    def cell(n: int) -> dict:
        pre = lift_multiset(ambient, S_q, n)
        Sbar = lift_generating_set(ambient, S_q, n)
        series = walk_series(ambient, Sbar, horizon, budget)
        rep = rho_lower(series)
        checks = []
        for m in range(1, identity_m + 1):
            multi, plain = _quotient_P(Q, S_q, n, m, budget)
            checks.append({"m": m, "multiset": str(multi), "power": str(plain), "equal": multi == plain})
        return {"n": n, "lift_size": len(pre), "genset_size": len(Sbar), "horizon": horizon,
                "rho_lower": rep.lower.value, "ratio_estimate": rho_ratio_estimate(series),
                "identity_checks": checks}

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        rows = list(pool.map(cell, range(1, nmax + 1)))
    for prev, row in zip(rows, rows[1:]):
        row["decreasing"] = row["ratio_estimate"] < prev["ratio_estimate"]
    return rows
