"""Return probabilities of the S-random walk and spectral radius bounds.

Counts are exact integers. ``c_j(g)`` is the number of length-j words over
the (multi)set evaluating to g, computed by convolution on a BFS ball.
Return probabilities use the meet-in-the-middle identity

    P_{a+b} = sum_g c_a(g) c_b(g^-1) / W^(a+b)        (W = total weight)

so a horizon of n only needs the ball of radius ceil(n/2). For symmetric
weights c_b(g^-1) = c_b(g).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np
import sympy

from . import groups
from .bounds import (CERTIFIED_BOUND, BoundReport, Endpoint, exact_endpoint, float_endpoint,
                     to_sympy)
from .cayley import DEFAULT_MAX_VERTICES, Ball, build_ball
from .errors import SizeLimitError, ValidationError
from .gensets import GenSet, MultiGenSet, is_standard
from .groups import FreeGroup, GroupSpec

_INT64_SAFE = 2**62


@dataclass(frozen=True, eq=False)
class WalkSeries:
    spec: GroupSpec
    generators: Union[GenSet, MultiGenSet]
    horizon: int
    ball: Ball
    weights: tuple
    loop: int
    counts: list
    """counts[j][v] = c_j(ball.vertices[v]) for j <= ceil(horizon/2)."""
    P: tuple
    """P[j] = exact return probability after j steps, j <= horizon."""

    @property
    def total_weight(self) -> int:
        return sum(self.weights) + self.loop

    def count(self, j: int, g) -> int:
        if j >= len(self.counts):
            raise ValidationError(f"counts are stored up to length {len(self.counts) - 1}")
        v = self.ball.index.get(g)
        return 0 if v is None else int(self.counts[j][v])

    def even(self, m: int) -> Fraction:
        return self.P[2 * m]

    @property
    def max_m(self) -> int:
        return self.horizon // 2


def _support_genset(spec: GroupSpec, S) -> tuple[GenSet, tuple, int]:
    if isinstance(S, GenSet):
        return S, (1,) * len(S), 0
    if not isinstance(S, MultiGenSet):
        raise ValidationError(f"expected a GenSet or MultiGenSet, got {type(S).__name__}")
    if not S.is_symmetric():
        raise ValidationError("walks over non-symmetric multisets are not supported")
    ident = groups.identity(spec)
    entries = [(g, m) for g, m in S.entries if g != ident]
    loop = S.multiplicity.get(ident, 0)
    if not entries:
        raise ValidationError("multiset is supported on the identity only")
    T = GenSet(spec, tuple(g for g, _ in entries))
    return T, tuple(m for _, m in entries), loop


def walk_series(spec: GroupSpec, S, n: int, max_vertices: int = DEFAULT_MAX_VERTICES) -> WalkSeries:
    """Exact walk counts and return probabilities P_0..P_n for the S-walk."""
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"horizon must be a positive integer, got {n!r}")
    T, weights, loop = _support_genset(spec, S)
    half = (n + 1) // 2
    try:
        ball = build_ball(spec, T, half, max_vertices, boundary=False)
    except SizeLimitError as exc:
        hint = " (tree_return_oracle covers free groups with standard generators)" \
            if isinstance(spec, FreeGroup) and isinstance(S, GenSet) and is_standard(S) else ""
        raise SizeLimitError(f"walk series to horizon {n} needs a ball of radius {half}: {exc}{hint}",
                             radius=exc.radius) from exc
    W = sum(weights) + loop
    dtype = np.int64 if W**half < _INT64_SAFE else object
    N = len(ball)
    c = np.zeros(N, dtype=dtype)
    c[0] = 1
    counts = [c]
    adj = ball.adjacency
    for j in range(half):
        end = ball.size(j)
        cur = counts[-1]
        nxt = np.zeros(N, dtype=dtype)
        if loop:
            nxt[:end] = loop * cur[:end]
        src = cur[:end]
        for s, w in enumerate(weights):
            # v -> s*v is injective, so the fancy-indexed add has no collisions.
            nxt[adj[:end, s]] += src if w == 1 else w * src
        counts.append(nxt)
    P = []
    for j in range(n + 1):
        a = j // 2
        b = j - a
        end = ball.size(a)
        ca, cb = counts[a][:end], counts[b][:end]
        if W**j < _INT64_SAFE and dtype is np.int64:
            num = int(np.dot(ca, cb))
        else:
            num = sum(int(x) * int(y) for x, y in zip(ca.tolist(), cb.tolist()) if x)
        P.append(Fraction(num, W**j))
    return WalkSeries(spec, S, n, ball, weights, loop, counts, tuple(P))


def rho_exact_catalog(spec: GroupSpec, S: GenSet) -> Optional[sympy.Expr]:
    """Known spectral radius, or None.

    F_k with standard generators: sqrt(2k-1)/k. Amenable catalog groups
    (free abelian, finite, Z/2*Z/2, and their direct products): 1 for every S.
    """
    if groups.is_amenable(spec):
        return sympy.Integer(1)
    if isinstance(spec, FreeGroup) and is_standard(S):
        k = spec.rank
        return sympy.sqrt(2 * k - 1) / k
    return None


def root_estimates(series: WalkSeries) -> list:
    """P_{2m}^(1/2m) for m = 1..horizon/2, as floats (0 where P vanishes)."""
    return [float(series.even(m)) ** (1 / (2 * m)) for m in range(1, series.max_m + 1)]


def rho_lower(series: WalkSeries) -> BoundReport:
    """Certified lower bound max_m P_{2m}^(1/2m) on the spectral radius.

    Each term bounds rho from below because the walk operator is self-adjoint
    and P_{2m} = <A^{2m} d_e, d_e> <= ||A||^{2m}.
    """
    if series.max_m < 1:
        raise ValidationError("rho_lower needs a horizon of at least 2")
    if isinstance(series.generators, MultiGenSet) and not series.generators.is_symmetric():
        raise ValidationError("rho_lower needs a symmetric generating set")
    roots = root_estimates(series)
    m = max(range(1, series.max_m + 1), key=lambda i: (roots[i - 1], -i))
    P = series.even(m)
    expr = sympy.Rational(P.numerator, P.denominator) ** sympy.Rational(1, 2 * m)
    lower = exact_endpoint(expr, "lower", CERTIFIED_BOUND, f"P_{2 * m}^(1/{2 * m}) from exact walk counts")
    upper = None
    if isinstance(series.generators, GenSet):
        exact = rho_exact_catalog(series.spec, series.generators)
        if exact is not None:
            upper = exact_endpoint(exact, "upper", source="catalog spectral radius")
    return BoundReport("rho", lower, upper,
                       details={"witness_m": m, "witness_P": P, "root_estimates": roots,
                                "horizon": series.horizon})


def rho_ratio_estimate(series: WalkSeries, m: Optional[int] = None) -> float:
    """Heuristic sqrt(P_{2m}/P_{2m-2}); converges faster than the roots, certifies nothing."""
    m = series.max_m if m is None else m
    if not 1 <= m <= series.max_m:
        raise ValidationError(f"m must lie in 1..{series.max_m}, got {m}")
    den = series.even(m - 1)
    if den == 0:
        raise ValidationError(f"P_{2 * m - 2} vanishes; ratio undefined")
    return math.sqrt(series.even(m) / den)


def rho_report(spec: GroupSpec, S: GenSet, horizon: int = 0,
               max_vertices: int = DEFAULT_MAX_VERTICES) -> BoundReport:
    """Best available bounds: catalog exact value, else walk-count lower bound."""
    exact = rho_exact_catalog(spec, S)
    if exact is not None:
        return BoundReport("rho", exact_endpoint(exact, "lower", source="catalog spectral radius"),
                           exact_endpoint(exact, "upper", source="catalog spectral radius"))
    if horizon < 2:
        return BoundReport("rho")
    series = walk_series(spec, S, horizon, max_vertices)
    rep = rho_lower(series)
    est = Endpoint(rho_ratio_estimate(series), "heuristic", f"ratio estimate at horizon {horizon}")
    return BoundReport("rho", rep.lower, rep.upper, est, rep.details)


def tree_return_oracle(d: int, n: int) -> list:
    """Exact P_{2m}, m = 0..n, for simple random walk on the d-regular tree.

    Projects the walk to its distance from the root: up with probability
    (d-1)/d, down with 1/d, and up for sure from the root. Integer path
    counts over distances 0..n, O(n^2) time.
    """
    if not isinstance(d, int) or d < 3:
        raise ValidationError(f"tree degree must be an integer >= 3, got {d!r}")
    if not isinstance(n, int) or n < 0:
        raise ValidationError(f"n must be a non-negative integer, got {n!r}")
    v = [1] + [0] * n
    out = [Fraction(1)]
    for t in range(1, 2 * n + 1):
        w = [0] * (n + 1)
        if n:
            w[1] = d * v[0]
        for k in range(1, n + 1):
            x = v[k]
            if x:
                w[k - 1] += x
                if k < n:
                    w[k + 1] += (d - 1) * x
        # Walkers farther than 2n - t from the root cannot return by time 2n.
        for k in range(min(t, 2 * n - t) + 1, n + 1):
            w[k] = 0
        v = w
        if t % 2 == 0:
            out.append(Fraction(v[0], d**t))
    return out


def ratio_from_list(P_even: list, m: Optional[int] = None) -> float:
    m = len(P_even) - 1 if m is None else m
    return math.sqrt(P_even[m] / P_even[m - 1])


def rho_upper_power(rho_upper_S, sizeS: int, sizeSk: int, k: int) -> BoundReport:
    """|S|^k rho(S)^k / |S^k| bounds rho(S^k) from above.

    ``rho_upper_S`` is a certified upper Endpoint (or a BoundReport carrying
    one). The bound is sound for any set whose indicator is dominated by the
    k-fold multiset power, which covers the product set S^k and its
    identity-stripped version alike; pass the size of the set you mean.
    """
    ep = rho_upper_S.certified_upper if isinstance(rho_upper_S, BoundReport) else rho_upper_S
    if ep is None or not isinstance(ep, Endpoint) or not ep.certified:
        raise ValidationError("rho_upper_power needs a certified upper bound on rho(S)")
    if sizeS < 1 or sizeSk < 1 or k < 1:
        raise ValidationError("sizes and k must be positive")
    source = f"power bound: {sizeS}^{k} rho^{k} / {sizeSk}"
    if ep.exact is not None:
        expr = sympy.Integer(sizeS) ** k * to_sympy(ep.exact) ** k / sizeSk
        upper = exact_endpoint(sympy.radsimp(expr), "upper", CERTIFIED_BOUND, source)
    else:
        upper = float_endpoint(sizeS**k * ep.value**k / sizeSk, "upper", CERTIFIED_BOUND, source)
    return BoundReport("rho", None, upper, details={"k": k, "sizeS": sizeS, "sizeSk": sizeSk})


def series_csv_rows(series: WalkSeries) -> list[list]:
    """Rows ``m, P_2m_num, P_2m_den, P_2m_float, root_estimate, ratio_estimate``."""
    rows = []
    for m in range(1, series.max_m + 1):
        P = series.even(m)
        prev = series.even(m - 1)
        ratio = math.sqrt(P / prev) if prev else float("nan")
        rows.append([m, P.numerator, P.denominator, float(P), float(P) ** (1 / (2 * m)), ratio])
    return rows
