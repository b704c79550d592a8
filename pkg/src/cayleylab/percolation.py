"""Bernoulli bond percolation on ball truncations.

Every edge has a uniform variable U(seed, trial, edge) computed by a
stateless counter-based hash; an edge is open at parameter p iff U < p.
Sharing U across p couples all parameters, so the estimated crossing
probability is monotone in p exactly, not just statistically. Trials are
independent, so any number of worker threads gives bit-identical results.

The infinite-cluster proxy is "the origin's open cluster reaches the sphere
of radius r" with free boundary, which on a regular tree is exactly the
quantity computed by ``tree_theta_oracle``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numba
import numpy as np
import sympy
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.stats import binomtest

from .bounds import CERTIFIED_BOUND, HEURISTIC, BoundReport, Endpoint, exact_endpoint, float_endpoint
from .cayley import DEFAULT_MAX_VERTICES, Ball, build_ball
from .errors import ValidationError
from .gensets import GenSet
from .groups import GroupSpec
from .isoperimetry import mohar_propagate, phi_from_h
from .spectral import rho_report

BLOCK = 512
THREADS_ENV = "CAYLEYLAB_THREADS"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO_M53 = 1.0 / 9007199254740992.0


@numba.njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@numba.njit(cache=True, inline="always")
def _uniform(seed, trial, edge):
    z = _mix64(np.uint64(seed) + _GOLDEN)
    z = _mix64(z ^ (np.uint64(trial) + _GOLDEN))
    z = _mix64(z ^ (np.uint64(edge) + _GOLDEN))
    return np.float64(z >> _S11) * _TWO_M53


@numba.njit(cache=True)
def _edge_uniforms(seed, trial, edges):
    out = np.empty(edges.shape[0], np.float64)
    for i in range(edges.shape[0]):
        out[i] = _uniform(seed, trial, edges[i])
    return out


@numba.njit(cache=True, nogil=True)
def _crossing_block(adj, inv, dist, n_r, radius, p, seed, t0, t1, out):
    k = adj.shape[1]
    stamp = np.zeros(n_r, np.int64)
    stack = np.empty(n_r, np.int64)
    for t in range(t0, t1):
        mark = t - t0 + 1
        if radius == 0:
            out[t - t0] = 1
            continue
        stamp[0] = mark
        stack[0] = 0
        top = 1
        hit = 0
        while top > 0 and hit == 0:
            top -= 1
            v = stack[top]
            for s in range(k):
                w = adj[v, s]
                if w < 0 or w >= n_r or stamp[w] == mark:
                    continue
                if v < w:
                    e = v * k + s
                else:
                    e = w * k + inv[s]
                if _uniform(seed, t, e) < p:
                    if dist[w] == radius:
                        hit = 1
                        break
                    stamp[w] = mark
                    stack[top] = w
                    top += 1
        out[t - t0] = hit


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    level = math.erf(z / math.sqrt(2))
    ci = binomtest(successes, trials).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True, eq=False)
class PercConfig:
    ball: Ball
    p: float
    trials: int
    seed: int = 0
    tau_cross: float = 0.05
    radius: Optional[int] = None
    """Sphere to reach; defaults to the ball radius. Smaller radii reuse the prefix ball."""

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValidationError(f"p must lie in [0, 1], got {self.p}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ValidationError(f"trials must be a positive integer, got {self.trials!r}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        r = self.ball.radius if self.radius is None else self.radius
        if not 0 <= r <= self.ball.radius:
            raise ValidationError(f"radius {r} outside 0..{self.ball.radius}")
        object.__setattr__(self, "radius", r)


@dataclass(frozen=True)
class PercEstimate:
    estimate: float
    ci: tuple
    trials: int
    seed: int
    radius: int
    p: float
    successes: int

    def within(self, value: float, z: float = 3.0) -> bool:
        lo, hi = wilson_interval(self.successes, self.trials, z)
        return lo <= value <= hi


@dataclass(frozen=True, eq=False)
class _Kernel:
    adj: np.ndarray
    inv: np.ndarray
    dist: np.ndarray

    @classmethod
    def of(cls, ball: Ball) -> "_Kernel":
        cached = ball.__dict__.get("_perc_kernel")
        if cached is None:
            cached = cls(np.ascontiguousarray(ball.adjacency, dtype=np.int64),
                         np.asarray(ball.genset.inverse_index, dtype=np.int64),
                         np.ascontiguousarray(ball.dist, dtype=np.int64))
            ball.__dict__["_perc_kernel"] = cached
        return cached


def crossing_indicators(ball: Ball, p: float, trials: int, seed: int, radius: Optional[int] = None,
                        workers: Optional[int] = None) -> np.ndarray:
    """Per-trial 0/1: does the origin's open cluster reach the sphere of radius r?"""
    radius = ball.radius if radius is None else radius
    kern = _Kernel.of(ball)
    n_r = ball.size(radius)
    out = np.zeros(trials, dtype=np.uint8)
    blocks = [(t0, min(t0 + BLOCK, trials)) for t0 in range(0, trials, BLOCK)]

    def run(block):
        t0, t1 = block
        _crossing_block(kern.adj, kern.inv, kern.dist, n_r, radius, float(p), np.uint64(seed),
                        t0, t1, out[t0:t1])

    workers = worker_count() if workers is None else workers
    if workers == 1 or len(blocks) == 1:
        for b in blocks:
            run(b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, blocks))
    return out


def theta_r(cfg: PercConfig) -> PercEstimate:
    """Fraction of trials whose origin cluster touches the radius-r sphere, with 95% Wilson CI."""
    hits = int(crossing_indicators(cfg.ball, cfg.p, cfg.trials, cfg.seed, cfg.radius).sum())
    return PercEstimate(hits / cfg.trials, wilson_interval(hits, cfg.trials), cfg.trials, cfg.seed,
                        cfg.radius, cfg.p, hits)


def interior_edges(ball: Ball) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(u, v, edge_id) for every edge inside the ball, each listed once with u < v."""
    adj = ball.adjacency
    k = adj.shape[1]
    u = np.repeat(np.arange(len(ball), dtype=np.int64), k)
    s = np.tile(np.arange(k, dtype=np.int64), len(ball))
    v = adj.reshape(-1)
    keep = v > u
    return u[keep], v[keep], u[keep] * k + s[keep]


def percolate_once(ball: Ball, p: float, seed: int, trial: int = 0) -> np.ndarray:
    """Cluster label of every vertex for one configuration.

    Labels are renumbered so that cluster i is the one whose smallest vertex
    is the i-th smallest cluster representative; the origin is always label 0.
    """
    if not 0 <= p <= 1:
        raise ValidationError(f"p must lie in [0, 1], got {p}")
    u, v, eid = interior_edges(ball)
    open_ = _edge_uniforms(np.uint64(seed), np.uint64(trial), eid) < p
    n = len(ball)
    graph = coo_matrix((np.ones(int(open_.sum()), dtype=np.int8), (u[open_], v[open_])), shape=(n, n))
    _, raw = connected_components(graph, directed=False)
    _, first = np.unique(raw, return_index=True)
    order = np.argsort(first)
    relabel = np.empty_like(order)
    relabel[order] = np.arange(len(order))
    return relabel[raw]


def cluster_sizes(labels: np.ndarray) -> np.ndarray:
    return np.bincount(labels)


def tree_theta_oracle(d: int, r: int, p):
    """Probability that the root of the depth-r d-regular tree reaches depth r.

    u_0 = 1, u_{j+1} = 1 - (1 - p u_j)^(d-1), answer 1 - (1 - p u_{r-1})^d.
    Exact when p is a Fraction.
    """
    if not isinstance(d, int) or d < 3:
        raise ValidationError(f"tree degree must be an integer >= 3, got {d!r}")
    if not isinstance(r, int) or r < 1:
        raise ValidationError(f"depth must be a positive integer, got {r!r}")
    u = Fraction(1) if isinstance(p, Fraction) else 1.0
    for _ in range(r - 1):
        u = 1 - (1 - p * u) ** (d - 1)
    return 1 - (1 - p * u) ** d


@dataclass
class _CoupledTheta:
    ball: Ball
    trials: int
    seed: int
    radius: int
    cache: dict = field(default_factory=dict)

    def hits(self, p: float) -> int:
        if p not in self.cache:
            self.cache[p] = int(crossing_indicators(self.ball, p, self.trials, self.seed, self.radius).sum())
        return self.cache[p]

    def crossing(self, statistic, tau: float, tol: float) -> float:
        lo, hi = 0.0, 1.0
        while hi - lo > tol:
            mid = (lo + hi) / 2
            if statistic(self.hits(mid)) >= tau:
                hi = mid
            else:
                lo = mid
        return (lo + hi) / 2


def pc_bounds(S: GenSet, rho: Optional[BoundReport]) -> tuple[Endpoint, Optional[Endpoint]]:
    """Certified p_c endpoints.

    Lower: 1/(|S|-1), the standard comparison with the |S|-regular tree (not
    a result of the Cayley-graph structure). Upper: 1/(phi_lower + 1) when a
    certified phi lower bound follows from a certified rho upper bound.
    """
    n = len(S)
    lower = exact_endpoint(sympy.Rational(1, max(n - 1, 1)), "lower", CERTIFIED_BOUND,
                           "external bound p_c >= 1/(|S|-1) (branching comparison)")
    upper = None
    if rho is not None and rho.certified_upper is not None and n >= 2:
        h = mohar_propagate(BoundReport("rho", None, rho.certified_upper), n)
        phi_lo = phi_from_h(h, n).lower
        if phi_lo is not None and phi_lo.value > 0:
            if phi_lo.exact is not None:
                upper = exact_endpoint(sympy.radsimp(1 / (phi_lo.exact + 1)), "upper", CERTIFIED_BOUND,
                                       "p_c <= 1/(phi_lower + 1), phi_lower via Mohar")
            else:
                upper = float_endpoint(1 / (phi_lo.value + 1), "upper", CERTIFIED_BOUND,
                                       "p_c <= 1/(phi_lower + 1), phi_lower via Mohar")
    return lower, upper


def pc_estimate(spec: GroupSpec, S: GenSet, r: int, trials: int, seed: int = 0, tau_cross: float = 0.05,
                tol: float = 1e-4, rho: Optional[BoundReport] = None, ball: Optional[Ball] = None,
                curve_points: int = 21, max_vertices: int = DEFAULT_MAX_VERTICES) -> BoundReport:
    """Heuristic p_c from the coupled crossing theta_r(p) = tau_cross, plus certified endpoints.

    The returned report's ``estimate`` is the heuristic crossing; ``details``
    carries its Wilson-band interval and the full theta curve.
    """
    if r < 1:
        raise ValidationError("p_c estimation needs radius >= 1")
    if not 0 < tau_cross < 1:
        raise ValidationError(f"tau_cross must lie in (0, 1), got {tau_cross}")
    if ball is None:
        ball = build_ball(spec, S, r, max_vertices)
    coupled = _CoupledTheta(ball, trials, seed, r)
    frac = lambda h: h / trials  # noqa: E731
    if frac(coupled.hits(1.0)) < tau_cross:
        raise ValidationError(f"theta_r(1) < tau_cross={tau_cross}: crossing unreachable")
    if frac(coupled.hits(tol)) > tau_cross:
        raise ValidationError(f"theta_r({tol}) already exceeds tau_cross={tau_cross}: radius {r} too small")
    est = coupled.crossing(frac, tau_cross, tol)
    ci_lo = coupled.crossing(lambda h: wilson_interval(h, trials)[1], tau_cross, tol)
    ci_hi = coupled.crossing(lambda h: wilson_interval(h, trials)[0], tau_cross, tol)
    curve = []
    for i in range(curve_points):
        p = i / (curve_points - 1)
        h = coupled.hits(p)
        lo, hi = wilson_interval(h, trials)
        curve.append({"p": p, "r": r, "trials": trials, "theta_hat": h / trials,
                      "ci_lo": lo, "ci_hi": hi, "seed": seed})
    rho = rho if rho is not None else rho_report(spec, S)
    lower, upper = pc_bounds(S, rho)
    estimate = Endpoint(est, HEURISTIC, f"coupled crossing theta_{r}(p) = {tau_cross}, {trials} trials")
    return BoundReport("p_c", lower, upper, estimate,
                       details={"ci": (ci_lo, ci_hi), "curve": curve, "tau_cross": tau_cross,
                                "radius": r, "trials": trials, "seed": seed})
