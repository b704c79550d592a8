"""Breadth-first balls in Cayley graphs, sphere sizes and growth-rate bounds."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import sympy

from . import groups
from .bounds import CERTIFIED_BOUND, HEURISTIC, BoundReport, Endpoint, exact_endpoint
from .errors import SizeLimitError, ValidationError
from .gensets import GenSet, is_standard
from .groups import FreeGroup, GroupSpec

DEFAULT_MAX_VERTICES = 10**7

EXTERIOR = -1
"""Adjacency marker for an edge leaving the ball; its target sits at distance radius + 1."""

UNKNOWN = -2
"""Adjacency marker for the outer sphere of a ball built with ``boundary=False``."""


@dataclass(frozen=True, eq=False)
class Ball:
    spec: GroupSpec
    genset: GenSet
    radius: int
    vertices: list
    dist: np.ndarray
    adjacency: np.ndarray
    boundary: bool = True

    def __len__(self):
        return len(self.vertices)

    @cached_property
    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def layer_ends(self) -> np.ndarray:
        """layer_ends[j] = |B_j|. BFS order makes every B_j a prefix of the vertex list."""
        return np.cumsum(np.bincount(self.dist, minlength=self.radius + 1))

    def size(self, j: int) -> int:
        return int(self.layer_ends[j])


def build_ball(spec: GroupSpec, S: GenSet, r: int, max_vertices: int = DEFAULT_MAX_VERTICES,
               boundary: bool = True) -> Ball:
    """BFS ball of radius r; vertex 0 is the identity and ties break by generator order.

    Neighbours are ``s*v`` (left multiplication). With ``boundary=False`` the
    adjacency of the outer sphere is not computed and holds UNKNOWN, which is
    all a walk-count convolution needs.
    """
    if not isinstance(r, int) or r < 0:
        raise ValidationError(f"radius must be a non-negative integer, got {r!r}")
    if S.spec != spec:
        raise ValidationError(f"generating set lives in {S.spec}, not {spec}")
    lmuls = [groups.left_multiplier(spec, s) for s in S.elements]
    k = len(lmuls)
    start = groups.identity(spec)
    vertices = [start]
    dist = [0]
    index = {start: 0}
    setdefault = index.setdefault
    get = index.get
    adj: list[int] = []
    append = adj.append
    head = 0
    while head < len(vertices):
        v = vertices[head]
        dv = dist[head]
        head += 1
        if dv == r:
            if boundary:
                adj.extend([get(f(v), EXTERIOR) for f in lmuls])
            else:
                adj.extend([UNKNOWN] * k)
            continue
        nd = dv + 1
        for f in lmuls:
            n = len(vertices)
            w = f(v)
            j = setdefault(w, n)
            if j == n:
                if n >= max_vertices:
                    raise SizeLimitError(
                        f"ball of radius {r} exceeds the cap of {max_vertices} vertices "
                        f"(reached while filling radius {nd})", radius=nd)
                vertices.append(w)
                dist.append(nd)
            append(j)
    adjacency = np.array(adj, dtype=np.int64).reshape(len(vertices), k)
    ball = Ball(spec, S, r, vertices, np.array(dist, dtype=np.int32), adjacency, boundary)
    ball.__dict__["index"] = index
    return ball


def sphere_sizes(ball: Ball) -> list[int]:
    return [int(c) for c in np.bincount(ball.dist, minlength=ball.radius + 1)]


def ball_sizes(ball: Ball) -> list[int]:
    return [int(c) for c in ball.layer_ends]


def exact_growth_rate(spec: GroupSpec, S: GenSet):
    """Catalog growth rate, or None: 2k-1 for F_k with standard generators, 1 for polynomial growth."""
    if groups.has_polynomial_growth(spec):
        return sympy.Integer(1)
    if isinstance(spec, FreeGroup) and is_standard(S):
        return sympy.Integer(2 * spec.rank - 1)
    return None


def growth_estimate(spec: GroupSpec, S: GenSet, kmax: int,
                    max_vertices: int = DEFAULT_MAX_VERTICES) -> BoundReport:
    """Bounds on gr(Γ,S) from ball sizes up to radius kmax.

    |B_k|^(1/k) bounds gr from above for every k (ball sizes are
    submultiplicative), so the minimum over 2 <= k <= kmax is certified.
    The last growth ratio is only a heuristic lower estimate.
    """
    if not isinstance(kmax, int) or kmax < 2:
        raise ValidationError(f"kmax must be an integer >= 2, got {kmax!r}")
    ball = build_ball(spec, S, kmax, max_vertices, boundary=False)
    sizes = ball_sizes(ball)
    roots = {k: sympy.root(sympy.Integer(sizes[k]), k) for k in range(2, kmax + 1)}
    best_k = min(roots, key=lambda k: (float(roots[k]), k))
    ball_upper = exact_endpoint(roots[best_k], "upper", CERTIFIED_BOUND,
                                f"|B_{best_k}|^(1/{best_k}) = {sizes[best_k]}^(1/{best_k})")
    ratio = sizes[kmax] / sizes[kmax - 1]
    details = {
        "ball_sizes": sizes,
        "root_bounds": {k: float(v) for k, v in roots.items()},
        "ball_upper": ball_upper.value,
        "last_ratio": ratio,
    }
    exact = exact_growth_rate(spec, S)
    if exact is not None:
        lo = exact_endpoint(exact, "lower", source="catalog growth rate")
        hi = exact_endpoint(exact, "upper", source="catalog growth rate")
        return BoundReport("gr", lo, hi, details=details)
    lo = Endpoint(ratio, HEURISTIC, f"|B_{kmax}|/|B_{kmax - 1}|")
    return BoundReport("gr", lo, ball_upper, details=details)


def edge_list_lines(ball: Ball, spec_text: str | None = None) -> list[str]:
    """Edge-list export: one ``u v label`` line per undirected interior edge."""
    spec_text = spec_text or str(ball.spec)
    labels = ball.genset.labels
    lines = [f"# group={spec_text} |S|={len(ball.genset)} r={ball.radius}"]
    adj = ball.adjacency
    for u in range(len(ball)):
        row = adj[u]
        for s in range(adj.shape[1]):
            v = int(row[s])
            if v > u:
                lines.append(f"{u} {v} {abs(labels[s])}")
    return lines
