"""Generating sets, set and multiset powers, and lifts through direct products."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

from . import groups
from .errors import ValidationError
from .groups import DirectProduct, FreeAbelian, FreeGroup, GroupSpec


@dataclass(frozen=True)
class GenSet:
    """A simple symmetric generating set: no identity, no duplicates, closed under inverses.

    Element order is significant: it fixes the BFS tie-break and the
    generator labels used by exported edge lists.
    """

    spec: GroupSpec
    elements: tuple

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        ops = groups._ops(self.spec)
        if not self.elements:
            raise ValidationError("generating set is empty")
        seen = set()
        for g in self.elements:
            ops.check(g)
            if g == ops.identity:
                raise ValidationError("generating set contains the identity")
            if g in seen:
                raise ValidationError(f"duplicate generator {ops.fmt(g)}")
            seen.add(g)
        for g in self.elements:
            if ops.inv(g) not in seen:
                raise ValidationError(f"generating set is not symmetric: missing inverse of {ops.fmt(g)}")

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, g):
        return g in self.index

    @cached_property
    def index(self) -> dict:
        return {g: i for i, g in enumerate(self.elements)}

    @cached_property
    def inverse_index(self) -> tuple:
        """inverse_index[i] is the position of elements[i]**-1."""
        inv = groups.inverter(self.spec)
        return tuple(self.index[inv(g)] for g in self.elements)

    @cached_property
    def labels(self) -> tuple:
        """Signed labels: the first member of each inverse pair gets +i, its partner -i."""
        out = [0] * len(self.elements)
        nxt = 1
        for i, j in enumerate(self.inverse_index):
            if out[i]:
                continue
            out[i] = nxt
            if j != i:
                out[j] = -nxt
            nxt += 1
        return tuple(out)

    def serialize(self) -> list[str]:
        return sorted(groups.format_element(self.spec, g) for g in self.elements)


@dataclass(frozen=True)
class MultiGenSet:
    """Generating multiset: element -> multiplicity. The identity may be present."""

    spec: GroupSpec
    entries: tuple = field(default=())

    def __post_init__(self):
        entries = tuple(self.entries.items()) if isinstance(self.entries, dict) else tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        ops = groups._ops(self.spec)
        seen = set()
        for g, m in entries:
            ops.check(g)
            if not isinstance(m, int) or m < 1:
                raise ValidationError(f"multiplicity must be a positive integer, got {m!r}")
            if g in seen:
                raise ValidationError(f"duplicate multiset entry {ops.fmt(g)}")
            seen.add(g)
        if not entries:
            raise ValidationError("generating multiset is empty")

    @cached_property
    def multiplicity(self) -> dict:
        return dict(self.entries)

    @property
    def total(self) -> int:
        return sum(m for _, m in self.entries)

    @property
    def support(self) -> tuple:
        return tuple(g for g, _ in self.entries)

    def is_symmetric(self) -> bool:
        inv = groups.inverter(self.spec)
        mult = self.multiplicity
        return all(mult.get(inv(g)) == m for g, m in self.entries)


def symmetric_closure(spec: GroupSpec, raw) -> GenSet:
    """raw ∪ raw⁻¹, deduplicated; each element is followed by its inverse when new."""
    raw = list(raw)
    if not raw:
        raise ValidationError("cannot close an empty set")
    ops = groups._ops(spec)
    out: dict = {}
    for g in raw:
        ops.check(g)
        if g == ops.identity:
            raise ValidationError("identity is not allowed in a simple generating set")
        out.setdefault(g, None)
        out.setdefault(ops.inv(g), None)
    return GenSet(spec, tuple(out))


def standard_genset(spec: GroupSpec) -> GenSet:
    return symmetric_closure(spec, groups.standard_generators(spec))


def is_standard(S: GenSet) -> bool:
    return set(S.elements) == set(standard_genset(S.spec).elements)


def product_set(spec: GroupSpec, S: GenSet, k: int) -> tuple:
    """All products s1...sk in first-appearance order, identity included if it occurs."""
    if not isinstance(k, int) or k < 1:
        raise ValidationError(f"power must be a positive integer, got {k!r}")
    mul = groups.multiplier(spec)
    layer = dict.fromkeys(S.elements)
    for _ in range(k - 1):
        layer = dict.fromkeys(mul(p, s) for p in layer for s in S.elements)
    return tuple(layer)


def power_set(spec: GroupSpec, S: GenSet, k: int) -> GenSet:
    """S^k with the identity stripped, as a simple generating set."""
    ident = groups.identity(spec)
    return GenSet(spec, tuple(g for g in product_set(spec, S, k) if g != ident))


def power_multiset(spec: GroupSpec, S, k: int) -> MultiGenSet:
    """S^(k): multiplicity of g is the number of length-k words over S evaluating to g.

    ``S`` may itself be a MultiGenSet, in which case letters carry their weights.
    """
    if not isinstance(k, int) or k < 1:
        raise ValidationError(f"power must be a positive integer, got {k!r}")
    base = list(S.entries) if isinstance(S, MultiGenSet) else [(s, 1) for s in S.elements]
    mul = groups.multiplier(spec)
    counts = dict(base)
    for _ in range(k - 1):
        nxt: dict = {}
        for g, c in counts.items():
            for s, w in base:
                h = mul(g, s)
                nxt[h] = nxt.get(h, 0) + c * w
        counts = nxt
    return MultiGenSet(spec, counts)


def enumerate_normal_subgroup(spec: GroupSpec):
    """Deterministic enumeration of the non-identity elements of Z^d or F_k.

    Z^1 runs 1, -1, 2, -2, ...; Z^d runs by l1-norm then lexicographically;
    F_k runs by word length then lexicographically over letters 1, -1, 2, -2, ...
    """
    if isinstance(spec, FreeAbelian):
        d = spec.rank
        for n in itertools.count(1):
            shell = []
            for v in itertools.product(range(-n, n + 1), repeat=d):
                if sum(abs(x) for x in v) == n:
                    shell.append(v)
            if d == 1:
                shell.sort(key=lambda v: v[0] < 0)
            else:
                shell.sort()
            yield from shell
    elif isinstance(spec, FreeGroup):
        letters = [x for i in range(1, spec.rank + 1) for x in (i, -i)]
        for n in itertools.count(1):
            for w in itertools.product(letters, repeat=n):
                if all(w[i] != -w[i + 1] for i in range(n - 1)):
                    yield w
    else:
        raise ValidationError(f"lift fiber group must be free or free abelian, got {spec}")


def lift_multiset(ambient: GroupSpec, S_q: GenSet, n: int) -> list:
    """Pre-symmetrization lift of S_q^(n) into ambient = Q x N.

    Returns the list of |S_q|^n pairs (g, h_{g,i}) with the h_{g,i} distinct
    for each fixed g.
    """
    if not isinstance(ambient, DirectProduct) or len(ambient.factors) != 2:
        raise ValidationError("lift needs an ambient direct product Q x N with exactly two factors")
    Q, N = ambient.factors
    if S_q.spec != Q:
        raise ValidationError(f"quotient generating set lives in {S_q.spec}, expected {Q}")
    if not isinstance(N, (FreeGroup, FreeAbelian)):
        raise ValidationError(f"fiber factor {N} must be infinite (free or free abelian)")
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"lift power must be a positive integer, got {n!r}")
    alpha = power_multiset(Q, S_q, n)
    need = max(m for _, m in alpha.entries)
    fiber = list(itertools.islice(enumerate_normal_subgroup(N), need))
    return [(g, fiber[i]) for g, m in alpha.entries for i in range(m)]


def lift_generating_set(ambient: GroupSpec, S_q: GenSet, n: int) -> GenSet:
    """Simple symmetric generating set of Q x N projecting onto S_q^(n)."""
    return symmetric_closure(ambient, lift_multiset(ambient, S_q, n))
