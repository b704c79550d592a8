"""Independent reference computations used by the tests.

Nothing here calls into the convolution, BFS or percolation kernels of the
package: walk probabilities come from enumerating every word, free-group
arithmetic from sympy's own free groups, tree quantities from closed forms.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from sympy.combinatorics.free_groups import free_group

from cayleylab import groups


def brute_force_return(spec, elements, n: int) -> Fraction:
    """Fraction of the |S|^n words of length n that evaluate to the identity."""
    mul = groups.multiplier(spec)
    ident = groups.identity(spec)
    hits = 0
    for word in itertools.product(elements, repeat=n):
        g = ident
        for s in word:
            g = mul(g, s)
        hits += g == ident
    return Fraction(hits, len(elements) ** n)


def brute_force_multiset_return(spec, entries, n: int) -> Fraction:
    """Same, for a weighted multiset given as (element, multiplicity) pairs."""
    mul = groups.multiplier(spec)
    ident = groups.identity(spec)
    total = sum(m for _, m in entries)
    hits = 0
    for word in itertools.product(entries, repeat=n):
        g = ident
        weight = 1
        for s, m in word:
            g = mul(g, s)
            weight *= m
        if g == ident:
            hits += weight
    return Fraction(hits, total**n)


def tree_sphere_sizes(d: int, r: int) -> list:
    return [1] + [d * (d - 1) ** (j - 1) for j in range(1, r + 1)]


def sympy_free_word(rank: int, element):
    """The sympy free-group element matching a reduced signed-index tuple."""
    F, *gens = free_group(",".join(f"x{i}" for i in range(1, rank + 1)))
    out = F.identity
    for i in element:
        out = out * (gens[abs(i) - 1] if i > 0 else gens[abs(i) - 1] ** -1)
    return F, gens, out


def sympy_to_tuple(word) -> tuple:
    out = []
    for sym, exp in word.array_form:
        i = int(str(sym)[1:])
        out.extend([i if exp > 0 else -i] * abs(exp))
    return tuple(out)


def brute_force_tree_theta(d: int, r: int, p: Fraction) -> Fraction:
    """Root-to-depth-r connection probability by enumerating every edge configuration."""
    # Build the depth-r d-regular tree explicitly.
    children = {0: []}
    depth = {0: 0}
    edges = []
    frontier = [0]
    nxt_id = 1
    for level in range(r):
        new = []
        for v in frontier:
            for _ in range(d if v == 0 else d - 1):
                children[v].append(nxt_id)
                children[nxt_id] = []
                depth[nxt_id] = level + 1
                edges.append((v, nxt_id))
                new.append(nxt_id)
                nxt_id += 1
        frontier = new
    total = Fraction(0)
    for mask in range(1 << len(edges)):
        open_children = {}
        k = 0
        for i, (u, v) in enumerate(edges):
            if mask >> i & 1:
                open_children.setdefault(u, []).append(v)
                k += 1
        stack, reached = [0], False
        while stack and not reached:
            v = stack.pop()
            if depth[v] == r:
                reached = True
            stack.extend(open_children.get(v, []))
        if reached:
            total += p**k * (1 - p) ** (len(edges) - k)
    return total
