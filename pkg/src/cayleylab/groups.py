"""Canonical normal forms and group arithmetic for the presentation catalog.

Elements are plain hashable Python values whose structure *is* the normal form:

* ``FreeGroup(k)``: tuple of nonzero ints in ``[-k, k]``, freely reduced
  (``-i`` is the inverse of generator ``i``).
* ``FreeAbelian(d)``: tuple of ``d`` ints (exponent vector).
* ``Cyclic(m)``: int residue in ``[0, m)``.
* ``FreeProduct``: tuple of ``(factor_index, factor_element)`` pairs with
  consecutive factor indices distinct and no factor identity entries.
* ``DirectProduct``: tuple with one factor element per factor.

Because every form is canonical, equality and hashing are structural.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, NamedTuple, Union

from .errors import ValidationError

MAX_NESTING = 3

Element = Any


@dataclass(frozen=True)
class FreeGroup:
    rank: int

    def __post_init__(self):
        if not isinstance(self.rank, int) or self.rank < 1:
            raise ValidationError(f"free group rank must be >= 1, got {self.rank!r}")

    def __str__(self):
        return f"F{self.rank}"


@dataclass(frozen=True)
class FreeAbelian:
    rank: int

    def __post_init__(self):
        if not isinstance(self.rank, int) or self.rank < 1:
            raise ValidationError(f"free abelian rank must be >= 1, got {self.rank!r}")

    def __str__(self):
        return f"Z^{self.rank}"


@dataclass(frozen=True)
class Cyclic:
    order: int

    def __post_init__(self):
        if not isinstance(self.order, int) or self.order < 2:
            raise ValidationError(f"cyclic order must be >= 2, got {self.order!r}")

    def __str__(self):
        return f"Z/{self.order}"


@dataclass(frozen=True)
class FreeProduct:
    factors: tuple

    def __post_init__(self):
        _check_factors(self, "free product")

    def __str__(self):
        return "*".join(_wrap(f, parent=FreeProduct) for f in self.factors)


@dataclass(frozen=True)
class DirectProduct:
    factors: tuple

    def __post_init__(self):
        _check_factors(self, "direct product")

    def __str__(self):
        return "x".join(_wrap(f, parent=DirectProduct) for f in self.factors)


GroupSpec = Union[FreeGroup, FreeAbelian, Cyclic, FreeProduct, DirectProduct]
_ATOMS = (FreeGroup, FreeAbelian, Cyclic)


def _check_factors(spec, what: str) -> None:
    factors = tuple(spec.factors)
    object.__setattr__(spec, "factors", factors)
    if len(factors) < 2:
        raise ValidationError(f"{what} needs at least 2 factors, got {len(factors)}")
    for f in factors:
        if not isinstance(f, (FreeGroup, FreeAbelian, Cyclic, FreeProduct, DirectProduct)):
            raise ValidationError(f"{what} factor is not a group spec: {f!r}")
    if nesting_depth(spec) > MAX_NESTING:
        raise ValidationError(f"{what} nesting depth {nesting_depth(spec)} exceeds {MAX_NESTING}")


def _wrap(f, parent) -> str:
    # '*' binds tighter than 'x', so only a direct product inside a free
    # product, or same-kind nesting, needs parentheses to round-trip.
    if isinstance(f, _ATOMS):
        return str(f)
    if isinstance(f, parent) or (parent is FreeProduct and isinstance(f, DirectProduct)):
        return f"({f})"
    return str(f)


def nesting_depth(spec: GroupSpec) -> int:
    if isinstance(spec, _ATOMS):
        return 0
    return 1 + max(nesting_depth(f) for f in spec.factors)


def is_finite(spec: GroupSpec) -> bool:
    if isinstance(spec, Cyclic):
        return True
    if isinstance(spec, DirectProduct):
        return all(is_finite(f) for f in spec.factors)
    return False


def is_amenable(spec: GroupSpec) -> bool:
    """Conservative amenability test: True only when the catalog knows it is."""
    if isinstance(spec, (FreeAbelian, Cyclic)):
        return True
    if isinstance(spec, FreeGroup):
        return spec.rank == 1
    if isinstance(spec, DirectProduct):
        return all(is_amenable(f) for f in spec.factors)
    # Z/2 * Z/2 is the infinite dihedral group; every other free product
    # of nontrivial groups contains a free subgroup of rank 2.
    return len(spec.factors) == 2 and all(f == Cyclic(2) for f in spec.factors)


def has_polynomial_growth(spec: GroupSpec) -> bool:
    if isinstance(spec, (FreeAbelian, Cyclic)):
        return True
    if isinstance(spec, FreeGroup):
        return spec.rank == 1
    if isinstance(spec, DirectProduct):
        return all(has_polynomial_growth(f) for f in spec.factors)
    return is_amenable(spec)


class _Ops(NamedTuple):
    identity: Element
    mul: Callable[[Element, Element], Element]
    inv: Callable[[Element], Element]
    check: Callable[[Element], None]
    fmt: Callable[[Element], str]
    gens: tuple


def _free_ops(spec: FreeGroup) -> _Ops:
    k = spec.rank

    def mul(a, b):
        la = len(a)
        n = min(la, len(b))
        i = 0
        while i < n and a[la - 1 - i] == -b[i]:
            i += 1
        if i == 0:
            return a + b
        return a[: la - i] + b[i:]

    def inv(a):
        return tuple(-x for x in reversed(a))

    def check(a):
        if not isinstance(a, tuple):
            raise ValidationError(f"free group element must be a tuple, got {a!r}")
        prev = 0
        for x in a:
            if not isinstance(x, int) or x == 0 or abs(x) > k:
                raise ValidationError(f"letter {x!r} out of range for F{k}")
            if x == -prev:
                raise ValidationError(f"word {a!r} is not freely reduced")
            prev = x

    def fmt(a):
        if not a:
            return "e"
        if k <= 26:
            return "".join(chr(96 + x) if x > 0 else chr(64 - x) for x in a)
        return ".".join(f"x{x}" if x > 0 else f"x{-x}^-1" for x in a)

    return _Ops((), mul, inv, check, fmt, tuple((i,) for i in range(1, k + 1)))


def _abelian_ops(spec: FreeAbelian) -> _Ops:
    d = spec.rank
    zero = (0,) * d

    def mul(a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(a):
        return tuple(-x for x in a)

    def check(a):
        if not isinstance(a, tuple) or len(a) != d or not all(isinstance(x, int) for x in a):
            raise ValidationError(f"expected an exponent vector of length {d}, got {a!r}")

    def fmt(a):
        return "(" + ",".join(str(x) for x in a) + ")"

    gens = tuple(tuple(1 if j == i else 0 for j in range(d)) for i in range(d))
    return _Ops(zero, mul, inv, check, fmt, gens)


def _cyclic_ops(spec: Cyclic) -> _Ops:
    m = spec.order

    def mul(a, b):
        return (a + b) % m

    def inv(a):
        return (-a) % m

    def check(a):
        if not isinstance(a, int) or isinstance(a, bool) or not 0 <= a < m:
            raise ValidationError(f"residue {a!r} out of range for Z/{m}")

    return _Ops(0, mul, inv, check, str, (1,))


def _free_product_ops(spec: FreeProduct) -> _Ops:
    sub = [_ops(f) for f in spec.factors]
    muls = [o.mul for o in sub]
    ids = [o.identity for o in sub]

    def mul(a, b):
        if not a:
            return b
        if not b:
            return a
        fa, xa = a[-1]
        if fa != b[0][0]:
            return a + b
        out = list(a)
        i = 0
        while out and i < len(b) and out[-1][0] == b[i][0]:
            f, x = out.pop()
            prod = muls[f](x, b[i][1])
            i += 1
            if prod != ids[f]:
                out.append((f, prod))
                break
        return tuple(out) + b[i:]

    def inv(a):
        return tuple((f, sub[f].inv(x)) for f, x in reversed(a))

    def check(a):
        if not isinstance(a, tuple):
            raise ValidationError(f"free product element must be a tuple, got {a!r}")
        prev = None
        for item in a:
            if not isinstance(item, tuple) or len(item) != 2:
                raise ValidationError(f"free product entry {item!r} is not (factor, element)")
            f, x = item
            if not isinstance(f, int) or not 0 <= f < len(sub):
                raise ValidationError(f"factor index {f!r} out of range")
            if f == prev:
                raise ValidationError(f"consecutive entries from factor {f} in {a!r}")
            sub[f].check(x)
            if x == ids[f]:
                raise ValidationError(f"identity entry from factor {f} in {a!r}")
            prev = f

    def fmt(a):
        if not a:
            return "e"
        return "*".join(f"{f}:{sub[f].fmt(x)}" for f, x in a)

    gens = tuple(((i, g),) for i, o in enumerate(sub) for g in o.gens)
    return _Ops((), mul, inv, check, fmt, gens)


def _direct_product_ops(spec: DirectProduct) -> _Ops:
    sub = [_ops(f) for f in spec.factors]
    muls = [o.mul for o in sub]
    n = len(sub)
    identity = tuple(o.identity for o in sub)

    def mul(a, b):
        return tuple(muls[i](a[i], b[i]) for i in range(n))

    def inv(a):
        return tuple(sub[i].inv(a[i]) for i in range(n))

    def check(a):
        if not isinstance(a, tuple) or len(a) != n:
            raise ValidationError(f"direct product element must be a {n}-tuple, got {a!r}")
        for o, x in zip(sub, a):
            o.check(x)

    def fmt(a):
        return "[" + " | ".join(o.fmt(x) for o, x in zip(sub, a)) + "]"

    gens = []
    for i, o in enumerate(sub):
        for g in o.gens:
            gens.append(identity[:i] + (g,) + identity[i + 1 :])
    return _Ops(identity, mul, inv, check, fmt, tuple(gens))


@lru_cache(maxsize=None)
def _ops(spec: GroupSpec) -> _Ops:
    if isinstance(spec, FreeGroup):
        return _free_ops(spec)
    if isinstance(spec, FreeAbelian):
        return _abelian_ops(spec)
    if isinstance(spec, Cyclic):
        return _cyclic_ops(spec)
    if isinstance(spec, FreeProduct):
        return _free_product_ops(spec)
    if isinstance(spec, DirectProduct):
        return _direct_product_ops(spec)
    raise ValidationError(f"not a group spec: {spec!r}")


def identity(spec: GroupSpec) -> Element:
    return _ops(spec).identity


def validate(spec: GroupSpec, a: Element) -> Element:
    """Raise ValidationError unless ``a`` is a normal form for ``spec``."""
    _ops(spec).check(a)
    return a


def multiply(spec: GroupSpec, a: Element, b: Element) -> Element:
    ops = _ops(spec)
    ops.check(a)
    ops.check(b)
    return ops.mul(a, b)


def invert(spec: GroupSpec, a: Element) -> Element:
    ops = _ops(spec)
    ops.check(a)
    return ops.inv(a)


def is_identity(spec: GroupSpec, a: Element) -> bool:
    ops = _ops(spec)
    ops.check(a)
    return a == ops.identity


def multiplier(spec: GroupSpec) -> Callable[[Element, Element], Element]:
    """Unchecked multiplication, for hot loops over already-valid elements."""
    return _ops(spec).mul


def left_multiplier(spec: GroupSpec, s: Element) -> Callable[[Element], Element]:
    """Unchecked ``v -> s*v``, specialised for single free-group letters."""
    if isinstance(spec, FreeGroup) and len(s) == 1:
        x = s[0]
        head = (x,)

        def lmul(v):
            if v and v[0] == -x:
                return v[1:]
            return head + v

        return lmul
    mul = _ops(spec).mul
    return lambda v: mul(s, v)


def inverter(spec: GroupSpec) -> Callable[[Element], Element]:
    return _ops(spec).inv


def format_element(spec: GroupSpec, a: Element) -> str:
    return _ops(spec).fmt(a)


def standard_generators(spec: GroupSpec) -> tuple:
    """Positive standard generators, enumerated depth-first over factors.

    Generator ``i`` (1-based) is ``standard_generators(spec)[i - 1]``; the
    signed index ``-i`` names its inverse.
    """
    return _ops(spec).gens


def generator(spec: GroupSpec, signed_index: int) -> Element:
    gens = standard_generators(spec)
    if signed_index == 0 or abs(signed_index) > len(gens):
        raise ValidationError(f"generator index {signed_index} out of range 1..{len(gens)}")
    g = gens[abs(signed_index) - 1]
    return g if signed_index > 0 else _ops(spec).inv(g)


def word_to_element(spec: GroupSpec, word) -> Element:
    """Evaluate a word given as signed standard-generator indices."""
    ops = _ops(spec)
    out = ops.identity
    for i in word:
        out = ops.mul(out, generator(spec, i))
    return out


def random_element(spec: GroupSpec, rng: random.Random, max_length: int = 8) -> Element:
    """Normalize a random word of length <= max_length in the standard generators.

    No claim of uniformity over any ball; this is for reproducible property tests.
    """
    n = len(standard_generators(spec))
    length = rng.randint(0, max_length)
    return word_to_element(spec, [rng.choice((1, -1)) * rng.randint(1, n) for _ in range(length)])
