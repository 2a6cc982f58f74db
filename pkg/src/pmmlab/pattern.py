"""Patterns of partial matrix multiplication and their algebra.

A pattern is a set of index triples ``(i, j, k)`` inside ``[l] x [m] x [n]``
(1-based).  It marks which products ``x_{ij} y_{jk} z_{ki}`` appear in the
partial matrix multiplication tensor.
"""

from __future__ import annotations

import itertools
from functools import cached_property
from dataclasses import dataclass
from typing import Iterable, Sequence

DEFAULT_SIZE_CAP = 10**7

Triple = tuple[int, int, int]


class PatternError(ValueError):
    pass


@dataclass(frozen=True)
class Pattern:
    """Canonical (sorted, deduplicated) subset of ``[l] x [m] x [n]``."""

    dims: tuple[int, int, int]
    triples: tuple[Triple, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or any(d < 1 for d in dims):
            raise PatternError(f"dims must be three positive integers, got {self.dims!r}")
        triples = set()
        for t in self.triples:
            t = tuple(int(x) for x in t)
            if len(t) != 3:
                raise PatternError(f"triple {t!r} does not have three coordinates")
            if any(not 1 <= x <= d for x, d in zip(t, dims)):
                raise PatternError(f"triple {t!r} outside dims {dims!r}")
            triples.add(t)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "triples", tuple(sorted(triples)))

    def __len__(self):
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)

    def __contains__(self, t):
        return tuple(t) in self._set

    @cached_property
    def _set(self):
        return frozenset(self.triples)

    @classmethod
    def box(cls, l: int, m: int, n: int) -> "Pattern":
        """The total pattern ``[l] x [m] x [n]``."""
        return cls((l, m, n), tuple(itertools.product(range(1, l + 1), range(1, m + 1), range(1, n + 1))))

    @classmethod
    def empty(cls, dims=(1, 1, 1)) -> "Pattern":
        return cls(tuple(dims), ())

    def issubset(self, other: "Pattern") -> bool:
        return self._set <= other._set


@dataclass(frozen=True)
class MapTriple:
    """Three total maps ``f: I -> I'``, ``g: J -> J'``, ``h: K -> K'``.

    Each map is a sequence of 1-based target indices; ``f[i - 1]`` is the
    image of ``i``.  Target sizes default to the largest entry of each map.
    """

    f: tuple[int, ...]
    g: tuple[int, ...]
    h: tuple[int, ...]
    target_dims: tuple[int, int, int] | None = None

    def __post_init__(self):
        maps = tuple(tuple(int(x) for x in arr) for arr in (self.f, self.g, self.h))
        if self.target_dims is None:
            target = tuple(max(arr, default=1) for arr in maps)
        else:
            target = tuple(int(d) for d in self.target_dims)
        for arr, d in zip(maps, target):
            if any(not 1 <= x <= d for x in arr):
                raise PatternError(f"map entries {arr!r} outside target size {d}")
        object.__setattr__(self, "f", maps[0])
        object.__setattr__(self, "g", maps[1])
        object.__setattr__(self, "h", maps[2])
        object.__setattr__(self, "target_dims", target)

    @property
    def source_dims(self) -> tuple[int, int, int]:
        return (len(self.f), len(self.g), len(self.h))

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "MapTriple":
        return cls(*(tuple(range(1, d + 1)) for d in dims))

    @classmethod
    def constant(cls, dims: Sequence[int]) -> "MapTriple":
        return cls(*((1,) * d for d in dims))

    def __call__(self, t: Sequence[int]) -> Triple:
        i, j, k = t
        return (self.f[i - 1], self.g[j - 1], self.h[k - 1])


@dataclass(frozen=True)
class Support:
    """Support of a tensor whose three index sets are pairs of base indices.

    ``shape`` holds the base sizes ``(l, m, n)``; the three variable sets are
    ``I x J``, ``J x K`` and ``K x I``.  Elements are ``((i, j), (j', k), (k', i'))``.
    """

    shape: tuple[int, int, int]
    triples: frozenset

    def __len__(self):
        return len(self.triples)

    @property
    def var_sizes(self) -> tuple[int, int, int]:
        l, m, n = self.shape
        return (l * m, m * n, n * l)

    def flat(self) -> frozenset:
        """1-based flat indices, matching the variable order of :func:`pmmlab.tensor.from_pattern`."""
        l, m, n = self.shape
        return frozenset(
            (_pair_index(x, m), _pair_index(y, n), _pair_index(z, l)) for x, y, z in self.triples
        )

    def __eq__(self, other):
        if not isinstance(other, Support):
            return NotImplemented
        return self.shape == other.shape and self.triples == other.triples

    def __hash__(self):
        return hash((self.shape, self.triples))


def _pair_index(pair, inner: int) -> int:
    a, b = pair
    return (a - 1) * inner + b


def product(p1: Pattern, p2: Pattern) -> Pattern:
    """Pattern product with row-major index pairing ``(i1 - 1) * |I2| + i2``."""
    l2, m2, n2 = p2.dims
    dims = tuple(a * b for a, b in zip(p1.dims, p2.dims))
    triples = [
        (_pair_index((i1, i2), l2), _pair_index((j1, j2), m2), _pair_index((k1, k2), n2))
        for (i1, j1, k1) in p1.triples
        for (i2, j2, k2) in p2.triples
    ]
    return Pattern(dims, tuple(triples))


def power(p: Pattern, n: int, size_cap: int = DEFAULT_SIZE_CAP) -> Pattern:
    if n < 1:
        raise PatternError("power requires n >= 1")
    if len(p) ** n > size_cap:
        raise PatternError(f"|pattern|^n = {len(p)}^{n} exceeds size cap {size_cap}")
    out = p
    for _ in range(n - 1):
        out = product(out, p)
    return out


def direct_sum(p1: Pattern, p2: Pattern) -> Pattern:
    """Block-diagonal sum: the second pattern's indices are shifted past the first's dims."""
    l1, m1, n1 = p1.dims
    dims = tuple(a + b for a, b in zip(p1.dims, p2.dims))
    shifted = ((i + l1, j + m1, k + n1) for i, j, k in p2.triples)
    return Pattern(dims, p1.triples + tuple(shifted))


def direct_image(p: Pattern, m: MapTriple) -> Pattern:
    if m.source_dims != p.dims:
        raise PatternError(f"map domains {m.source_dims} do not match pattern dims {p.dims}")
    return Pattern(m.target_dims, tuple(m(t) for t in p.triples))


def mm_support(p: Pattern) -> Support:
    return Support(p.dims, frozenset(((i, j), (j, k), (k, i)) for i, j, k in p.triples))


def induced_support_image(s: Support, m: MapTriple) -> Support:
    """Image of a support under ``(f x g) x (g x h) x (h x f)``."""
    f, g, h = m.f, m.g, m.h
    triples = frozenset(
        ((f[i - 1], g[j - 1]), (g[j2 - 1], h[k - 1]), (h[k2 - 1], f[i2 - 1]))
        for (i, j), (j2, k), (k2, i2) in s.triples
    )
    return Support(m.target_dims, triples)


def support_product(s1: Support, s2: Support) -> Support:
    """Product of two mm-supports, pairing base indices the same way as :func:`product`."""
    l2, m2, n2 = s2.shape
    shape = tuple(a * b for a, b in zip(s1.shape, s2.shape))

    def pair(x1, x2, sizes):
        return tuple(_pair_index((a, b), s) for a, b, s in zip(x1, x2, sizes))

    triples = frozenset(
        (pair(x1, x2, (l2, m2)), pair(y1, y2, (m2, n2)), pair(z1, z2, (n2, l2)))
        for x1, y1, z1 in s1.triples
        for x2, y2, z2 in s2.triples
    )
    return Support(shape, triples)


def from_triples(triples: Iterable[Sequence[int]], dims: Sequence[int] | None = None) -> Pattern:
    triples = [tuple(t) for t in triples]
    if dims is None:
        dims = tuple(max((t[a] for t in triples), default=1) for a in range(3))
    return Pattern(tuple(dims), tuple(triples))


LAMBDA_EX = Pattern((2, 2, 2), ((1, 1, 2), (1, 2, 1), (2, 1, 1), (2, 2, 1), (2, 1, 2), (1, 2, 2)))
LAMBDA_BCRL = Pattern((2, 2, 2), ((1, 1, 1), (1, 1, 2), (1, 2, 1), (1, 2, 2), (2, 1, 1), (2, 1, 2)))
