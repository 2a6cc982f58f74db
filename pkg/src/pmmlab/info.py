"""Distributions on labelled finite sets, entropies, and the method of types."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

import numpy as np

SUM_TOL = 1e-12
DEFAULT_TYPE_CAP = 10**6


class DistributionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over an explicitly labelled ground set.

    Labels are usually tuples (points of a product set such as a pattern), so
    distributions over a pattern are first-class rather than living on the
    whole box.  ``exact`` carries rational probabilities when they are known.
    """

    support: tuple[Hashable, ...]
    probs: np.ndarray
    exact: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        support = tuple(self.support)
        if len(set(support)) != len(support):
            raise DistributionError("ground set labels must be distinct")
        if self.exact is not None:
            exact = tuple(Fraction(p) for p in self.exact)
            if len(exact) != len(support):
                raise DistributionError("exact probabilities do not match the ground set")
            if any(p < 0 for p in exact) or sum(exact) != 1:
                raise DistributionError("exact probabilities must be nonnegative and sum to 1")
            object.__setattr__(self, "exact", exact)
            probs = np.array([float(p) for p in exact])
        else:
            probs = np.asarray(self.probs, dtype=float).copy()
        if probs.shape != (len(support),):
            raise DistributionError(f"{probs.size} probabilities for {len(support)} labels")
        if (probs < 0).any():
            raise DistributionError("probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > SUM_TOL * max(1, len(probs)):
            raise DistributionError(f"probabilities sum to {probs.sum()!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, labels: Iterable[Hashable]) -> "Distribution":
        labels = tuple(labels)
        n = len(labels)
        return cls(labels, np.full(n, 1.0 / n), tuple(Fraction(1, n) for _ in labels))

    @classmethod
    def point(cls, labels: Iterable[Hashable], at: Hashable) -> "Distribution":
        labels = tuple(labels)
        return cls(labels, None, tuple(Fraction(int(x == at)) for x in labels))

    @classmethod
    def from_mapping(cls, mapping) -> "Distribution":
        labels = tuple(mapping)
        vals = [mapping[x] for x in labels]
        if all(isinstance(v, (int, Fraction)) for v in vals):
            return cls(labels, None, tuple(Fraction(v) for v in vals))
        return cls(labels, np.asarray(vals, dtype=float))

    def __len__(self):
        return len(self.support)

    def __getitem__(self, label) -> float:
        return float(self.probs[self.support.index(label)])

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probs.tolist()))

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return self.support == other.support and np.array_equal(self.probs, other.probs)

    def __repr__(self):
        return f"Distribution({dict(zip(self.support, np.round(self.probs, 6).tolist()))})"


def entropy_of(probs) -> float:
    """Shannon entropy in bits of a probability vector, with ``0 log 0 = 0``."""
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def entropy(p: Distribution) -> float:
    return entropy_of(p.probs)


def marginal(p: Distribution, axes: Sequence[int]) -> Distribution:
    """Pushforward of ``p`` under the projection onto ``axes`` (labels must be tuples).

    The result is labelled by the projected tuples in first-occurrence order.
    """
    axes = tuple(axes)
    if not p.support:
        return p
    width = len(p.support[0])
    if any(not 0 <= a < width for a in axes):
        raise DistributionError(f"axes {axes} out of range for {width}-factor labels")
    keys: dict = {}
    for label in p.support:
        keys.setdefault(tuple(label[a] for a in axes), len(keys))
    idx = np.array([keys[tuple(label[a] for a in axes)] for label in p.support])
    probs = np.bincount(idx, weights=p.probs, minlength=len(keys))
    exact = None
    if p.exact is not None:
        acc = [Fraction(0)] * len(keys)
        for n, q in zip(idx, p.exact):
            acc[n] += q
        exact = tuple(acc)
    probs = probs / probs.sum() if exact is None else None
    return Distribution(tuple(keys), probs, exact)


def marginal_entropy(p: Distribution, axes: Sequence[int]) -> float:
    if not axes:
        return 0.0
    return entropy(marginal(p, axes))


def conditional_entropy(p: Distribution, target_axes: Sequence[int], given_axes: Sequence[int] = ()) -> float:
    """``H(target | given) = H(target, given) - H(given)`` in bits."""
    target, given = tuple(target_axes), tuple(given_axes)
    if set(target) & set(given):
        raise DistributionError(f"target axes {target} and given axes {given} overlap")
    return marginal_entropy(p, sorted(target + given)) - marginal_entropy(p, sorted(given))


@dataclass(frozen=True)
class NType:
    """An n-type: integer counts over a labelled ground set, summing to ``n``."""

    ground: tuple[Hashable, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        ground = tuple(self.ground)
        counts = tuple(int(c) for c in self.counts)
        if len(ground) != len(counts):
            raise DistributionError("counts do not match the ground set")
        if any(c < 0 for c in counts):
            raise DistributionError("counts must be nonnegative")
        object.__setattr__(self, "ground", ground)
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    def distribution(self) -> Distribution:
        n = self.n
        return Distribution(self.ground, None, tuple(Fraction(c, n) for c in self.counts))

    def marginal(self, axes: Sequence[int]) -> "NType":
        keys: dict = {}
        for label, c in zip(self.ground, self.counts):
            key = tuple(label[a] for a in axes)
            keys[key] = keys.get(key, 0) + c
        return NType(tuple(keys), tuple(keys.values()))


def _compositions(n: int, m: int):
    # stars and bars: bar positions among n + m - 1 slots
    for bars in itertools.combinations(range(n + m - 1), m - 1):
        prev = -1
        parts = []
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(n + m - 2 - prev)
        yield tuple(parts)


def count_types(m: int, n: int) -> int:
    return math.comb(n + m - 1, m - 1)


def enumerate_types(m, n: int, cap: int = DEFAULT_TYPE_CAP) -> list[NType]:
    """All n-types over a ground set of size ``m`` (or over the given labels)."""
    ground = tuple(range(1, m + 1)) if isinstance(m, int) else tuple(m)
    size = len(ground)
    if size < 1 or n < 1:
        raise DistributionError("need m >= 1 and n >= 1")
    total = count_types(size, n)
    if total > cap:
        raise DistributionError(f"{total} types exceed cap {cap}")
    return [NType(ground, c) for c in _compositions(n, size)]


def type_class_size(t: NType) -> int:
    """Exact multinomial ``n! / prod_x (n P(x))!``."""
    out = math.factorial(t.n)
    for c in t.counts:
        out //= math.factorial(c)
    return out


def closest_type(p: Distribution, n: int) -> NType:
    """An n-type near ``p`` with the same support (largest-remainder rounding).

    Needs ``n >= |supp p|`` to keep every support point.
    """
    q = np.asarray(p.probs, dtype=float)
    supp = q > 0
    if n < supp.sum():
        raise DistributionError(f"n = {n} is smaller than the support size {int(supp.sum())}")
    counts = np.where(supp, 1, 0)
    rest = n - counts.sum()
    want = q * n - counts
    base = np.floor(np.maximum(want, 0) * rest / max(want.clip(0).sum(), 1e-300)).astype(int)
    base = np.where(supp, base, 0)
    counts = counts + base
    short = n - counts.sum()
    frac = np.where(supp, q * n - counts, -np.inf)
    for i in np.argsort(-frac, kind="stable")[:short]:
        counts[i] += 1
    return NType(p.support, tuple(int(c) for c in counts))
