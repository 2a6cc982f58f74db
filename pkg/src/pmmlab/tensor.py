"""Exact sparse trilinear forms and decomposition checks.

All coefficients are :class:`fractions.Fraction`.  Tensor indices are 1-based
triples ``(i, j, k)``; the coefficient vectors of a decomposition are plain
sequences where position ``p`` belongs to index ``p + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .pattern import MapTriple, Pattern, Support, _pair_index, mm_support

MAX_EPS_DEGREE = 64
DEFAULT_SAMPLE_SIZE = 2**16
DEFAULT_RETRY_BUDGET = 64

Triple = tuple[int, int, int]


class TensorError(ValueError):
    pass


class RetryBudgetExhausted(RuntimeError):
    """Raised by :func:`support_transfer` when every sampled scaling cancelled a coefficient."""


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator() if x != int(x) else Fraction(int(x))
    return Fraction(x)


@dataclass(frozen=True, eq=False)
class SparseTensor:
    """Trilinear form ``sum t_{ijk} x_i y_j z_k`` storing only nonzero coefficients."""

    shape: tuple[int, int, int]
    entries: Mapping[Triple, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        if len(shape) != 3 or any(s < 0 for s in shape):
            raise TensorError(f"bad shape {self.shape!r}")
        clean = {}
        for key, val in self.entries.items():
            key = tuple(int(x) for x in key)
            if any(not 1 <= x <= s for x, s in zip(key, shape)):
                raise TensorError(f"index {key} outside shape {shape}")
            val = as_fraction(val)
            if val:
                clean[key] = val
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "entries", clean)

    @property
    def support(self) -> frozenset:
        return frozenset(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, key) -> Fraction:
        return self.entries.get(tuple(key), Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, SparseTensor):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __repr__(self):
        return f"SparseTensor(shape={self.shape}, nnz={len(self)})"


def zero_tensor(shape) -> SparseTensor:
    return SparseTensor(tuple(shape), {})


def from_support(triples: Iterable[Sequence[int]], shape, coeffs=None) -> SparseTensor:
    """Tensor whose support is ``triples``; coefficients default to 1."""
    triples = [tuple(t) for t in triples]
    if coeffs is None:
        coeffs = [1] * len(triples)
    return SparseTensor(tuple(shape), dict(zip(triples, coeffs)))


def from_pattern(p: Pattern) -> SparseTensor:
    """Partial matrix multiplication tensor ``sum_{(i,j,k) in p} x_{ij} y_{jk} z_{ki}``.

    Variable sets are ``I x J``, ``J x K`` and ``K x I``, each flattened row-major.
    """
    s = mm_support(p)
    return SparseTensor(s.var_sizes, {t: Fraction(1) for t in s.flat()})


def tensor_product(t1: SparseTensor, t2: SparseTensor) -> SparseTensor:
    """Kronecker product with row-major pairing of each index set."""
    s2 = t2.shape
    shape = tuple(a * b for a, b in zip(t1.shape, s2))
    entries = {}
    for (i1, j1, k1), v1 in t1.entries.items():
        for (i2, j2, k2), v2 in t2.entries.items():
            key = (_pair_index((i1, i2), s2[0]), _pair_index((j1, j2), s2[1]), _pair_index((k1, k2), s2[2]))
            entries[key] = v1 * v2
    return SparseTensor(shape, entries)


@dataclass(frozen=True)
class RankDecomposition:
    """``sum_m (a^m . x)(b^m . y)(c^m . z)`` with exact rational vectors."""

    shape: tuple[int, int, int]
    terms: tuple[tuple[tuple[Fraction, ...], tuple[Fraction, ...], tuple[Fraction, ...]], ...]

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        terms = []
        for n, term in enumerate(self.terms):
            if len(term) != 3:
                raise TensorError(f"term {n} must have three vectors")
            vecs = tuple(tuple(as_fraction(x) for x in v) for v in term)
            for v, s in zip(vecs, shape):
                if len(v) != s:
                    raise TensorError(f"term {n}: vector length {len(v)} does not match index-set size {s}")
            terms.append(vecs)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "terms", tuple(terms))

    def __len__(self):
        return len(self.terms)


Poly = tuple[Fraction, ...]


def _poly(x) -> Poly:
    """Dense coefficient tuple (index = degree in eps), trailing zeros trimmed."""
    if isinstance(x, (list, tuple)):
        coeffs = [as_fraction(c) for c in x]
    else:
        coeffs = [as_fraction(x)]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) - 1 > MAX_EPS_DEGREE:
        raise TensorError(f"eps-polynomial degree {len(coeffs) - 1} exceeds cap {MAX_EPS_DEGREE}")
    return tuple(coeffs)


def _poly_mul(p: Poly, q: Poly) -> list[Fraction]:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


@dataclass(frozen=True)
class EpsDecomposition:
    """Decomposition whose vector entries are polynomials in eps.

    ``order`` is the claimed approximation degree ``d``: the expansion should
    equal ``eps^d T + O(eps^(d+1))``.
    """

    shape: tuple[int, int, int]
    terms: tuple[tuple[tuple[Poly, ...], tuple[Poly, ...], tuple[Poly, ...]], ...]
    order: int

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        if self.order < 0:
            raise TensorError("order must be nonnegative")
        terms = []
        for n, term in enumerate(self.terms):
            if len(term) != 3:
                raise TensorError(f"term {n} must have three vectors")
            vecs = tuple(tuple(_poly(x) for x in v) for v in term)
            for v, s in zip(vecs, shape):
                if len(v) != s:
                    raise TensorError(f"term {n}: vector length {len(v)} does not match index-set size {s}")
            terms.append(vecs)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "terms", tuple(terms))

    def __len__(self):
        return len(self.terms)


def embed(d: RankDecomposition) -> EpsDecomposition:
    """View an exact decomposition as a constant eps-decomposition of order 0."""
    return EpsDecomposition(d.shape, tuple(tuple(tuple((x,) for x in v) for v in term) for term in d.terms), 0)


def evaluate_rank_decomposition(d: RankDecomposition) -> SparseTensor:
    acc: dict[Triple, Fraction] = {}
    for a, b, c in d.terms:
        na = [(i, x) for i, x in enumerate(a, 1) if x]
        nb = [(j, y) for j, y in enumerate(b, 1) if y]
        nc = [(k, z) for k, z in enumerate(c, 1) if z]
        for i, x in na:
            for j, y in nb:
                xy = x * y
                for k, z in nc:
                    key = (i, j, k)
                    acc[key] = acc.get(key, 0) + xy * z
    return SparseTensor(d.shape, acc)


def verify_rank_decomposition(d: RankDecomposition, t: SparseTensor) -> bool:
    return d.shape == t.shape and evaluate_rank_decomposition(d) == t


def verify_support_rank_witness(d: RankDecomposition, phi) -> bool:
    """True iff the decomposition evaluates to a tensor with support exactly ``phi``.

    ``phi`` is a :class:`Support` (compared in the flat variable order used by
    :func:`from_pattern`) or any collection of 1-based index triples.
    """
    if isinstance(phi, Support):
        if tuple(d.shape) != phi.var_sizes:
            return False
        phi = phi.flat()
    target = frozenset(tuple(x) for x in phi)
    return evaluate_rank_decomposition(d).support == target


def expand_eps(e: EpsDecomposition) -> dict[Triple, list[Fraction]]:
    """Exact expansion of an eps-decomposition: coefficient polynomial per index triple."""
    acc: dict[Triple, list[Fraction]] = {}
    for a, b, c in e.terms:
        nb = [(j, p) for j, p in enumerate(b, 1) if p]
        nc = [(k, p) for k, p in enumerate(c, 1) if p]
        bc = [((j, k), _poly_mul(pb, pc)) for j, pb in nb for k, pc in nc]
        for i, pa in enumerate(a, 1):
            if not pa:
                continue
            for (j, k), pbc in bc:
                prod = _poly_mul(pa, pbc)
                cur = acc.setdefault((i, j, k), [])
                if len(cur) < len(prod):
                    cur.extend([Fraction(0)] * (len(prod) - len(cur)))
                for deg, v in enumerate(prod):
                    cur[deg] += v
    return acc


def verify_border_decomposition(e: EpsDecomposition, t: SparseTensor, d: int | None = None) -> bool:
    """Check ``expansion = eps^d * t + O(eps^(d+1))`` exactly."""
    if d is None:
        d = e.order
    if d != e.order:
        raise TensorError(f"order {d} does not match the decomposition's claimed order {e.order}")
    if e.shape != t.shape:
        return False
    expansion = expand_eps(e)
    for key in set(expansion) | set(t.entries):
        poly = expansion.get(key, [])
        low = poly[:d] + [Fraction(0)] * max(0, d - len(poly))
        if any(low):
            return False
        lead = poly[d] if len(poly) > d else Fraction(0)
        if lead != t[key]:
            return False
    return True


def image_of_support(support: Iterable[Triple], m: MapTriple) -> frozenset:
    return frozenset(m(t) for t in support)


def restrict(t: SparseTensor, scalings, m: MapTriple) -> SparseTensor:
    """Restriction ``x_i -> a_i x_{f(i)}``, ``y_j -> b_j y_{g(j)}``, ``z_k -> c_k z_{h(k)}``."""
    a, b, c = (tuple(as_fraction(x) for x in s) for s in scalings)
    if (len(a), len(b), len(c)) != t.shape:
        raise TensorError(f"scaling lengths {(len(a), len(b), len(c))} do not match tensor shape {t.shape}")
    if m.source_dims != t.shape:
        raise TensorError(f"map domains {m.source_dims} do not match tensor shape {t.shape}")
    acc: dict[Triple, Fraction] = {}
    for (i, j, k), v in t.entries.items():
        w = a[i - 1] * b[j - 1] * c[k - 1] * v
        if w:
            key = m((i, j, k))
            acc[key] = acc.get(key, 0) + w
    return SparseTensor(m.target_dims, acc)


@dataclass(frozen=True)
class TransferResult:
    tensor: SparseTensor
    scalings: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]
    attempts: int


def support_transfer(
    t: SparseTensor,
    m: MapTriple,
    sample_size: int = DEFAULT_SAMPLE_SIZE,
    seed=None,
    max_attempts: int = DEFAULT_RETRY_BUDGET,
) -> TransferResult:
    """Find integer scalings so that the restricted tensor has support equal to the image of supp(t).

    Scalings are drawn uniformly from ``{1, ..., sample_size}``.  Each surviving
    coefficient is a nonzero cubic polynomial in the scalings, so a single draw
    fails with probability at most ``3 * |image| / sample_size``.
    """
    if len(t) < 1:
        raise TensorError("support_transfer needs a nonzero tensor")
    if sample_size < 1:
        raise TensorError("sample_size must be >= 1")
    target = image_of_support(t.support, m)
    rng = np.random.default_rng(seed)
    for attempt in range(1, max_attempts + 1):
        scalings = tuple(tuple(int(x) for x in rng.integers(1, sample_size + 1, size=n)) for n in t.shape)
        out = restrict(t, scalings, m)
        if out.support == target:
            return TransferResult(out, scalings, attempt)
    raise RetryBudgetExhausted(
        f"no cancellation-free scaling in {max_attempts} draws from 1..{sample_size}; increase sample_size"
    )


def strassen() -> RankDecomposition:
    """Strassen's seven products as a decomposition of ``from_pattern(Pattern.box(2, 2, 2))``."""

    def x(**kw):  # A_ij -> x_{ij}
        v = [0] * 4
        for name, coef in kw.items():
            i, j = int(name[1]), int(name[2])
            v[(i - 1) * 2 + j - 1] = coef
        return v

    def z(**kw):  # output C_ik is the coefficient of z_{ki}
        v = [0] * 4
        for name, coef in kw.items():
            i, k = int(name[1]), int(name[2])
            v[(k - 1) * 2 + i - 1] = coef
        return v

    terms = [
        (x(A11=1, A22=1), x(A11=1, A22=1), z(C11=1, C22=1)),
        (x(A21=1, A22=1), x(A11=1), z(C21=1, C22=-1)),
        (x(A11=1), x(A12=1, A22=-1), z(C12=1, C22=1)),
        (x(A22=1), x(A21=1, A11=-1), z(C11=1, C21=1)),
        (x(A11=1, A12=1), x(A22=1), z(C11=-1, C12=1)),
        (x(A21=1, A11=-1), x(A11=1, A12=1), z(C22=1)),
        (x(A12=1, A22=-1), x(A21=1, A22=1), z(C11=1)),
    ]
    return RankDecomposition((4, 4, 4), tuple(terms))


def diagonal_witness(t: SparseTensor) -> RankDecomposition:
    """The trivial decomposition with one simple tensor per nonzero coefficient."""

    def unit(n, i, val=1):
        v = [0] * n
        v[i - 1] = val
        return v

    nx, ny, nz = t.shape
    terms = [(unit(nx, i, v), unit(ny, j), unit(nz, k)) for (i, j, k), v in sorted(t.entries.items())]
    return RankDecomposition(t.shape, tuple(terms))
