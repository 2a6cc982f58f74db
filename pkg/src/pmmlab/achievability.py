"""Monte Carlo check of the random-map covering construction.

For a pattern ``L`` and rates ``(a, b, c)``, uniformly random maps
``f: I^n -> [M_a]``, ``g: J^n -> [M_b]``, ``h: K^n -> [M_c]`` with
``M_x = floor(2^(x n))`` should map ``L^n`` onto the whole target box once
``n`` is large.  :func:`simulate` measures how often this happens;
:func:`typed_failure_bound` evaluates the union bound that predicts it.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .info import NType, count_types, entropy, enumerate_types, marginal_entropy, type_class_size
from .pattern import Pattern

ENUMERATION_CAP = 10**7
MAP_CAP = 2**24
TYPE_SEARCH_CAP = 20000


class SimulationError(ValueError):
    pass


def target_size(rate: float, n: int) -> int:
    return max(1, math.floor(2.0 ** (rate * n)))


@dataclass
class SimConfig:
    n: int
    rate: tuple[float, float, float]
    trials: int = 200
    seed: int = 0
    type_counts: NType | None = None

    def __post_init__(self):
        self.rate = tuple(float(r) for r in self.rate)
        if self.n < 1 or self.trials < 1:
            raise SimulationError("n and trials must be >= 1")
        if len(self.rate) != 3 or any(r < 0 for r in self.rate):
            raise SimulationError("rate must be three nonnegative numbers")

    @property
    def targets(self) -> tuple[int, int, int]:
        return tuple(target_size(r, self.n) for r in self.rate)


@dataclass
class FailureBound:
    """Union bound on the probability that some target cell is missed.

    ``per_cell`` uses exact type-class fibre sizes; ``per_cell_estimate`` uses
    the entropy estimates with polynomial factors ``(n + 1)^-|.|``.
    """

    per_cell: float
    union: float
    per_cell_estimate: float
    union_estimate: float
    terms: tuple[float, float, float]
    fibres: tuple[int, int, int]

    @property
    def clamped(self) -> float:
        return min(1.0, self.union)


@dataclass
class SimReport:
    trials: int
    successes: int
    missing: list[int]
    targets: tuple[int, int, int]
    predicted: FailureBound | None
    wall_clock: float = 0.0
    domain_size: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def failure_rate(self) -> float:
        return 1.0 - self.successes / self.trials

    @property
    def standard_error(self) -> float:
        p = self.failure_rate
        return math.sqrt(p * (1 - p) / self.trials)


def single_shot_bound(px: int, fibre_y: int, fibre_z: int, alpha: float, beta: float, gamma: float) -> float:
    """Miss probability bound for independent random subsets hitting a set ``T``.

    ``px = |pi_X(T)|``; ``fibre_y`` and ``fibre_z`` are the smallest fibre
    projections onto ``Y`` (over ``x``) and ``Z`` (over ``(x, y)``).  The value
    can exceed 1.
    """
    for p in (alpha, beta, gamma):
        if not 0 <= p <= 1:
            raise SimulationError("inclusion probabilities must lie in [0, 1]")
    if min(px, fibre_y, fibre_z) < 1:
        raise SimulationError("set sizes must be >= 1")
    return _miss(alpha, px) + _miss(beta, fibre_y) + _miss(gamma, fibre_z)


def _miss(p: float, size) -> float:
    if p >= 1:
        return 0.0
    return math.exp(float(size) * math.log1p(-p))


def _pattern_ground(pattern: Pattern, ntype: NType) -> NType:
    lookup = dict(zip(ntype.ground, ntype.counts))
    extra = [g for g, c in lookup.items() if c and tuple(g) not in set(pattern.triples)]
    if extra:
        raise SimulationError(f"type puts mass outside the pattern: {extra}")
    return NType(pattern.triples, tuple(lookup.get(t, 0) for t in pattern.triples))


def typed_failure_bound(pattern: Pattern, ntype: NType, n: int, rate) -> FailureBound:
    if ntype.n != n:
        raise SimulationError(f"type has denominator {ntype.n}, expected {n}")
    ntype = _pattern_ground(pattern, ntype)
    a, b, c = (float(r) for r in rate)
    Ma, Mb, Mc = (target_size(r, n) for r in (a, b, c))
    size_i = type_class_size(ntype.marginal((0,)))
    size_ij = type_class_size(ntype.marginal((0, 1)))
    size_ijk = type_class_size(ntype)
    fibres = (size_i, size_ij // size_i, size_ijk // size_ij)
    terms = (_miss(1 / Ma, fibres[0]), _miss(1 / Mb, fibres[1]), _miss(1 / Mc, fibres[2]))
    per_cell = sum(terms)

    dist = ntype.distribution()
    h_i = marginal_entropy(dist, (0,))
    h_ij = marginal_entropy(dist, (0, 1))
    h_ijk = entropy(dist)
    ni, nj, nk = pattern.dims
    exps = (
        2.0 ** (n * (h_i - a)) * (n + 1.0) ** (-ni),
        2.0 ** (n * (h_ij - h_i - b)) * (n + 1.0) ** (-ni * nj),
        2.0 ** (n * (h_ijk - h_ij - c)) * (n + 1.0) ** (-ni * nj * nk),
    )
    per_cell_estimate = sum(math.exp(-e) for e in exps)
    return FailureBound(
        per_cell=per_cell,
        union=per_cell * Ma * Mb * Mc,
        per_cell_estimate=per_cell_estimate,
        union_estimate=per_cell_estimate * 2.0 ** ((a + b + c) * n),
        terms=terms,
        fibres=fibres,
    )


def best_typed_bound(pattern: Pattern, n: int, rate) -> tuple[NType, FailureBound] | None:
    """The n-type with the smallest exact union bound (None if there are too many types)."""
    if count_types(len(pattern), n) > TYPE_SEARCH_CAP:
        return None
    best = None
    for t in enumerate_types(pattern.triples, n):
        fb = typed_failure_bound(pattern, t, n, rate)
        if best is None or fb.union < best[1].union:
            best = (t, fb)
    return best


def _sequence_indices(pattern: Pattern, n: int, ntype: NType | None):
    """Flat I^n, J^n, K^n indices (0-based, row-major) for every element of L^n (or of one type class)."""
    size = len(pattern) ** n
    if size > ENUMERATION_CAP:
        raise SimulationError(f"|L|^n = {size} exceeds the enumeration cap {ENUMERATION_CAP}")
    pts = np.array(pattern.triples) - 1
    seqs = np.array(list(itertools.product(range(len(pattern)), repeat=n)), dtype=np.int64).reshape(-1, n)
    if ntype is not None:
        counts = np.array(_pattern_ground(pattern, ntype).counts)
        hist = np.stack([(seqs == e).sum(axis=1) for e in range(len(pattern))], axis=1)
        seqs = seqs[(hist == counts).all(axis=1)]
    flat = []
    for axis, d in enumerate(pattern.dims):
        weights = d ** np.arange(n - 1, -1, -1, dtype=np.int64)
        flat.append(pts[seqs, axis] @ weights)
    return flat


def _check_projection(cells: np.ndarray, targets) -> None:
    """Projecting a subset of X x Y onto X cannot shrink its density."""
    Ma, Mb, Mc = targets
    density = cells.size / (Ma * Mb * Mc)
    for block, xsize in ((Mb * Mc, Ma), (Mc, Ma * Mb)):
        proj = np.unique(cells // block).size
        assert density <= proj / xsize + 1e-12, "subset projection inequality violated"


def simulate(pattern: Pattern, cfg: SimConfig, with_bound: bool = True) -> SimReport:
    """Draw ``cfg.trials`` independent map triples and count full coverings of the target box.

    Trial ``t`` uses the generator seeded by ``(cfg.seed, t)``, so any subset of
    trials can be rerun (or run in parallel) with identical results.
    """
    start = time.perf_counter()
    n = cfg.n
    domains = tuple(d**n for d in pattern.dims)
    if max(domains) > MAP_CAP:
        raise SimulationError(f"map domain {max(domains)} exceeds cap {MAP_CAP}")
    targets = cfg.targets
    Ma, Mb, Mc = targets
    box = Ma * Mb * Mc
    fi, gj, hk = _sequence_indices(pattern, n, cfg.type_counts)

    missing = []
    for trial in range(cfg.trials):
        rng = np.random.default_rng([cfg.seed, trial])
        f = rng.integers(0, Ma, size=domains[0])
        g = rng.integers(0, Mb, size=domains[1])
        h = rng.integers(0, Mc, size=domains[2])
        cells = np.unique((f[fi] * Mb + g[gj]) * Mc + h[hk])
        _check_projection(cells, targets)
        missing.append(int(box - cells.size))

    predicted = None
    notes = []
    if with_bound:
        if cfg.type_counts is not None:
            predicted = typed_failure_bound(pattern, cfg.type_counts, n, cfg.rate)
        else:
            best = best_typed_bound(pattern, n, cfg.rate)
            if best is None:
                notes.append("too many n-types to search for the best bound")
            else:
                predicted = best[1]
    return SimReport(
        trials=cfg.trials,
        successes=sum(m == 0 for m in missing),
        missing=missing,
        targets=targets,
        predicted=predicted,
        wall_clock=time.perf_counter() - start,
        domain_size=len(fi),
        notes=notes,
    )


def near_uniform_type(pattern: Pattern, n: int) -> NType:
    """Counts as equal as possible over the pattern's points (earlier points get the extras)."""
    q, r = divmod(n, len(pattern))
    return NType(pattern.triples, tuple(q + (i < r) for i in range(len(pattern))))
