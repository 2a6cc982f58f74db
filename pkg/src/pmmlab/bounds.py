"""Upper bounds on the support-rank exponent of matrix multiplication.

All rank inputs (``L``, ``R``, ``asym_rank``) are caller-supplied upper
bounds; nothing here computes a rank.  Logarithms are base 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from .capacity import MembershipResult, SolverConfig, Verdict, membership
from .info import Distribution, entropy, entropy_of
from .pattern import Pattern

BISECTION_TOL = 1e-9
SCALING_TOL = 1e-9
SCALING_SWEEPS = 10**5


class BoundError(ValueError):
    pass


class BoundRefused(BoundError):
    """A precondition certificate is missing or was refuted."""

    def __init__(self, message, verdict: Verdict | None = None, certificate=None):
        super().__init__(message)
        self.verdict = verdict
        self.certificate = certificate


@dataclass
class BoundReport:
    value: float
    formula: str
    inputs: dict
    witness: dict = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)


def _size(p) -> int:
    return p if isinstance(p, int) else len(p)


def omega_s_pattern_bound(pattern: Pattern | int, rank: int) -> BoundReport:
    """``omega_s <= 3 log L / log |pattern|``."""
    size = _size(pattern)
    if size <= 1:
        raise BoundError("the pattern needs at least two triples")
    if rank < 1:
        raise BoundError("rank must be >= 1")
    return BoundReport(3 * math.log2(rank) / math.log2(size), "omega_s_pattern", {"size": size, "rank": rank})


def rate_specific_bound(pattern, rank: int, rate, cfg: SolverConfig | None = None) -> BoundReport:
    """``omega_s(a, b, c) <= log L`` for a rate inside the pattern's capacity region."""
    if rank < 1:
        raise BoundError("rank must be >= 1")
    result = membership(pattern, rate, cfg)
    if result.verdict is not Verdict.ACCEPT:
        raise BoundRefused(f"rate {list(rate)} is not certified in the capacity region ({result.verdict.value})",
                           result.verdict, result)
    return BoundReport(
        math.log2(rank),
        "omega_s_rate",
        {"size": len(result.witness), "rank": rank, "rate": [float(r) for r in rate]},
        {"membership": result},
    )


def sum_inequality_omega(sizes: Sequence[int], rank: float) -> BoundReport:
    """Solve ``sum_i sizes_i^(w/3) = R`` for ``w`` by bisection."""
    sizes = [int(s) for s in sizes]
    if not sizes or any(s < 1 for s in sizes):
        raise BoundError("sizes must be positive integers")
    if rank <= 0:
        raise BoundError("R must be positive")
    inputs = {"sizes": sizes, "rank": rank}
    p = len(sizes)

    def lhs(w):
        return sum(s ** (w / 3) for s in sizes)

    if all(s == 1 for s in sizes):
        if math.isclose(rank, p):
            return BoundReport(0.0, "sum_inequality", inputs, flags=["degenerate: all sizes are 1, equality holds for every omega"])
        if rank > p:
            return BoundReport(math.inf, "sum_inequality", inputs, flags=["degenerate: all sizes are 1, no constraint on omega"])
    if lhs(0.0) > rank:
        return BoundReport(math.inf, "sum_inequality", inputs, flags=["infeasible: R is below the number of terms"])
    lo, hi = 0.0, 3 * math.log2(max(rank, 2)) + 3
    while hi - lo > BISECTION_TOL:
        mid = (lo + hi) / 2
        if lhs(mid) <= rank:
            lo = mid
        else:
            hi = mid
    w = (lo + hi) / 2
    return BoundReport(w, "sum_inequality", inputs, {"bracket": [lo, hi], "residual": lhs(w) - rank})


def _certify(components, certificates, cfg):
    out = []
    for n, (pattern, rate) in enumerate(components):
        cert = certificates[n] if certificates is not None else membership(pattern, rate, cfg)
        if not isinstance(cert, MembershipResult) or cert.verdict is not Verdict.ACCEPT:
            verdict = getattr(cert, "verdict", None)
            raise BoundRefused(f"component {n}: rate {list(rate)} lacks an Accept certificate", verdict, cert)
        out.append(cert)
    return out


def sum_inequality_rate_bound(q, rank: float, components, certificates=None, cfg=None) -> BoundReport:
    """``omega_s(a, b, c) <= log R - H(Q)`` at the mixed rate ``sum_i Q(i) r_i``.

    ``components`` lists ``(pattern, rate)`` pairs; each rate must be certified
    inside its pattern's capacity region, either by the supplied
    ``certificates`` or by running :func:`membership`.
    """
    q = np.asarray(getattr(q, "probs", q), dtype=float)
    if len(q) != len(components):
        raise BoundError("Q and the component list have different lengths")
    if (q < 0).any() or abs(q.sum() - 1) > 1e-12:
        raise BoundError("Q must be a probability vector")
    certs = _certify(components, certificates, cfg)
    mixed = sum(qi * np.asarray(r, dtype=float) for qi, (_, r) in zip(q, components))
    hq = entropy_of(q)
    return BoundReport(
        math.log2(rank) - hq,
        "sum_inequality_rate",
        {"Q": q.tolist(), "rank": rank, "rates": [list(map(float, r)) for _, r in components]},
        {"mixed_rate": mixed.tolist(), "H(Q)": hq, "certificates": certs},
    )


@dataclass(frozen=True)
class TightWitness:
    """Integer labels ``u: I -> Z``, ``v: J -> Z``, ``w: K -> Z`` (position ``p`` labels index ``p + 1``)."""

    u: tuple[int, ...]
    v: tuple[int, ...]
    w: tuple[int, ...]


def tight_witness_verify(support, witness: TightWitness) -> bool:
    """True iff all three labellings are injective and ``u(i) + v(j) + w(k) = 0`` on the support."""
    for labels in (witness.u, witness.v, witness.w):
        if len(set(labels)) != len(labels):
            return False
    for i, j, k in getattr(support, "triples", support):
        try:
            if witness.u[i - 1] + witness.v[j - 1] + witness.w[k - 1] != 0:
                return False
        except IndexError:
            return False
    return True


def _marginal_matrix(points, axis):
    keys = sorted({p[axis] for p in points})
    mat = np.zeros((len(keys), len(points)))
    for col, p in enumerate(points):
        mat[keys.index(p[axis]), col] = 1
    return keys, mat


def _target_vector(keys, target) -> np.ndarray:
    if isinstance(target, Distribution):
        target = {(s[0] if isinstance(s, tuple) and len(s) == 1 else s): p for s, p in zip(target.support, target.probs)}
    if isinstance(target, Mapping):
        extra = [k for k, v in target.items() if v > 0 and k not in keys]
        if extra:
            raise BoundError(f"target marginal puts mass on labels {extra} outside the support")
        return np.array([float(target.get(k, 0.0)) for k in keys])
    vec = np.asarray(target, dtype=float)
    if vec.shape != (len(keys),):
        raise BoundError(f"target marginal has {vec.size} entries, the support uses {len(keys)} labels")
    return vec


def max_entropy_matching_marginals(support, targets, tol: float = SCALING_TOL,
                                   max_sweeps: int = SCALING_SWEEPS) -> tuple[Distribution, float]:
    """Maximum-entropy distribution on ``support`` with prescribed single-axis marginals.

    ``targets`` are three marginals, each a mapping label -> probability, a
    :class:`Distribution`, or a vector over the sorted labels the support uses
    on that axis.  Feasibility is checked with a linear program first; the
    maximiser is then found by iterative proportional scaling from the uniform
    distribution on the support.
    """
    points = [tuple(p) for p in getattr(support, "triples", support)]
    mats, vecs = [], []
    for axis, target in enumerate(targets):
        keys, mat = _marginal_matrix(points, axis)
        mats.append(mat)
        vecs.append(_target_vector(keys, target))
    A = np.vstack(mats)
    b = np.concatenate(vecs)
    lp = linprog(np.zeros(len(points)), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if lp.status != 0:
        raise BoundError("no distribution on the support has these marginals")

    P = np.full(len(points), 1.0 / len(points))
    for sweep in range(max_sweeps):
        for mat, vec in zip(mats, vecs):
            current = mat @ P
            ratio = np.divide(vec, current, out=np.zeros_like(vec), where=current > 0)
            P = P * (ratio @ mat)
        dev = max(np.abs(mat @ P - vec).sum() for mat, vec in zip(mats, vecs))
        if dev < tol:
            break
    dist = Distribution(tuple(points), P / P.sum())
    return dist, entropy(dist)


def laser_bound(support, block_patterns: Mapping, q, block_rates: Mapping, asym_rank: float,
                witness: TightWitness, certificates: Mapping | None = None,
                cfg: SolverConfig | None = None) -> BoundReport:
    """Laser-method bound for a block-tight tensor with partial matrix multiplication blocks.

    ``omega_s(a, b, c) <= log R - min(H(Q_I), H(Q_J), H(Q_K)) - H(Q) + max_P H(P)``
    at ``(a, b, c) = sum Q(i, j, k) r_{ijk}``, with ``P`` ranging over
    distributions on the outer support sharing Q's three marginals.  The square
    version divides by ``sum Q log |L_{ijk}| / 3``.
    """
    points = [tuple(p) for p in getattr(support, "triples", support)]
    if not tight_witness_verify(points, witness):
        raise BoundRefused("the outer support is not certified tight by the given labels")
    if isinstance(q, Distribution):
        q_map = {tuple(s): float(p) for s, p in zip(q.support, q.probs)}
    else:
        q_map = {tuple(k): float(v) for k, v in dict(q).items()}
    if set(q_map) - set(points):
        raise BoundError("Q has mass outside the outer support")
    qvec = np.array([q_map.get(p, 0.0) for p in points])
    if (qvec < 0).any() or abs(qvec.sum() - 1) > 1e-12:
        raise BoundError("Q must be a probability distribution")

    active = [p for p, w in zip(points, qvec) if w > 0]
    components = [(block_patterns[p], block_rates[p]) for p in active]
    certs = [certificates[p] for p in active] if certificates is not None else None
    certs = _certify(components, certs, cfg)
    mixed = sum(q_map[p] * np.asarray(block_rates[p], dtype=float) for p in active)

    qdist = Distribution(tuple(points), qvec)
    marg_entropies = []
    targets = []
    for axis in range(3):
        keys, mat = _marginal_matrix(points, axis)
        vec = mat @ qvec
        targets.append(vec)
        marg_entropies.append(entropy_of(vec))
    _, max_h = max_entropy_matching_marginals(points, targets)
    hq = entropy(qdist)
    value = math.log2(asym_rank) - min(marg_entropies) - hq + max_h
    total_log = sum(q_map[p] * math.log2(len(block_patterns[p])) for p in active)
    square = 3 * value / total_log if total_log > 0 else math.inf
    return BoundReport(
        value,
        "laser",
        {"support": points, "Q": qvec.tolist(), "asym_rank": asym_rank,
         "block_sizes": {str(p): len(block_patterns[p]) for p in active}},
        {"mixed_rate": mixed.tolist(), "marginal_entropies": marg_entropies, "H(Q)": hq,
         "max_entropy": max_h, "omega_s_square": square, "certificates": certs},
    )


def omega_from_omega_s(omega_s: float) -> float:
    """Convert a support-rank exponent bound via ``omega - 2 <= 3/2 (omega_s - 2)``."""
    return 2 + 1.5 * (omega_s - 2)
