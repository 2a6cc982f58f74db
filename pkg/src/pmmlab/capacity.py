"""Entropy characterisation of the capacity region of a pattern.

A rate vector ``r`` (length ``k``) lies in the region iff some distribution
``P`` on the pattern satisfies ``sum_{j in S} r_j <= H(S)_P`` for every
nonempty set ``S`` of factors.  The region is a closed convex body; this
module decides membership numerically and returns certificates either way:
a witness distribution with its slack vector, or a direction ``t >= 0`` with
``t . r`` above the support function ``h(t)``.

The optimiser is exponentiated-gradient (mirror) ascent on the probability
simplex with per-start backtracking, run on many starts at once.  Every
objective used here is concave in ``P``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .info import Distribution, _compositions

AXIS_NAMES = "IJK"


class CapacityError(ValueError):
    pass


class Verdict(str, enum.Enum):
    ACCEPT = "Accept"
    REJECT = "Reject"
    UNDETERMINED = "Undetermined"


@dataclass
class SolverConfig:
    tolerance: float = 1e-6
    verdict_margin: float = 1e-4
    multistarts: int = 32
    max_iterations: int = 5000
    stages: int = 25
    initial_smoothing: float = 0.1
    initial_step: float = 0.5
    grid_resolution: int = 25
    screening_starts: int = 2
    screening_iterations: int = 150
    seed: int = 0

    def __post_init__(self):
        if self.tolerance <= 0 or self.verdict_margin <= 0:
            raise CapacityError("tolerances must be positive")
        for name in ("multistarts", "max_iterations", "stages", "grid_resolution"):
            if getattr(self, name) < 1:
                raise CapacityError(f"{name} must be >= 1")

    @classmethod
    def from_dict(cls, data: dict | None) -> "SolverConfig":
        data = dict(data or {})
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise CapacityError(f"unknown solver options: {sorted(unknown)}")
        return cls(**data)


def _points(obj) -> tuple[tuple, ...]:
    pts = tuple(tuple(p) for p in getattr(obj, "triples", obj))
    if not pts:
        raise CapacityError("the pattern is empty")
    if len({len(p) for p in pts}) != 1:
        raise CapacityError("all pattern points need the same number of factors")
    return pts


def axis_label(axes: Sequence[int], k: int) -> str:
    if k <= len(AXIS_NAMES):
        return "".join(AXIS_NAMES[a] for a in axes)
    return "".join(f"X{a + 1}" for a in axes)


class EntropyModel:
    """Marginalisation matrices for every nonempty subset of factors of a pattern."""

    def __init__(self, points):
        self.points = _points(points)
        self.k = len(self.points[0])
        self.n = len(self.points)
        subsets = [s for r in range(1, self.k + 1) for s in itertools.combinations(range(self.k), r)]
        self.subsets = subsets
        self.labels = [axis_label(s, self.k) for s in subsets]
        self.membership = np.array([[a in s for a in range(self.k)] for s in subsets], dtype=float)
        self._mats = []
        for s in subsets:
            keys: dict = {}
            cols = [keys.setdefault(tuple(p[a] for a in s), len(keys)) for p in self.points]
            mat = np.zeros((len(keys), self.n))
            mat[cols, np.arange(self.n)] = 1.0
            self._mats.append(mat)
        self._index = {p: i for i, p in enumerate(self.points)}

    def vector(self, dist: Distribution) -> np.ndarray:
        """Probabilities of ``dist`` laid out on the pattern's points."""
        vec = np.zeros(self.n)
        for label, q in zip(dist.support, dist.probs):
            label = tuple(label)
            if label not in self._index:
                if q > 0:
                    raise CapacityError(f"distribution puts mass on {label}, which is not in the pattern")
                continue
            vec[self._index[label]] += q
        return vec

    def distribution(self, vec) -> Distribution:
        vec = np.clip(np.asarray(vec, dtype=float), 0, None)
        return Distribution(self.points, vec / vec.sum())

    def entropies(self, P: np.ndarray, grad: bool = False):
        """Entropies ``H(S)_P`` for a batch ``P`` of shape (B, n); optionally their gradients.

        Gradients are ``-log2 P_S(x_S)`` per point; the constant ``-1/ln 2`` is
        dropped since it is orthogonal to the simplex.
        """
        P = np.atleast_2d(P)
        H = np.empty((P.shape[0], len(self.subsets)))
        G = np.empty((P.shape[0], len(self.subsets), self.n)) if grad else None
        for s, mat in enumerate(self._mats):
            marg = P @ mat.T
            logs = np.log2(np.maximum(marg, 1e-300))
            H[:, s] = -(marg * logs).sum(axis=1)
            if grad:
                G[:, s, :] = -(logs @ mat)
        return (H, G) if grad else H

    def rate_sums(self, rate) -> np.ndarray:
        return self.membership @ np.asarray(rate, dtype=float)

    def chain_weights(self, t) -> np.ndarray:
        """Subset weights ``u`` with ``sum_S u_S H(S)`` equal to ``t`` applied to the chain-rule vertex.

        For ``t`` sorted decreasingly (stable) as ``t_{s0} >= t_{s1} >= ...``,
        ``u`` puts ``t_{sm} - t_{s(m+1)}`` on the prefix ``{s0, ..., sm}``.
        """
        t = np.asarray(t, dtype=float)
        order = np.argsort(-t, kind="stable")
        u = np.zeros(len(self.subsets))
        lookup = {s: i for i, s in enumerate(self.subsets)}
        for m in range(self.k):
            nxt = t[order[m + 1]] if m + 1 < self.k else 0.0
            u[lookup[tuple(sorted(order[: m + 1]))]] = t[order[m]] - nxt
        return u


def _normalise_rows(theta):
    theta = theta - theta.max(axis=1, keepdims=True)
    P = np.exp(theta)
    return P / P.sum(axis=1, keepdims=True)


def _ascend(objective, theta, iterations, step, gap_tol=None):
    """Mirror ascent in log-coordinates with independent backtracking per row.

    ``objective(P)`` returns values (B,) and gradients (B, n).  With
    ``gap_tol`` set the loop stops once every row's Frank-Wolfe gap is below it
    (only meaningful for concave objectives).
    """
    P = _normalise_rows(theta)
    val, grad = objective(P)
    eta = np.full(P.shape[0], step)
    for it in range(iterations):
        if gap_tol is not None and it % 25 == 0:
            if (grad.max(axis=1) - (grad * P).sum(axis=1)).max() <= gap_tol:
                break
        g = grad - (grad * P).sum(axis=1, keepdims=True)
        trial_theta = np.log(np.maximum(P, 1e-300)) + np.clip(eta[:, None] * g, -60, 60)
        trial = _normalise_rows(trial_theta)
        tval, tgrad = objective(trial)
        ok = tval >= val - 1e-15 * np.maximum(1.0, np.abs(val))
        P = np.where(ok[:, None], trial, P)
        val = np.where(ok, tval, val)
        grad = np.where(ok[:, None], tgrad, grad)
        eta = np.where(ok, np.minimum(eta * 1.25, 1e4), eta * 0.5)
    return P, val, grad


def _starts(model: EntropyModel, count: int, rng) -> np.ndarray:
    P = rng.dirichlet(np.ones(model.n), size=max(count - 1, 0))
    P = np.vstack([np.full((1, model.n), 1.0 / model.n), P])
    return np.log(P)


def _linear_objective(model: EntropyModel, W: np.ndarray):
    def objective(P):
        H, G = model.entropies(P, grad=True)
        return (H * W).sum(axis=1), np.einsum("bs,bsn->bn", W, G)

    return objective


def _frank_wolfe_upper(val, grad, P):
    """Upper bound on the max of a concave function over the simplex from one point's gradient."""
    return val + grad.max(axis=1) - (grad * P).sum(axis=1)


@dataclass
class SupportValue:
    """Support function value ``h(t)`` with a bracket ``[value, upper]``."""

    value: float
    upper: float
    witness: Distribution
    converged: bool


def _validate_direction(t, k):
    t = np.asarray(t, dtype=float)
    if t.shape != (k,):
        raise CapacityError(f"direction has {t.size} entries, pattern has {k} factors")
    if (t < 0).any():
        raise CapacityError("direction must be nonnegative")
    return t


def _batched_support(model, directions, starts, iterations, step, rng, gap_tol=None):
    """Best lower value, FW upper bound and maximiser per direction."""
    D = len(directions)
    W = np.array([model.chain_weights(t) for t in directions])
    theta = np.vstack([_starts(model, starts, rng) for _ in range(D)])
    Wrep = np.repeat(W, starts, axis=0)
    P, val, grad = _ascend(_linear_objective(model, Wrep), theta, iterations, step, gap_tol)
    upper = _frank_wolfe_upper(val, grad, P)
    val = val.reshape(D, starts)
    upper = upper.reshape(D, starts)
    best = val.argmax(axis=1)
    rows = np.arange(D) * starts + best
    return val.max(axis=1), upper.min(axis=1), P[rows]


def support_function(points, t, cfg: SolverConfig | None = None) -> SupportValue:
    """``h(t) = max_P sum_m (t_(m) - t_(m+1)) H(first m+1 factors in decreasing t order)_P``."""
    cfg = cfg or SolverConfig()
    model = points if isinstance(points, EntropyModel) else EntropyModel(points)
    t = _validate_direction(t, model.k)
    rng = np.random.default_rng(cfg.seed)
    lo, hi, P = _batched_support(model, [t], cfg.multistarts, cfg.max_iterations, cfg.initial_step, rng,
                                 gap_tol=cfg.tolerance / 10)
    value, upper = float(lo[0]), max(float(hi[0]), float(lo[0]))
    return SupportValue(value, upper, model.distribution(P[0]), upper - value <= cfg.tolerance)


def feasibility_slack(points, dist: Distribution, rate) -> dict[str, float]:
    """``H(S)_P - sum_{j in S} r_j`` for every nonempty factor set ``S``."""
    model = points if isinstance(points, EntropyModel) else EntropyModel(points)
    rate = np.asarray(rate, dtype=float)
    if rate.shape != (model.k,):
        raise CapacityError(f"rate has {rate.size} entries, pattern has {model.k} factors")
    H = model.entropies(model.vector(dist))[0]
    return dict(zip(model.labels, (H - model.rate_sums(rate)).tolist()))


def orderings(k: int) -> list[tuple[int, ...]]:
    return list(itertools.permutations(range(k)))


def vertex_rates(points, dist: Distribution) -> list[np.ndarray]:
    """Chain-rule vertices, one per ordering of the factors (in :func:`orderings` order).

    For ordering ``(I, J, K)`` this is ``(H(I), H(J|I), H(K|IJ))``.
    """
    model = points if isinstance(points, EntropyModel) else EntropyModel(points)
    H = dict(zip(model.subsets, model.entropies(model.vector(dist))[0]))
    H[()] = 0.0
    out = []
    for order in orderings(model.k):
        r = np.zeros(model.k)
        for m, axis in enumerate(order):
            r[axis] = H[tuple(sorted(order[: m + 1]))] - H[tuple(sorted(order[:m]))]
        out.append(r)
    return out


@dataclass
class DualCheck:
    passed: bool
    weights: dict[str, float]
    dual_value: float
    primal_value: float
    feasible: bool
    gap: float
    literal_gap: float | None = None

    def __bool__(self):
        return self.passed


def dual_certificate_check(points, t, dist: Distribution, tol: float = 1e-9) -> DualCheck:
    """Check the dual assignment that certifies the chain-rule vertex is primal optimal for ``t``.

    The weights come from the identity
    ``t_a H(I) + t_b H(J|I) + t_c H(K|IJ) = (t_a - t_b) H(I) + (t_b - t_c) H(IJ) + t_c H(IJK)``
    (for ``t_a >= t_b >= t_c``; other orders by stable sort).  ``literal_gap``
    reports how far the alternative weight ``u_I = t_a - t_c`` lands from the
    primal value, for three factors only.
    """
    model = points if isinstance(points, EntropyModel) else EntropyModel(points)
    t = _validate_direction(t, model.k)
    u = model.chain_weights(t)
    H = model.entropies(model.vector(dist))[0]
    feasible = bool((u >= -tol).all() and (model.membership.T @ u >= t - tol).all())
    dual_value = float(u @ H)
    order = tuple(int(a) for a in np.argsort(-t, kind="stable"))
    vertex = vertex_rates(model, dist)[orderings(model.k).index(order)]
    primal_value = float(t @ vertex)
    gap = abs(dual_value - primal_value)
    literal_gap = None
    if model.k == 3:
        literal = u.copy()
        first = model.subsets.index((order[0],))
        literal[first] = t[order[0]] - t[order[2]]
        literal_gap = abs(float(literal @ H) - primal_value)
    return DualCheck(feasible and gap <= tol, dict(zip(model.labels, u.tolist())), dual_value, primal_value,
                     feasible, gap, literal_gap)


@dataclass
class MembershipResult:
    verdict: Verdict
    rate: np.ndarray
    min_slack: float
    witness: Distribution | None = None
    slacks: dict[str, float] | None = None
    direction: np.ndarray | None = None
    direction_value: float | None = None
    h_value: float | None = None
    h_upper: float | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def separation_gap(self) -> float | None:
        if self.direction is None:
            return None
        return self.direction_value - self.h_upper


def _maximise_min_slack(model: EntropyModel, rate, cfg: SolverConfig, rng):
    """Maximise ``min_S slack_S(P)`` via a softmin smoothing whose temperature halves each stage."""
    rs = model.rate_sums(rate)
    theta = _starts(model, cfg.multistarts, rng)
    per_stage = max(1, cfg.max_iterations // cfg.stages)
    mu = cfg.initial_smoothing
    weights = None
    for _ in range(cfg.stages):
        def objective(P, mu=mu):
            H, G = model.entropies(P, grad=True)
            z = -(H - rs) / mu
            top = z.max(axis=1, keepdims=True)
            w = np.exp(z - top)
            Z = w.sum(axis=1, keepdims=True)
            w /= Z
            return -mu * (top[:, 0] + np.log(Z[:, 0])), np.einsum("bs,bsn->bn", w, G)

        P, _, _ = _ascend(objective, theta, per_stage, cfg.initial_step)
        theta = np.log(np.maximum(P, 1e-300))
        mu *= 0.5
    slack = model.entropies(P) - rs
    mins = slack.min(axis=1)
    best = int(mins.argmax())
    z = -(slack[best] - slack[best].min()) / (mu * 2)
    weights = np.exp(z) / np.exp(z).sum()
    return P[best], slack[best], float(mins[best]), weights


def _simplex_grid(k: int, res: int) -> np.ndarray:
    return np.array(list(_compositions(res, k)), dtype=float) / res


def _scale_to_unit_max(t):
    t = np.clip(np.asarray(t, dtype=float), 0, None)
    top = t.max()
    return t / top if top > 0 else t


def _search_separation(model, rate, cfg, rng, hint):
    """Look for ``t`` maximising ``t . r - h(t)`` with ``max_j t_j = 1``."""
    candidates = [_scale_to_unit_max(hint)] if hint is not None and hint.max() > 0 else []
    candidates += [_scale_to_unit_max(t) for t in _simplex_grid(model.k, cfg.grid_resolution)]
    dirs = np.unique(np.round(np.array(candidates), 12), axis=0)
    lo, _, _ = _batched_support(model, dirs, cfg.screening_starts, cfg.screening_iterations, cfg.initial_step, rng)
    gaps = dirs @ rate - lo
    best = dirs[int(gaps.argmax())]
    best_gap = float(gaps.max())
    delta = 1.0 / cfg.grid_resolution
    for _ in range(12):
        trial = []
        for j in range(model.k):
            for sign in (1, -1):
                t = best.copy()
                t[j] = max(0.0, t[j] + sign * delta)
                if t.max() > 0:
                    trial.append(_scale_to_unit_max(t))
        trial = np.array(trial)
        lo, _, _ = _batched_support(model, trial, cfg.screening_starts, cfg.screening_iterations,
                                    cfg.initial_step, rng)
        gaps = trial @ rate - lo
        if gaps.max() > best_gap + 1e-12:
            best, best_gap = trial[int(gaps.argmax())], float(gaps.max())
        else:
            delta /= 2
    return best


def membership(points, rate, cfg: SolverConfig | None = None) -> MembershipResult:
    """Decide whether ``rate`` lies in the capacity region, with a certificate.

    Accept: a witness ``P`` whose slacks are all ``>= -tolerance``.  Reject: a
    direction ``t`` (scaled to ``max t = 1``) whose value ``t . r`` exceeds an
    upper bound on ``h(t)`` by more than ``verdict_margin``.  Otherwise the
    point is too close to the boundary to call and the verdict is Undetermined.
    """
    cfg = cfg or SolverConfig()
    model = points if isinstance(points, EntropyModel) else EntropyModel(points)
    rate = np.asarray(rate, dtype=float)
    if rate.shape != (model.k,):
        raise CapacityError(f"rate has {rate.size} entries, pattern has {model.k} factors")
    if (rate < 0).any():
        raise CapacityError("rates must be nonnegative")
    rng = np.random.default_rng(cfg.seed)
    P, slack, min_slack, weights = _maximise_min_slack(model, rate, cfg, rng)
    witness = model.distribution(P)
    slacks = dict(zip(model.labels, slack.tolist()))
    if min_slack >= -cfg.tolerance:
        return MembershipResult(Verdict.ACCEPT, rate, min_slack, witness, slacks)

    hint = model.membership.T @ weights
    t = _search_separation(model, rate, cfg, rng, hint)
    h = support_function(model, t, cfg)
    value = float(t @ rate)
    result = MembershipResult(Verdict.UNDETERMINED, rate, min_slack, witness, slacks, t, value, h.value, h.upper)
    if value - h.upper > cfg.verdict_margin:
        result.verdict = Verdict.REJECT
    else:
        result.notes.append("point is within the verdict margin of the region boundary")
    return result


def sum_rate_max(points) -> tuple[float, Distribution]:
    """Largest total rate: ``log2 |pattern|``, attained by the uniform distribution."""
    pts = _points(points)
    return float(np.log2(len(pts))), Distribution.uniform(pts)
