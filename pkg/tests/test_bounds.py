import itertools
import math

import numpy as np
import pytest
from scipy.linalg import null_space

from pmmlab.bounds import (
    BoundError,
    BoundRefused,
    TightWitness,
    laser_bound,
    max_entropy_matching_marginals,
    omega_from_omega_s,
    omega_s_pattern_bound,
    rate_specific_bound,
    sum_inequality_omega,
    sum_inequality_rate_bound,
    tight_witness_verify,
)
from pmmlab.capacity import Verdict, membership
from pmmlab.info import entropy_of, marginal
from pmmlab.pattern import LAMBDA_BCRL, LAMBDA_EX, Pattern

LOG = math.log2


def h2(p):
    return entropy_of([p, 1 - p])


def test_pattern_bound_examples():
    assert omega_s_pattern_bound(LAMBDA_EX, 5).value == pytest.approx(3 * LOG(5) / LOG(6), abs=1e-12)
    assert omega_s_pattern_bound(LAMBDA_EX, 5).value == pytest.approx(2.694789, abs=1e-4)
    assert omega_s_pattern_bound(Pattern.box(2, 2, 2), 7).value == pytest.approx(2.807355, abs=1e-6)
    assert omega_s_pattern_bound(LAMBDA_EX, 6).value == pytest.approx(3.0, abs=1e-12)
    with pytest.raises(BoundError):
        omega_s_pattern_bound(Pattern((1, 1, 1), ((1, 1, 1),)), 1)


def test_pattern_bound_monotone():
    vals = [omega_s_pattern_bound(6, L).value for L in range(1, 20)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    vals = [omega_s_pattern_bound(s, 5).value for s in range(2, 30)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_rate_specific_bound():
    assert rate_specific_bound(LAMBDA_EX, 5, (0, 0, 0)).value == pytest.approx(LOG(5))
    rep = rate_specific_bound(LAMBDA_EX, 5, (1, 0.918296, 0.666667))
    assert rep.value == pytest.approx(2.321928, abs=1e-6)
    assert rep.witness["membership"].verdict is Verdict.ACCEPT
    with pytest.raises(BoundRefused) as err:
        rate_specific_bound(LAMBDA_BCRL, 5, (1, 1, 0.5))
    assert err.value.verdict is Verdict.REJECT


def test_sum_inequality_examples():
    assert sum_inequality_omega([8], 7).value == pytest.approx(LOG(7), abs=1e-6)
    assert sum_inequality_omega([6], 5).value == pytest.approx(2.694789, abs=1e-4)
    deg = sum_inequality_omega([1, 1], 2)
    assert deg.value == 0 and any("degenerate" in f for f in deg.flags)
    assert sum_inequality_omega([2, 3], 1).value == math.inf
    assert sum_inequality_omega([1, 1], 3).value == math.inf
    with pytest.raises(BoundError):
        sum_inequality_omega([0], 3)


@pytest.mark.parametrize("size,R", [(6, 5), (8, 7), (4, 3), (27, 23), (2, 2)])
def test_single_term_matches_pattern_formula(size, R):
    assert sum_inequality_omega([size], R).value == pytest.approx(omega_s_pattern_bound(size, R).value, abs=1e-9)


@pytest.mark.parametrize("sizes,R", [([6, 6], 10), ([2, 3, 4], 9), ([1, 8], 8), ([5, 5, 5], 20)])
def test_bisection_residual(sizes, R):
    rep = sum_inequality_omega(sizes, R)
    w = rep.value
    assert abs(sum(s ** (w / 3) for s in sizes) - R) < 1e-6
    lo, hi = rep.witness["bracket"]
    assert hi - lo <= 1e-9


def test_sum_inequality_rate_bound():
    comps = [(LAMBDA_EX, (1, 1, 0.5)), (LAMBDA_EX, (0.5, 1, 1))]
    rep = sum_inequality_rate_bound([0.5, 0.5], 10, comps)
    assert rep.value == pytest.approx(LOG(10) - 1, abs=1e-12)
    assert rep.value == pytest.approx(2.321928, abs=1e-6)
    assert rep.witness["mixed_rate"] == pytest.approx([0.75, 1, 0.75])
    single = sum_inequality_rate_bound([1.0], 5, comps[:1])
    assert single.value == pytest.approx(rate_specific_bound(LAMBDA_EX, 5, (1, 1, 0.5)).value)
    with pytest.raises(BoundRefused):
        sum_inequality_rate_bound([0.5, 0.5], 10, [(LAMBDA_EX, (1, 1, 0.5)), (LAMBDA_BCRL, (1, 1, 0.5))])


def test_sum_inequality_rate_bound_reuses_certificates():
    cert = membership(LAMBDA_EX, (1, 1, 0.5))
    rep = sum_inequality_rate_bound([1.0], 5, [(LAMBDA_EX, (1, 1, 0.5))], certificates=[cert])
    assert rep.witness["certificates"][0] is cert
    bad = membership(LAMBDA_BCRL, (1, 1, 0.5))
    with pytest.raises(BoundRefused):
        sum_inequality_rate_bound([1.0], 5, [(LAMBDA_BCRL, (1, 1, 0.5))], certificates=[bad])


def search_tight_witness(points, dims, labels=range(-3, 4)):
    for u in itertools.permutations(labels, dims[0]):
        for v in itertools.permutations(labels, dims[1]):
            for w in itertools.permutations(labels, dims[2]):
                if all(u[i - 1] + v[j - 1] + w[k - 1] == 0 for i, j, k in points):
                    return TightWitness(u, v, w)
    return None


def test_tight_witness_examples():
    assert tight_witness_verify([(1, 1, 1)], TightWitness((0,), (0,), (0,)))
    assert tight_witness_verify([(1, 1, 1), (2, 2, 2)], TightWitness((0, 1), (0, 1), (0, -2)))
    assert not tight_witness_verify([(1, 1, 1), (2, 2, 2)], TightWitness((0, 0), (0, 1), (0, -1)))


@pytest.mark.parametrize("points,dims", [
    (list(itertools.product((1, 2), repeat=3)), (2, 2, 2)),
    (LAMBDA_EX.triples, (2, 2, 2)),
    (LAMBDA_BCRL.triples, (2, 2, 2)),
    ([(1, 1, 2), (1, 2, 1), (2, 1, 1)], (2, 2, 2)),
    ([(1, 1, 1), (2, 2, 2), (3, 3, 3)], (3, 3, 3)),
    ([(1, 2, 3), (2, 1, 3), (3, 3, 1)], (3, 3, 3)),
])
def test_tight_witness_exhaustive(points, dims):
    found = search_tight_witness(points, dims)
    if found is not None:
        assert tight_witness_verify(points, found)
    # every candidate labelling agrees with the direct definition
    labels = range(-2, 3)
    for u in itertools.permutations(labels, dims[0]):
        for v in itertools.permutations(labels, dims[1]):
            w = tuple(range(-dims[2], 0))
            wit = TightWitness(u, v, w)
            direct = all(u[i - 1] + v[j - 1] + w[k - 1] == 0 for i, j, k in points)
            assert tight_witness_verify(points, wit) == direct
    if dims == (2, 2, 2) and len(points) == 8:
        assert found is None


def grid_oracle(points, targets, step=1e-3):
    """Max entropy over a grid on the affine space of P with the given axis marginals."""
    rows, rhs = [], []
    for axis, tgt in enumerate(targets):
        for lab, val in tgt.items():
            rows.append([1.0 if p[axis] == lab else 0.0 for p in points])
            rhs.append(val)
    A, b = np.array(rows), np.array(rhs)
    p0 = np.linalg.lstsq(A, b, rcond=None)[0]
    N = null_space(A)
    assert N.shape[1] == 2
    s = np.arange(-1, 1 + step, step)
    S, T = np.meshgrid(s, s)
    P = p0[None, :] + S.reshape(-1, 1) * N[:, 0] + T.reshape(-1, 1) * N[:, 1]
    P = P[(P >= 0).all(axis=1)]
    with np.errstate(divide="ignore", invalid="ignore"):
        H = -np.where(P > 0, P * np.log2(P), 0).sum(axis=1)
    return H.max()


@pytest.mark.parametrize("targets", [
    ({1: 0.5, 2: 0.5}, {1: 0.5, 2: 0.5}, {1: 0.5, 2: 0.5}),
    ({1: 0.6, 2: 0.4}, {1: 0.5, 2: 0.5}, {1: 0.45, 2: 0.55}),
    ({1: 0.3, 2: 0.7}, {1: 0.65, 2: 0.35}, {1: 0.5, 2: 0.5}),
])
def test_max_entropy_matches_grid(targets):
    dist, h = max_entropy_matching_marginals(LAMBDA_EX, targets)
    for axis, tgt in enumerate(targets):
        m = marginal(dist, (axis,)).as_dict()
        for lab, val in tgt.items():
            assert m.get((lab,), 0) == pytest.approx(val, abs=1e-9)
    ref = grid_oracle(LAMBDA_EX.triples, targets)
    assert h >= ref - 1e-3
    assert h <= ref + 1e-3
    if targets[0][1] == 0.5 and targets[2][1] == 0.5 and targets[1][1] == 0.5:
        assert h == pytest.approx(LOG(6), abs=1e-9)


def test_max_entropy_trivial_cases():
    q = [0.2, 0.3, 0.5]
    diag = [(i, i, i) for i in (1, 2, 3)]
    dist, h = max_entropy_matching_marginals(diag, [q, q, q])
    assert dist.probs == pytest.approx(q) and h == pytest.approx(entropy_of(q))
    box = list(itertools.product((1, 2), (1, 2, 3), (1, 2)))
    targets = ([0.5, 0.5], [1 / 3] * 3, [0.5, 0.5])
    dist, h = max_entropy_matching_marginals(box, targets)
    assert h == pytest.approx(1 + LOG(3) + 1, abs=1e-9)
    with pytest.raises(BoundError):
        max_entropy_matching_marginals(diag, [q, [0.5, 0.5, 0], q])


def laser_inputs(points, rates):
    blocks = {p: LAMBDA_EX for p in points}
    return blocks, dict(zip(points, rates))


def test_laser_single_block():
    blocks, rates = laser_inputs([(1, 1, 1)], [(1, 1, 0.5)])
    rep = laser_bound([(1, 1, 1)], blocks, {(1, 1, 1): 1.0}, rates, 5, TightWitness((0,), (0,), (0,)))
    assert rep.value == pytest.approx(LOG(5), abs=1e-12)
    assert rep.witness["omega_s_square"] == pytest.approx(3 * LOG(5) / LOG(6), abs=1e-12)


def test_laser_diagonal_matches_sum_inequality():
    pts = [(1, 1, 1), (2, 2, 2)]
    rates = [(1, 1, 0.5), (0.5, 1, 1)]
    blocks, block_rates = laser_inputs(pts, rates)
    wit = TightWitness((0, 1), (0, 1), (0, -2))
    rep = laser_bound(pts, blocks, {p: 0.5 for p in pts}, block_rates, 10, wit)
    ref = sum_inequality_rate_bound([0.5, 0.5], 10, list(zip([LAMBDA_EX] * 2, rates)))
    assert rep.value == pytest.approx(ref.value, abs=1e-6)
    assert rep.value == pytest.approx(LOG(10) - 1, abs=1e-9)
    assert rep.witness["mixed_rate"] == pytest.approx(ref.witness["mixed_rate"])


def test_laser_three_blocks_by_hand():
    pts = [(1, 1, 2), (1, 2, 1), (2, 1, 1)]
    wit = TightWitness((0, 1), (0, 1), (-1, 0))
    blocks, rates = laser_inputs(pts, [(1, 1, 0.5)] * 3)
    rep = laser_bound(pts, blocks, {p: 1 / 3 for p in pts}, rates, 20, wit)
    # marginals are (2/3, 1/3) on every axis and pin P to uniform
    expected = LOG(20) - h2(1 / 3) - LOG(3) + LOG(3)
    assert rep.value == pytest.approx(expected, abs=1e-9)
    assert rep.witness["max_entropy"] == pytest.approx(LOG(3), abs=1e-9)
    assert rep.witness["omega_s_square"] == pytest.approx(3 * expected / LOG(6), abs=1e-9)


def test_laser_refusals():
    pts = [(1, 1, 1), (2, 2, 2)]
    blocks, rates = laser_inputs(pts, [(1, 1, 0.5)] * 2)
    with pytest.raises(BoundRefused):
        laser_bound(pts, blocks, {p: 0.5 for p in pts}, rates, 10, TightWitness((0, 1), (0, 1), (0, 0)))
    bad_rates = dict(rates)
    bad_rates[(2, 2, 2)] = (1, 1, 1)
    with pytest.raises(BoundRefused):
        laser_bound(pts, blocks, {p: 0.5 for p in pts}, bad_rates, 10, TightWitness((0, 1), (0, 1), (0, -2)))
    with pytest.raises(BoundError):
        laser_bound(pts, blocks, {(1, 2, 1): 1.0}, rates, 10, TightWitness((0, 1), (0, 1), (0, -2)))


def test_omega_conversion():
    assert omega_from_omega_s(2) == 2
    assert omega_from_omega_s(LOG(7)) == pytest.approx(2 + 1.5 * (LOG(7) - 2))
