import itertools

import pytest
from hypothesis import strategies as st

from pmmlab.pattern import LAMBDA_BCRL, LAMBDA_EX, MapTriple, Pattern


@pytest.fixture
def lam_ex():
    return LAMBDA_EX


@pytest.fixture
def lam_bcrl():
    return LAMBDA_BCRL


@st.composite
def patterns(draw, max_dim=3, min_size=0):
    dims = tuple(draw(st.integers(1, max_dim)) for _ in range(3))
    box = list(itertools.product(*(range(1, d + 1) for d in dims)))
    chosen = draw(st.lists(st.sampled_from(box), min_size=min(min_size, len(box)), unique=True))
    return Pattern(dims, tuple(chosen))


@st.composite
def map_triples(draw, dims, max_target=3):
    target = tuple(draw(st.integers(1, max_target)) for _ in range(3))
    arrays = [tuple(draw(st.lists(st.integers(1, t), min_size=d, max_size=d))) for d, t in zip(dims, target)]
    return MapTriple(*arrays, target_dims=target)


def variable_map(dims, m: MapTriple) -> MapTriple:
    """The map on x_{ij}, y_{jk}, z_{ki} induced by (f, g, h), in from_pattern's flat order."""
    l, mm, n = dims
    tl, tm, tn = m.target_dims

    def pair_map(p, q, sp, sq, tq):
        return tuple((p[a - 1] - 1) * tq + q[b - 1] for a in range(1, sp + 1) for b in range(1, sq + 1))

    return MapTriple(
        pair_map(m.f, m.g, l, mm, tm),
        pair_map(m.g, m.h, mm, n, tn),
        pair_map(m.h, m.f, n, l, tl),
        target_dims=(tl * tm, tm * tn, tn * tl),
    )


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
