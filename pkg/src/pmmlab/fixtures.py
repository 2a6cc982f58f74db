"""Bundled example inputs: the two six-triple patterns, the five-term border
decomposition, the binary two-factor pattern, and a diagonal laser instance."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .pattern import LAMBDA_BCRL, LAMBDA_EX, Pattern
from .tensor import EpsDecomposition

DATA = resources.files("pmmlab") / "data"

# Variable order for 2 x 2 x 2 patterns: x_{ij}, y_{jk}, z_{ki} flattened row-major.
_X = {"11": 0, "12": 1, "21": 2, "22": 3}

BINARY_POINTS = ((1, 1), (1, 2), (2, 1))


def lambda_ex() -> Pattern:
    return LAMBDA_EX


def lambda_bcrl() -> Pattern:
    return LAMBDA_BCRL


def _vec(**entries):
    v = [()] * 4
    for name, poly in entries.items():
        v[_X[name[1:]]] = tuple(poly)
    return tuple(v)


def example_border_decomposition(flip_sign: bool = False) -> EpsDecomposition:
    """Five-term eps-decomposition with ``eps^3`` times the tensor of :data:`LAMBDA_EX` as leading term.

    ``flip_sign`` negates the first term, which breaks the cancellation at ``eps^0``.
    """
    first = -1 if flip_sign else 1
    terms = (
        (_vec(x12=[first]), _vec(y12=[1]), _vec(z12=[1])),
        (_vec(x12=[-1], x21=[0, 0, -1]), _vec(y12=[1], y21=[0, 0, 1]), _vec(z12=[1], z21=[0, 0, 1])),
        (_vec(x21=[0, 0, 1]), _vec(y12=[1], y11=[0, 1]), _vec(z12=[1], z22=[0, 1])),
        (_vec(x12=[0, 0, 1], x22=[0, 0, 0, 1]), _vec(y21=[1]), _vec(z12=[1], z11=[0, 1])),
        (_vec(x12=[0, 0, 1], x11=[0, 0, 0, 1]), _vec(y12=[1], y22=[0, 1]), _vec(z21=[1])),
    )
    return EpsDecomposition((4, 4, 4), terms, 3)


def fixture_names() -> list[str]:
    return sorted(p.name for p in DATA.iterdir() if p.name.endswith(".json"))


def resolve(name_or_path) -> Path:
    """A path on disk, or the name of a bundled fixture (with or without ``.json``)."""
    path = Path(name_or_path)
    if path.exists():
        return path
    name = path.name if path.name.endswith(".json") else path.name + ".json"
    candidate = DATA / name
    if candidate.is_file():
        return Path(str(candidate))
    return path
