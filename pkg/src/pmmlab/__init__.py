"""Partial matrix multiplication patterns: capacity regions, decomposition
verification, random covering simulations and exponent bounds."""

from .capacity import SolverConfig, Verdict, membership, support_function, vertex_rates
from .pattern import LAMBDA_BCRL, LAMBDA_EX, MapTriple, Pattern, mm_support
from .tensor import from_pattern, verify_border_decomposition

__version__ = "0.1.0"

__all__ = [
    "LAMBDA_BCRL",
    "LAMBDA_EX",
    "MapTriple",
    "Pattern",
    "SolverConfig",
    "Verdict",
    "from_pattern",
    "membership",
    "mm_support",
    "support_function",
    "verify_border_decomposition",
    "vertex_rates",
]
