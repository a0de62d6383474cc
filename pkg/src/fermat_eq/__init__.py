"""Exponential solutions of Fermat-type shift/differential equations and the
equianharmonic Weierstrass function behind their elliptic parametrization."""

from .elliptic import Lattice, WpValue, compute_lattice, wp_eval
from .solver import EquationInstance, FermatPair, Verdict, classify, solve, verify_solution

__version__ = "0.1.0"

__all__ = [
    "EquationInstance",
    "FermatPair",
    "Lattice",
    "Verdict",
    "WpValue",
    "classify",
    "compute_lattice",
    "solve",
    "verify_solution",
    "wp_eval",
]
