"""Exact, machine-checked interpolation for Brill-Noether curves in P^4."""
from .bn_arith import BNPair, chi_normal, f_points, rho, status

__all__ = ["BNPair", "chi_normal", "f_points", "rho", "status"]
__version__ = "0.1.0"
