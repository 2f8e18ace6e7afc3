"""Knot invariants from configuration-space integrals.

Diagram algebra (STU/IHX/4T), Fulton-MacPherson stratum combinatorics,
Monte Carlo evaluation of the pulled-back sphere volume forms, and
combinatorial Gauss-diagram oracles for cross-validation.
"""

__version__ = "0.1.0"
