"""Exact Hill-lattice, filtration and chain-complex computations over finitely
generated abelian groups."""

__version__ = "0.1.0"
