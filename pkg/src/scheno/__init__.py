"""Schema-noise decompositions of graphs scored by automorphic symmetry."""

__version__ = "0.1.0"
