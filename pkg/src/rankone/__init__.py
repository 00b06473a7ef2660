"""Exact lattice algebra and finite-depth factor criteria for rank-one Z^d constructions."""
from .lattice import Lattice, Residue, ResidueHistogram, RankDeficient, NotComparable
from .verdict import Verdict, BadEpsilon, CapExceeded

__version__ = "0.1.0"
