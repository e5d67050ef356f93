"""Vertex- and sum-distinguishing edge colorings of dense regular graphs."""

from .coloring import PartialColoring, verify_proper, verify_sd, verify_vd
from .graph import MultiGraph, random_regular

__version__ = "0.1.0"

__all__ = ["MultiGraph", "PartialColoring", "random_regular", "verify_proper", "verify_sd", "verify_vd"]
