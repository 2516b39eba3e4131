"""Finite-window computations on lamplighter graphs, their base groups and quasi-median graphs."""

__version__ = "0.1.0"

from .errors import WreathLabError
from .groups import F2, F2xZ, GroupModel, Heisenberg, Zd, make_model
from .lamp import Coloring, LampGraph, LampState, lamp_distance, leaf_distance, stock_lamp_graph
from .metrics import Ball, ball, coarse_components, graph_ball, hausdorff, separation_probe

__all__ = [
    "WreathLabError", "GroupModel", "Zd", "Heisenberg", "F2", "F2xZ", "make_model",
    "Coloring", "LampGraph", "LampState", "lamp_distance", "leaf_distance", "stock_lamp_graph",
    "Ball", "ball", "graph_ball", "hausdorff", "coarse_components", "separation_probe",
]
