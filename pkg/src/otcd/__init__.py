"""Overlapping temporal community detection by trace-norm relaxation."""

from .evaluation import cover_distance, exact_recovery, phase_sweep
from .kernels import available_backends, get_backend, set_backend
from .model import (
    Cover,
    CoverTimeline,
    DynamicNetwork,
    assignment_of,
    cover_from_memberships,
    cover_matrix_of,
    trace_norm_of_cover,
)
from .netio import (
    ParseError,
    load_cover_timeline,
    load_temporal_edgelist,
    write_cover_timeline,
    write_temporal_edgelist,
)
from .objective import ObjectiveConfig, modularity_weights, total_objective
from .oracle import brute_force_solve, enumerate_covers
from .postprocess import NmfConfig, extract_timeline, map_labels
from .solver import SolverConfig, solve_offline, solve_online

__version__ = "0.1.0"

__all__ = [
    "Cover", "CoverTimeline", "DynamicNetwork", "NmfConfig", "ObjectiveConfig", "ParseError", "SolverConfig",
    "assignment_of", "available_backends", "brute_force_solve", "cover_distance", "cover_from_memberships",
    "cover_matrix_of", "enumerate_covers", "exact_recovery", "extract_timeline", "get_backend",
    "load_cover_timeline", "load_temporal_edgelist", "map_labels", "modularity_weights", "phase_sweep",
    "set_backend", "solve_offline", "solve_online", "total_objective", "trace_norm_of_cover",
    "write_cover_timeline", "write_temporal_edgelist",
]
