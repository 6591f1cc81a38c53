"""Half-space crack potentials: forward maps, jump checks, stability, inversion."""

from .geometry import (
    CapKind,
    CrackFrame,
    CrackGraph,
    ParamBox,
    PlaneParams,
    SourceRegion,
    crack_depth_margin,
    graph_point,
    grid_nodes,
    make_frame,
)
from .forward import (
    BoundaryData,
    ForwardMatrix,
    SensorSet,
    SlipGrid,
    assemble_A,
    check_harmonic,
    check_neumann_top,
    eval_field,
    eval_field_refined,
    extract_jump,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryData",
    "CapKind",
    "CrackFrame",
    "CrackGraph",
    "ForwardMatrix",
    "ParamBox",
    "PlaneParams",
    "SensorSet",
    "SlipGrid",
    "SourceRegion",
    "assemble_A",
    "check_harmonic",
    "check_neumann_top",
    "crack_depth_margin",
    "eval_field",
    "eval_field_refined",
    "extract_jump",
    "graph_point",
    "grid_nodes",
    "make_frame",
]
