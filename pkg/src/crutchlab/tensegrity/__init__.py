"""Prestressed two-cell tensegrity column: build, solve, profile, compare."""

from .builder import build_two_cell_column
from .devices import (
    CALIBRATED_CABLE_EA_N,
    CALIBRATED_STRUT_EXTENSION_M,
    DeviceModel,
    FailureReport,
    LoadProfile,
    axial_load_profile,
    calibrate_column,
    calibrated_column,
    check_member_failure,
    comparison_device_profile,
    spring_displacement,
    terrain_conformance,
)
from .statics import (
    Configuration,
    LoadCase,
    MechanismSingularity,
    NoSelfStress,
    NonConvergence,
    SelfStress,
    SignInfeasibleSelfStress,
    SolverError,
    Terrain,
    apply_prestress,
    equilibrium_matrix,
    find_self_stress,
    solve_static,
    tangent_stiffness,
)
from .topology import Member, Node, Topology, TopologyError, prism_cell, two_cell_layout

__all__ = [name for name in dir() if not name.startswith("_")]
