"""Semidefinite programs for RLD values and the embedded interior-point solver."""

from .programs import (
    CrossCheckReport,
    build_channel_dual,
    build_channel_primal,
    build_state_dual,
    build_state_primal,
    cross_check,
    schur_residual_min_eig,
)
from .solver import LmiBuilder, SdpProblem, SdpSolution, Status, solve_sdp

__all__ = [
    "CrossCheckReport",
    "LmiBuilder",
    "SdpProblem",
    "SdpSolution",
    "Status",
    "build_channel_dual",
    "build_channel_primal",
    "build_state_dual",
    "build_state_primal",
    "cross_check",
    "schur_residual_min_eig",
    "solve_sdp",
]
