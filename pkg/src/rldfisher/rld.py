"""RLD Fisher information of state and channel families.

Scalar values are plain floats; ``math.inf`` marks a failed support
condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .families import ChannelFamilyPoint, StateFamilyPoint, validate_weight


@dataclass(frozen=True, eq=False)
class FisherMatrix:
    entries: np.ndarray
    finite: bool = True

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def _weighted_square(derivs, w) -> np.ndarray:
    # sum_{j,k} <k|W|j> (d_k X)(d_j X)
    out = np.zeros_like(derivs[0])
    for j, dj in enumerate(derivs):
        for k, dk in enumerate(derivs):
            if w[k, j] != 0:
                out = out + w[k, j] * (dk @ dj)
    return out


def _support_violation(derivs, base, w, rank_tol) -> bool:
    kernel = la.kernel_projector(base, rank_tol)
    if not np.any(kernel):
        return False
    lhs = _weighted_square(derivs, w) @ kernel
    scale = 1.0 + max(la.op_norm(d) ** 2 for d in derivs)
    return la.op_norm(lhs) > rank_tol * scale


def _check_weight(w, n_params: int) -> np.ndarray:
    w = validate_weight(w)
    if w.shape != (n_params, n_params):
        raise ValueError(
            f"weight matrix is {w.shape[0]}x{w.shape[1]} but the family has "
            f"{n_params} parameters"
        )
    return w


def rld_finiteness_state(
    state: StateFamilyPoint, w, rank_tol: float = la.RANK_TOL
) -> bool:
    w = _check_weight(w, state.n_params)
    return not _support_violation(state.derivs, state.rho, w, rank_tol)


def rld_matrix_state(state: StateFamilyPoint, rank_tol: float = la.RANK_TOL) -> FisherMatrix:
    """Matrix with entries ``Tr[(d_j rho) rho^-1 (d_k rho)]``.

    Returns ``finite=False`` (entries set to inf) when any pairwise support
    condition ``(d_j rho)(d_k rho) Pi_perp = 0`` fails.
    """
    D = state.n_params
    for j in range(D):
        for k in range(D):
            e = np.zeros((D, D))
            e[k, j] = 1.0
            # single term of the weighted square picks out the pair (j, k)
            if _support_violation(state.derivs, state.rho, e, rank_tol):
                return FisherMatrix(np.full((D, D), np.inf, dtype=complex), False)
    inv = la.support_pinv(state.rho, rank_tol)
    f = np.empty((D, D), dtype=complex)
    for j, dj in enumerate(state.derivs):
        for k, dk in enumerate(state.derivs):
            f[j, k] = np.trace(dj @ inv @ dk)
    return FisherMatrix(la.hermitize(f), True)


def rld_value_state(state: StateFamilyPoint, w, rank_tol: float = la.RANK_TOL) -> float:
    """``Tr[W I_RLD]`` or ``inf`` when the weighted support condition fails."""
    w = _check_weight(w, state.n_params)
    if _support_violation(state.derivs, state.rho, w, rank_tol):
        return math.inf
    inv = la.support_pinv(state.rho, rank_tol)
    total = 0.0
    for j, dj in enumerate(state.derivs):
        for k, dk in enumerate(state.derivs):
            if w[k, j] != 0:
                total += w[k, j] * np.trace(dj @ inv @ dk).real
    return max(float(total), 0.0)


def rld_finiteness_channel(
    channel: ChannelFamilyPoint, w, rank_tol: float = la.RANK_TOL
) -> bool:
    w = _check_weight(w, channel.n_params)
    return not _support_violation(channel.derivs, channel.choi, w, rank_tol)


def traced_block(
    channel: ChannelFamilyPoint, j: int, k: int, rank_tol: float = la.RANK_TOL
) -> np.ndarray:
    """``Tr_B[(d_j Gamma) Gamma^-1 (d_k Gamma)]`` as a ``d_A x d_A`` matrix."""
    inv = la.support_pinv(channel.choi, rank_tol)
    prod = channel.derivs[j] @ inv @ channel.derivs[k]
    return la.partial_trace(prod, channel.dim_in, channel.dim_out, "right")


def traced_blocks(channel: ChannelFamilyPoint, rank_tol: float = la.RANK_TOL) -> dict:
    inv = la.support_pinv(channel.choi, rank_tol)
    out = {}
    for j, dj in enumerate(channel.derivs):
        for k, dk in enumerate(channel.derivs):
            out[j, k] = la.partial_trace(
                dj @ inv @ dk, channel.dim_in, channel.dim_out, "right"
            )
    return out


def weighted_traced_operator(
    channel: ChannelFamilyPoint, w, rank_tol: float = la.RANK_TOL
) -> np.ndarray:
    """``sum_{j,k} <k|W|j> Tr_B[(d_j Gamma) Gamma^-1 (d_k Gamma)]``, Hermitized."""
    w = _check_weight(w, channel.n_params)
    blocks = traced_blocks(channel, rank_tol)
    out = np.zeros((channel.dim_in, channel.dim_in), dtype=complex)
    for (j, k), b in blocks.items():
        out += w[k, j] * b
    return la.hermitize(out)


def rld_value_channel(
    channel: ChannelFamilyPoint, w, rank_tol: float = la.RANK_TOL
) -> float:
    w = _check_weight(w, channel.n_params)
    if _support_violation(channel.derivs, channel.choi, w, rank_tol):
        return math.inf
    return max(la.inf_norm_psd(weighted_traced_operator(channel, w, rank_tol)), 0.0)


def rld_value_channel_single(
    channel: ChannelFamilyPoint, rank_tol: float = la.RANK_TOL
) -> float:
    if channel.n_params != 1:
        raise ValueError(
            f"single-parameter value needs D=1, family has D={channel.n_params}"
        )
    return rld_value_channel(channel, np.eye(1), rank_tol)
