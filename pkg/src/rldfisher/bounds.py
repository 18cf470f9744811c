"""Cramer-Rao bounds from RLD values and numerical checks of the chain rule,
amortization collapse and sequential bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import linalg as la
from .families import (
    ChannelFamilyPoint,
    StateFamilyPoint,
    apply_choi,
    normalize_weight,
    push_through_channel,
    reduced_input,
)
from .rld import (
    _check_weight,
    rld_finiteness_channel,
    rld_matrix_state,
    rld_value_channel,
    rld_value_channel_single,
    rld_value_state,
    traced_blocks,
)


class Verdict(str, Enum):
    SHOT_NOISE_LIMITED = "ShotNoiseLimited"
    INCONCLUSIVE = "Inconclusive"


def _reciprocal(x: float) -> float:
    if x == 0:
        return math.inf
    if math.isinf(x):
        return 0.0
    return 1.0 / x


@dataclass(frozen=True)
class CrbReport:
    """Lower bound on ``Tr[W' Cov]`` for the unit-trace weight ``W' = W / weight_scale``."""

    n: int
    fisher_value: float
    bound: float
    weight_scale: float = 1.0

    @property
    def unnormalized_bound(self) -> float:
        """Bound on ``Tr[W Cov]`` for the weight as supplied."""
        return self.weight_scale * self.bound


def _report(n, value, scale=1.0) -> CrbReport:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"number of uses must be a positive integer, got {n!r}")
    n = int(n)
    return CrbReport(n, value, _reciprocal(n * value), scale)


def crb_state_multi(n: int, state: StateFamilyPoint, w) -> CrbReport:
    w1, scale = normalize_weight(_check_weight(w, state.n_params))
    return _report(n, rld_value_state(state, w1), scale)


def crb_channel_single(n: int, channel: ChannelFamilyPoint) -> CrbReport:
    return _report(n, rld_value_channel_single(channel))


def crb_channel_multi(n: int, channel: ChannelFamilyPoint, w) -> CrbReport:
    w1, scale = normalize_weight(_check_weight(w, channel.n_params))
    return _report(n, rld_value_channel(channel, w1), scale)


def heisenberg_verdict(channel: ChannelFamilyPoint, w=None, rank_tol: float = la.RANK_TOL) -> Verdict:
    """Shot-noise limited whenever the RLD value is finite; otherwise the bound is silent."""
    if w is None:
        w = np.eye(channel.n_params) / channel.n_params
    if rld_finiteness_channel(channel, w, rank_tol):
        return Verdict.SHOT_NOISE_LIMITED
    return Verdict.INCONCLUSIVE


def _finite_values(channel, state, w):
    out_state = push_through_channel(state, channel)
    vals = (
        rld_value_channel(channel, w),
        rld_value_state(state, w),
        rld_value_state(out_state, w),
    )
    if any(math.isinf(v) for v in vals):
        raise ValueError(
            "an RLD value in the chain rule is infinite; check the finiteness "
            "conditions of the channel and state families first"
        )
    return vals


def chain_rule_slack(channel: ChannelFamilyPoint, state: StateFamilyPoint, w) -> float:
    """``I(N) + I(rho) - I(N(rho))`` for the weighted RLD values; non-negative in theory."""
    i_ch, i_in, i_out = _finite_values(channel, state, w)
    return i_ch + i_in - i_out


def chain_rule_matrix_gap(channel: ChannelFamilyPoint, state: StateFamilyPoint) -> float:
    """Smallest eigenvalue of the D x D operator chain-rule difference.

    The difference is ``sum_jk |j><k| Tr[rho_S^T B_jk] + I(rho) - I(N(rho))``
    with ``B_jk = Tr_B[(d_j Gamma) Gamma^-1 (d_k Gamma)]`` and ``I`` the RLD matrix.
    """
    out_state = push_through_channel(state, channel)
    f_in = rld_matrix_state(state)
    f_out = rld_matrix_state(out_state)
    if not (f_in.finite and f_out.finite) or not rld_finiteness_channel(
        channel, np.eye(channel.n_params)
    ):
        raise ValueError("operator chain rule needs finite RLD matrices")
    rho_s = reduced_input(state, channel.dim_in)
    blocks = traced_blocks(channel)
    D = channel.n_params
    t = np.empty((D, D), dtype=complex)
    for j in range(D):
        for k in range(D):
            t[j, k] = np.trace(rho_s.T @ blocks[j, k])
    diff = la.hermitize(t + f_in.entries - f_out.entries)
    return la.min_eigenvalue(diff)


def amortized_gain(channel: ChannelFamilyPoint, state: StateFamilyPoint, w) -> float:
    """``I(N(rho)) - I(rho)``; never more than ``I(N)`` by the chain rule."""
    _, i_in, i_out = _finite_values(channel, state, w)
    return i_out - i_in


@dataclass(frozen=True, eq=False)
class SequentialProtocol:
    """``n`` channel uses separated by parameter-free interleavers.

    ``initial`` lives on memory (x) A.  Interleaver i maps
    memory (x) B -> memory' (x) A and is given as a constant channel family.
    """

    n: int
    initial: StateFamilyPoint
    interleavers: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "interleavers", tuple(self.interleavers))
        if self.n < 1:
            raise ValueError("a sequential protocol needs at least one channel use")
        if len(self.interleavers) != self.n - 1:
            raise ValueError(
                f"{self.n} uses need {self.n - 1} interleavers, got {len(self.interleavers)}"
            )
        if any(np.any(d) for d in self.initial.derivs):
            raise ValueError("initial state must be parameter-free")
        for i, s in enumerate(self.interleavers):
            if any(np.any(d) for d in s.derivs):
                raise ValueError(f"interleaver {i} depends on the parameters")


def sequential_final_state(protocol: SequentialProtocol, channel: ChannelFamilyPoint) -> StateFamilyPoint:
    D = channel.n_params
    state = StateFamilyPoint.constant(protocol.initial.rho, D)
    for step in range(protocol.n):
        if state.dim % channel.dim_in:
            raise ValueError(
                f"state of dimension {state.dim} cannot feed a channel with input dimension "
                f"{channel.dim_in} at use {step + 1}"
            )
        state = push_through_channel(state, channel)
        if step < protocol.n - 1:
            s = protocol.interleavers[step]
            if s.dim_in != state.dim:
                raise ValueError(
                    f"interleaver {step} expects dimension {s.dim_in}, state has {state.dim}"
                )
            if s.dim_out % channel.dim_in:
                raise ValueError(f"interleaver {step} output does not end in the channel input")
            rho = apply_choi(s.choi, state.rho, s.dim_in, s.dim_out)
            derivs = tuple(apply_choi(s.choi, d, s.dim_in, s.dim_out) for d in state.derivs)
            state = StateFamilyPoint(rho, derivs)
    return state


def sequential_fi(protocol: SequentialProtocol, channel: ChannelFamilyPoint, w) -> float:
    """RLD value of the final state; bounded by ``n * I(N)``."""
    return rld_value_state(sequential_final_state(protocol, channel), w)


def tensor_channel(a: ChannelFamilyPoint, b: ChannelFamilyPoint) -> ChannelFamilyPoint:
    """``N_a (x) N_b`` with product-rule derivatives; Choi ordered (A1 A2)(B1 B2)."""
    if a.n_params != b.n_params:
        raise ValueError("tensor factors must share the parameter vector")
    a1, b1, a2, b2 = a.dim_in, a.dim_out, b.dim_in, b.dim_out

    def reorder(m):
        t = m.reshape(a1, b1, a2, b2, a1, b1, a2, b2).transpose(0, 2, 1, 3, 4, 6, 5, 7)
        return t.reshape(a1 * a2 * b1 * b2, -1)

    choi = reorder(np.kron(a.choi, b.choi))
    derivs = tuple(
        reorder(np.kron(da, b.choi) + np.kron(a.choi, db)) for da, db in zip(a.derivs, b.derivs)
    )
    return ChannelFamilyPoint(choi, derivs, a1 * a2, b1 * b2, a.theta)


def parallel_additivity(channel: ChannelFamilyPoint, w) -> tuple[float, float]:
    """``(I(N (x) N), 2 I(N))``; the first never exceeds the second."""
    return rld_value_channel(tensor_channel(channel, channel), w), 2 * rld_value_channel(channel, w)
