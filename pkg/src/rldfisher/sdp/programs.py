"""Primal and dual semidefinite programs for RLD Fisher information values."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import linalg as la
from ..families import ChannelFamilyPoint, StateFamilyPoint
from ..rld import _check_weight, rld_finiteness_channel, rld_finiteness_state
from ..rld import rld_value_channel, rld_value_state
from .solver import LmiBuilder, SdpProblem, SdpSolution, Status, solve_sdp

PERTURB_REL = 1e-9


def _stacked(derivs) -> np.ndarray:
    # sum_j |j> (x) d_j, shape (D*n, n)
    return np.vstack(derivs)


def _regularized(y: np.ndarray, meta: dict) -> np.ndarray:
    lam = np.linalg.eigvalsh(y)
    top = max(lam[-1], 0.0)
    eps = PERTURB_REL * top
    if lam[0] <= eps:
        meta["perturbation"] = eps
        return y + eps * np.eye(y.shape[0])
    meta["perturbation"] = 0.0
    return y


def build_state_primal(state: StateFamilyPoint, w) -> SdpProblem:
    """inf Tr[(W (x) I) M]  s.t.  [[M, K], [K^dag, rho]] >= 0,  K = sum_j |j> (x) d_j rho."""
    D, d = state.n_params, state.dim
    w = _check_weight(w, D)
    meta = {"program": "state-primal"}
    rho = _regularized(state.rho, meta)
    K = _stacked(state.derivs)
    WI = np.kron(w, np.eye(d))
    b = LmiBuilder()
    b.hermitian("M", D * d)
    return b.build(
        "min",
        lambda v: np.trace(WI @ v["M"]).real,
        [("schur", lambda v: np.block([[v["M"], K], [K.conj().T, rho]]))],
        meta,
    )


def build_state_dual(state: StateFamilyPoint, w) -> SdpProblem:
    """sup 2 Re Tr[Q K] - Tr[R rho]  s.t.  P <= W (x) I,  [[P, Q^dag], [Q, R]] >= 0."""
    D, d = state.n_params, state.dim
    w = _check_weight(w, D)
    meta = {"program": "state-dual"}
    rho = _regularized(state.rho, meta)
    K = _stacked(state.derivs)
    WI = np.kron(w, np.eye(d)).astype(complex)
    b = LmiBuilder()
    b.hermitian("P", D * d)
    b.complex("Q", d, D * d)
    b.hermitian("R", d)
    return b.build(
        "max",
        lambda v: 2 * np.trace(v["Q"] @ K).real - np.trace(v["R"] @ rho).real,
        [
            ("weight", lambda v: WI - v["P"]),
            ("schur", lambda v: np.block([[v["P"], v["Q"].conj().T], [v["Q"], v["R"]]])),
        ],
        meta,
    )


def _traced_weighted(M, w, D, da, db):
    # Tr_FB[(W (x) I_RB) M] for M on F (x) R (x) B
    m = M.reshape(D, da, db, D, da, db)
    return np.einsum("fg,grbfsb->rs", w, m)


def build_channel_primal(channel: ChannelFamilyPoint, w) -> SdpProblem:
    """inf lambda  s.t.  lambda I_R >= Tr_FB[(W (x) I) M],  [[M, K], [K^dag, Gamma]] >= 0."""
    D, da, db = channel.n_params, channel.dim_in, channel.dim_out
    w = _check_weight(w, D)
    meta = {"program": "channel-primal"}
    gamma = _regularized(channel.choi, meta)
    K = _stacked(channel.derivs)
    n = D * da * db
    b = LmiBuilder()
    b.scalar("lam")
    b.hermitian("M", n)
    eye = np.eye(da)
    return b.build(
        "min",
        lambda v: v["lam"],
        [
            ("norm", lambda v: v["lam"] * eye - _traced_weighted(v["M"], w, D, da, db)),
            ("schur", lambda v: np.block([[v["M"], K], [K.conj().T, gamma]])),
        ],
        meta,
    )


def build_channel_dual(channel: ChannelFamilyPoint, w) -> SdpProblem:
    """sup 2 Re Tr[Z K] - Tr[Q Gamma]  s.t.  Tr rho_R <= 1, rho_R >= 0,
    P <= W (x) rho_R (x) I_B,  [[P, Z^dag], [Z, Q]] >= 0."""
    D, da, db = channel.n_params, channel.dim_in, channel.dim_out
    w = _check_weight(w, D)
    meta = {"program": "channel-dual"}
    gamma = _regularized(channel.choi, meta)
    K = _stacked(channel.derivs)
    n = D * da * db
    b = LmiBuilder()
    b.hermitian("rho_R", da)
    b.hermitian("P", n)
    b.complex("Z", da * db, n)
    b.hermitian("Q", da * db)
    eye_b = np.eye(db)
    return b.build(
        "max",
        lambda v: 2 * np.trace(v["Z"] @ K).real - np.trace(v["Q"] @ gamma).real,
        [
            ("trace", lambda v: np.array([[1.0 - np.trace(v["rho_R"]).real]])),
            ("state", lambda v: v["rho_R"]),
            ("weight", lambda v: np.kron(w, np.kron(v["rho_R"], eye_b)) - v["P"]),
            ("schur", lambda v: np.block([[v["P"], v["Z"].conj().T], [v["Z"], v["Q"]]])),
        ],
        meta,
    )


def schur_residual_min_eig(problem: SdpProblem, solution: SdpSolution) -> float:
    """Minimum eigenvalue of M - K^dag-side Schur complement at a primal point."""
    blk = problem.lmi_values(solution.x)[-1]
    n = solution.primal_point["M"].shape[0]
    M, K, Y = blk[:n, :n], blk[:n, n:], blk[n:, n:]
    return la.min_eigenvalue(la.hermitize(M - K @ np.linalg.solve(Y, K.conj().T)))


@dataclass(frozen=True)
class CrossCheckReport:
    kind: str  # "state" or "channel"
    verdict: str  # "Finite" or "Infinite"
    closed_form: float
    primal: float
    dual: float
    primal_gap: float
    dual_gap: float
    deviation: float
    tol: float
    primal_status: str = ""
    dual_status: str = ""

    @property
    def passed(self) -> bool:
        return (
            self.verdict == "Finite"
            and Status.INFEASIBLE.value not in (self.primal_status, self.dual_status)
            and self.deviation <= self.tol
        )

    @property
    def max_gap(self) -> float:
        return max(self.primal_gap, self.dual_gap)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1.0)


def cross_check(
    family,
    w,
    tol: float = 1e-5,
    rank_tol: float = la.RANK_TOL,
    gap_tol: float = 1e-9,
    feas_tol: float = 1e-9,
    max_iter: int = 200,
) -> CrossCheckReport:
    """Compare the closed form with the primal and dual programs.

    The deviation is the largest pairwise ``|a - b| / max(|a|, |b|, 1)``.
    When the support condition fails the programs are skipped.  The dual
    program has a non-unique optimal P, so its own solve may stop at MaxIter
    slightly short of ``gap_tol``; agreement of values decides the verdict.
    """
    if isinstance(family, ChannelFamilyPoint):
        kind = "channel"
        finite = rld_finiteness_channel(family, w, rank_tol)
        closed = rld_value_channel if finite else None
        primal_b, dual_b = build_channel_primal, build_channel_dual
    elif isinstance(family, StateFamilyPoint):
        kind = "state"
        finite = rld_finiteness_state(family, w, rank_tol)
        closed = rld_value_state if finite else None
        primal_b, dual_b = build_state_primal, build_state_dual
    else:
        raise TypeError("cross_check expects a StateFamilyPoint or ChannelFamilyPoint")
    if not finite:
        inf = math.inf
        return CrossCheckReport(kind, "Infinite", inf, math.nan, math.nan, math.nan, math.nan, math.nan, tol)
    cf = closed(family, w, rank_tol)
    opts = dict(max_iter=max_iter, gap_tol=gap_tol, feas_tol=feas_tol)
    ps = solve_sdp(primal_b(family, w), **opts)
    ds = solve_sdp(dual_b(family, w), **opts)
    vals = (cf, ps.primal_value, ds.primal_value)
    dev = max(_rel(a, b) for i, a in enumerate(vals) for b in vals[i + 1 :])
    return CrossCheckReport(
        kind,
        "Finite",
        cf,
        ps.primal_value,
        ds.primal_value,
        ps.gap,
        ds.gap,
        dev,
        tol,
        ps.status.value,
        ds.status.value,
    )
