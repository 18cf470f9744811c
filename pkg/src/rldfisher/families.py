"""Differentiable state and channel families evaluated at one parameter point.

A family is carried as its value at theta together with the D partial
derivatives.  Channels are stored through their Choi operator
``sum_ij |i><j| (x) N(|i><j|)`` with the reference factor first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import linalg as la


@dataclass(frozen=True, eq=False)
class StateFamilyPoint:
    """Density operator ``rho`` and its derivatives ``derivs[j] = d rho / d theta_j``."""

    rho: np.ndarray
    derivs: tuple
    theta: tuple = field(default=())

    def __post_init__(self):
        rho = la.as_matrix(self.rho)
        derivs = tuple(la.as_matrix(d) for d in self.derivs)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "derivs", derivs)
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))
        if not derivs:
            raise ValueError("a family needs at least one parameter derivative")
        for d in derivs:
            if d.shape != rho.shape:
                raise ValueError("derivative shape does not match the state")
        if abs(np.trace(rho) - 1.0) > 1e-10:
            raise ValueError(f"state has trace {np.trace(rho).real:.12g}, expected 1")
        if not la.is_hermitian(rho, 1e-10) or la.min_eigenvalue(rho) < -1e-10:
            raise ValueError("state is not positive semidefinite")
        for j, d in enumerate(derivs):
            if not la.is_hermitian(d, 1e-10):
                raise ValueError(f"derivative {j} is not Hermitian")
            if abs(np.trace(d)) > 1e-8:
                raise ValueError(f"derivative {j} is not traceless")

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def n_params(self) -> int:
        return len(self.derivs)

    @classmethod
    def constant(cls, rho, n_params: int = 1) -> "StateFamilyPoint":
        rho = la.as_matrix(rho)
        return cls(rho, tuple(np.zeros_like(rho) for _ in range(n_params)))

    @classmethod
    def from_pure(cls, psi, dpsi: Sequence) -> "StateFamilyPoint":
        """Pure-state family from a unit vector and its derivative vectors."""
        psi = np.asarray(psi, dtype=complex).reshape(-1, 1)
        derivs = []
        for dp in dpsi:
            dp = np.asarray(dp, dtype=complex).reshape(-1, 1)
            derivs.append(dp @ psi.conj().T + psi @ dp.conj().T)
        return cls(psi @ psi.conj().T, tuple(derivs))


@dataclass(frozen=True, eq=False)
class ChannelFamilyPoint:
    """Choi operator of ``N_theta: A -> B`` and its parameter derivatives."""

    choi: np.ndarray
    derivs: tuple
    dim_in: int
    dim_out: int
    theta: tuple = field(default=())

    def __post_init__(self):
        choi = la.as_matrix(self.choi)
        derivs = tuple(la.as_matrix(d) for d in self.derivs)
        object.__setattr__(self, "choi", choi)
        object.__setattr__(self, "derivs", derivs)
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))
        n = self.dim_in * self.dim_out
        if choi.shape != (n, n):
            raise ValueError(
                f"Choi matrix of shape {choi.shape} does not match "
                f"dims {self.dim_in}->{self.dim_out}"
            )
        if not derivs:
            raise ValueError("a family needs at least one parameter derivative")
        if not la.is_hermitian(choi, 1e-10) or la.min_eigenvalue(choi) < -1e-10:
            raise ValueError("Choi matrix is not positive semidefinite")
        tp = la.partial_trace(choi, self.dim_in, self.dim_out, "right")
        resid = np.max(np.abs(tp - np.eye(self.dim_in)))
        if resid > 1e-9:
            raise ValueError(f"channel is not trace preserving (residual {resid:.3e})")
        for j, d in enumerate(derivs):
            if d.shape != choi.shape:
                raise ValueError("derivative shape does not match the Choi matrix")
            if not la.is_hermitian(d, 1e-10):
                raise ValueError(f"derivative {j} is not Hermitian")
            r = np.max(np.abs(la.partial_trace(d, self.dim_in, self.dim_out, "right")))
            if r > 1e-8:
                raise ValueError(f"derivative {j} breaks trace preservation ({r:.3e})")

    @property
    def n_params(self) -> int:
        return len(self.derivs)

    @classmethod
    def constant(cls, choi, dim_in: int, dim_out: int, n_params: int = 1):
        choi = la.as_matrix(choi)
        zeros = tuple(np.zeros_like(choi) for _ in range(n_params))
        return cls(choi, zeros, dim_in, dim_out)

    @classmethod
    def from_kraus(cls, kraus, dkraus=None, theta=()):
        """Build from a Kraus set and, per parameter, the Kraus derivatives.

        ``dkraus[j][k]`` is the derivative of ``kraus[k]`` along parameter j.
        With ``dkraus=None`` the family is constant in one parameter.
        """
        kraus = [np.asarray(k, dtype=complex) for k in kraus]
        d_out, d_in = kraus[0].shape
        choi = choi_from_kraus(kraus)
        if dkraus is None:
            derivs = (np.zeros_like(choi),)
        else:
            derivs = tuple(choi_derivative_from_kraus(kraus, dk) for dk in dkraus)
        return cls(choi, derivs, d_in, d_out, theta)


def _kraus_vec(k: np.ndarray) -> np.ndarray:
    # |K>> = sum_i |i> (x) K|i>, row-major (input index first)
    return k.T.reshape(-1, 1)


def choi_from_kraus(kraus) -> np.ndarray:
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    if not kraus:
        raise ValueError("empty Kraus set")
    d_out, d_in = kraus[0].shape
    for k in kraus:
        if k.shape != (d_out, d_in):
            raise ValueError("Kraus operators have inconsistent shapes")
    completeness = sum(k.conj().T @ k for k in kraus)
    resid = la.op_norm(completeness - np.eye(d_in))
    if resid > 1e-9:
        raise ValueError(
            f"Kraus set is not trace preserving: ||sum K^dag K - I|| = {resid:.3e}"
        )
    vecs = [_kraus_vec(k) for k in kraus]
    return la.hermitize(sum(v @ v.conj().T for v in vecs))


def choi_derivative_from_kraus(kraus, dkraus) -> np.ndarray:
    """Product rule: d Gamma = sum_k |dK_k>><<K_k| + |K_k>><<dK_k|."""
    out = 0
    for k, dk in zip(kraus, dkraus, strict=True):
        v, dv = _kraus_vec(np.asarray(k, dtype=complex)), _kraus_vec(
            np.asarray(dk, dtype=complex)
        )
        out = out + dv @ v.conj().T + v @ dv.conj().T
    return la.hermitize(out)


def apply_choi(choi, rho, dim_in: int, dim_out: int) -> np.ndarray:
    """Apply ``id_R (x) N`` to ``rho`` on R (x) A, where N is given by its Choi matrix.

    Linear in both arguments, so it also maps derivatives.
    """
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    if d % dim_in:
        raise ValueError(f"state dimension {d} is not a multiple of input dim {dim_in}")
    d_ref = d // dim_in
    r = rho.reshape(d_ref, dim_in, d_ref, dim_in)
    g = np.asarray(choi, dtype=complex).reshape(dim_in, dim_out, dim_in, dim_out)
    out = np.einsum("rasc,abcd->rbsd", r, g, optimize=True)
    return la.hermitize(out.reshape(d_ref * dim_out, d_ref * dim_out))


def push_through_channel(
    state: StateFamilyPoint, channel: ChannelFamilyPoint
) -> StateFamilyPoint:
    """Output family of ``id_R (x) N_theta`` acting on the last tensor factor."""
    if state.n_params != channel.n_params:
        raise ValueError(
            f"state has {state.n_params} parameters but channel has {channel.n_params}"
        )
    if state.dim % channel.dim_in:
        raise ValueError(
            f"state dimension {state.dim} is incompatible with channel input "
            f"dimension {channel.dim_in}"
        )
    di, do = channel.dim_in, channel.dim_out
    rho = apply_choi(channel.choi, state.rho, di, do)
    derivs = tuple(
        apply_choi(channel.choi, dr, di, do) + apply_choi(dg, state.rho, di, do)
        for dr, dg in zip(state.derivs, channel.derivs)
    )
    return StateFamilyPoint(rho, derivs, state.theta or channel.theta)


def reduced_input(state: StateFamilyPoint, dim_in: int) -> np.ndarray:
    """Marginal of the state on its last factor of dimension ``dim_in``."""
    return la.partial_trace(state.rho, state.dim // dim_in, dim_in, "left")


def finite_diff_point(
    evaluator: Callable[[np.ndarray], np.ndarray], theta, h: float = 1e-5
) -> list:
    """Central differences ``(M(theta + h e_j) - M(theta - h e_j)) / 2h``, Hermitized."""
    if h <= 0:
        raise ValueError("step h must be positive")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    out = []
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = h
        diff = (np.asarray(evaluator(theta + e)) - np.asarray(evaluator(theta - e))) / (
            2 * h
        )
        out.append(la.hermitize(diff))
    return out


def validate_weight(w, require_unit_trace: bool = False) -> np.ndarray:
    w = np.atleast_2d(np.asarray(w, dtype=float))
    if w.shape[0] != w.shape[1]:
        raise ValueError(f"weight matrix must be square, got {w.shape}")
    if np.max(np.abs(w - w.T), initial=0.0) > 1e-12 * (1 + np.max(np.abs(w))):
        raise ValueError("weight matrix must be symmetric")
    lam = np.linalg.eigvalsh(w)
    if lam.size and lam[0] < -1e-12:
        raise ValueError(f"weight matrix has negative eigenvalue {lam[0]:.6g}")
    if require_unit_trace and abs(np.trace(w) - 1.0) > 1e-10:
        raise ValueError(f"weight matrix has trace {np.trace(w):.12g}, expected 1")
    return w


def normalize_weight(w) -> tuple[np.ndarray, float]:
    """Return ``(W / Tr W, Tr W)``."""
    w = validate_weight(w)
    tr = float(np.trace(w))
    if tr <= 0:
        raise ValueError("weight matrix has zero trace and cannot be normalized")
    return w / tr, tr
