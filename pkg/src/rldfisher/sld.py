"""SLD operators, the SLD Fisher matrix, the Helstrom bound and probe optimization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg as la
from .families import ChannelFamilyPoint, StateFamilyPoint, push_through_channel, validate_weight
from .rld import FisherMatrix

PROBE_GRID = 201
PROBE_DELTA = 1e-4
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class SldSet:
    operators: tuple
    rank_tol: float


@dataclass(frozen=True, eq=False)
class SldFisherMatrix(FisherMatrix):
    # largest |Im Tr[rho L_j L_k]| dropped when keeping the Hermitian part
    max_discarded_imag: float = 0.0


def _pair_mask(lam, rank_tol):
    s = lam[:, None] + lam[None, :]
    return s, s > rank_tol * max(lam.max(initial=0.0), 0.0)


def sld_operators(state: StateFamilyPoint, rank_tol: float = la.RANK_TOL) -> SldSet:
    spec = la.eig_hermitian(state.rho)
    v = spec.eigenvectors
    s, mask = _pair_mask(spec.eigenvalues, rank_tol)
    ops = []
    for d in state.derivs:
        dd = v.conj().T @ d @ v
        core = np.zeros_like(dd)
        core[mask] = 2.0 * dd[mask] / s[mask]
        ops.append(la.hermitize(v @ core @ v.conj().T))
    return SldSet(tuple(ops), rank_tol)


def sld_residual(state: StateFamilyPoint, slds: SldSet) -> float:
    """Largest defining-equation residual, ignoring the kernel-kernel block of rho."""
    spec = la.eig_hermitian(state.rho)
    v = spec.eigenvectors
    _, mask = _pair_mask(spec.eigenvalues, slds.rank_tol)
    worst = 0.0
    for d, L in zip(state.derivs, slds.operators):
        r = d - 0.5 * (state.rho @ L + L @ state.rho)
        rr = v.conj().T @ r @ v
        rr[~mask] = 0.0
        worst = max(worst, la.op_norm(rr))
    return worst


def sld_matrix(state: StateFamilyPoint, rank_tol: float = la.RANK_TOL) -> SldFisherMatrix:
    ops = sld_operators(state, rank_tol).operators
    D = len(ops)
    raw = np.empty((D, D), dtype=complex)
    for j in range(D):
        for k in range(D):
            raw[j, k] = np.trace(state.rho @ ops[j] @ ops[k])
    herm = 0.5 * (raw + raw.conj().T)
    return SldFisherMatrix(
        herm.real.astype(complex),
        True,
        float(np.max(np.abs(herm.imag), initial=0.0)),
    )


def helstrom_value(state: StateFamilyPoint, w, rank_tol: float = la.RANK_TOL) -> float:
    """``Tr[W F^-1]`` for the SLD Fisher matrix F; ``inf`` if F is singular."""
    w = validate_weight(w)
    f = sld_matrix(state, rank_tol).entries.real
    lam = np.linalg.eigvalsh(f)
    if lam[-1] <= 0 or lam[0] <= rank_tol * lam[-1]:
        return math.inf
    return max(float(np.trace(w @ np.linalg.inv(f))), 0.0)


def entangled_probe(p: float, dim: int = 2) -> StateFamilyPoint:
    """Parameter-free ``sqrt(p)|00> + sqrt(1-p)|11>`` (qubit reference and input)."""
    psi = np.zeros(dim * dim, dtype=complex)
    psi[0] = math.sqrt(p)
    psi[dim * dim - 1] = math.sqrt(1.0 - p)
    return StateFamilyPoint.from_pure(psi, [np.zeros_like(psi)])


def _golden_min(f, a, b, tol=1e-10, max_iter=200):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def optimize_probe(
    channel: ChannelFamilyPoint,
    probe: Callable[[float], StateFamilyPoint] | None = None,
    w=None,
    grid_size: int = PROBE_GRID,
    delta: float = PROBE_DELTA,
    rank_tol: float = la.RANK_TOL,
) -> tuple[float, float]:
    """Minimize the Helstrom value of the channel output over a one-parameter probe.

    Uniform grid on ``[delta, 1 - delta]`` followed by golden-section search
    between the neighbours of the best grid point.  Returns ``(p_star, value)``.
    """
    if grid_size < 3:
        raise ValueError("grid_size must be at least 3")
    D = channel.n_params
    w = np.eye(D) / D if w is None else validate_weight(w)
    if probe is None:
        probe = lambda p: entangled_probe(p, channel.dim_in)  # noqa: E731

    def objective(p):
        base = probe(p)
        if base.n_params != D:
            base = StateFamilyPoint.constant(base.rho, D)
        return helstrom_value(push_through_channel(base, channel), w, rank_tol)

    grid = np.linspace(delta, 1.0 - delta, grid_size)
    values = np.array([objective(p) for p in grid])
    if not np.any(np.isfinite(values)):
        raise ValueError("Helstrom value is infinite for every probe on the grid")
    i = int(np.argmin(values))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid_size - 1)]
    p_star, v_star = _golden_min(objective, lo, hi)
    if values[i] < v_star:
        p_star, v_star = float(grid[i]), float(values[i])
    return float(p_star), float(v_star)
