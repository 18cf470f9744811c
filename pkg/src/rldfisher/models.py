"""Reference families: classical (diagonal) states, unitary phase, random instances."""

from __future__ import annotations

import numpy as np

from . import linalg as la
from .families import ChannelFamilyPoint, StateFamilyPoint, choi_from_kraus


def diagonal_family(p, dps, theta=()) -> StateFamilyPoint:
    """Diagonal state ``diag(p)`` with derivatives ``diag(dp_j)``."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
        raise ValueError("p must be a probability vector")
    derivs = []
    for dp in dps:
        dp = np.asarray(dp, dtype=float)
        if dp.shape != p.shape or abs(dp.sum()) > 1e-12:
            raise ValueError("each derivative must have the shape of p and sum to zero")
        derivs.append(np.diag(dp))
    return StateFamilyPoint(np.diag(p), tuple(derivs), theta)


def bernoulli_family(theta: float) -> StateFamilyPoint:
    if not 0.0 < theta < 1.0:
        raise ValueError(f"Bernoulli parameter theta={theta!r} must lie in (0, 1)")
    return diagonal_family([theta, 1 - theta], [[1.0, -1.0]], (theta,))


def trinomial_family(t1: float, t2: float) -> StateFamilyPoint:
    if t1 <= 0 or t2 <= 0 or t1 + t2 >= 1:
        raise ValueError("trinomial parameters need t1, t2 > 0 and t1 + t2 < 1")
    return diagonal_family(
        [t1, t2, 1 - t1 - t2], [[1.0, 0.0, -1.0], [0.0, 1.0, -1.0]], (t1, t2)
    )


def classical_fisher_matrix(p, dps) -> np.ndarray:
    """``sum_x dp_j(x) dp_k(x) / p(x)`` over the support of p."""
    p = np.asarray(p, dtype=float)
    d = np.asarray(dps, dtype=float)
    mask = p > 0
    return (d[:, mask] / p[mask]) @ d[:, mask].T


def unitary_phase_family(phi: float = 0.3) -> ChannelFamilyPoint:
    """Qubit phase rotation ``exp(-i phi Z / 2)``; rank-one Choi, infinite RLD value."""
    u = np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])
    du = np.diag([-0.5j * np.exp(-0.5j * phi), 0.5j * np.exp(0.5j * phi)])
    return ChannelFamilyPoint.from_kraus([u], [[du]], (phi,))


def identity_channel_family(dim: int = 2, n_params: int = 1) -> ChannelFamilyPoint:
    return ChannelFamilyPoint.constant(choi_from_kraus([np.eye(dim)]), dim, dim, n_params)


def replacement_channel(dim_in: int, sigma) -> ChannelFamilyPoint:
    """Discard the input and prepare ``sigma``; Choi ``I (x) sigma``."""
    sigma = la.as_matrix(sigma)
    return ChannelFamilyPoint.constant(
        np.kron(np.eye(dim_in), sigma), dim_in, sigma.shape[0]
    )


# random instances


def random_density(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    rho = g @ g.conj().T
    return la.hermitize(rho / np.trace(rho).real)


def random_traceless_hermitian(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = g + g.conj().T
    h -= np.trace(h).real / d * np.eye(d)
    return scale * h / la.op_norm(h)


def random_state_family(
    rng: np.random.Generator, d: int, n_params: int, scale: float = 0.1
) -> StateFamilyPoint:
    """Full-rank state with random traceless Hermitian derivatives of norm ``scale``."""
    rho = random_density(rng, d)
    return StateFamilyPoint(
        rho, tuple(random_traceless_hermitian(rng, d, scale) for _ in range(n_params))
    )


def random_kraus(rng: np.random.Generator, dim_in: int, dim_out: int, n_kraus: int | None = None):
    """Kraus operators of a random channel from a Haar-like isometry."""
    r = n_kraus or dim_in * dim_out
    g = rng.normal(size=(r * dim_out, dim_in)) + 1j * rng.normal(size=(r * dim_out, dim_in))
    q, _ = np.linalg.qr(g)
    return [q[i * dim_out : (i + 1) * dim_out] for i in range(r)]


def random_channel(rng: np.random.Generator, dim_in: int, dim_out: int, n_kraus: int | None = None):
    """Parameter-free random channel as a constant family."""
    choi = choi_from_kraus(random_kraus(rng, dim_in, dim_out, n_kraus))
    return ChannelFamilyPoint.constant(choi, dim_in, dim_out)


def random_channel_family(
    rng: np.random.Generator, dim_in: int, dim_out: int, n_params: int, magnitude: float = 0.1
) -> ChannelFamilyPoint:
    """Full-rank random Choi matrix with random trace-compatible derivatives.

    Each derivative is a Hermitian direction with ``Tr_B = 0`` and operator
    norm ``magnitude``.
    """
    choi = choi_from_kraus(random_kraus(rng, dim_in, dim_out))
    derivs = []
    for _ in range(n_params):
        g = rng.normal(size=choi.shape) + 1j * rng.normal(size=choi.shape)
        h = g + g.conj().T
        h -= np.kron(la.partial_trace(h, dim_in, dim_out, "right"), np.eye(dim_out) / dim_out)
        derivs.append(la.hermitize(magnitude * h / la.op_norm(h)))
    return ChannelFamilyPoint(choi, tuple(derivs), dim_in, dim_out)


def random_weight(rng: np.random.Generator, n_params: int) -> np.ndarray:
    g = rng.normal(size=(n_params, n_params))
    w = g @ g.T
    return w / np.trace(w)
