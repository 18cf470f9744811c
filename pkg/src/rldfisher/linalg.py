"""Dense complex Hermitian linear algebra used throughout the package.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  Tensor
factors are ordered row-major: the basis index of ``A (x) B`` is
``i_left * dim_right + i_right``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

RANK_TOL = 1e-10
HERM_TOL = 1e-12


class NotHermitianError(ValueError):
    pass


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermitian_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def is_hermitian(m, tol: float = HERM_TOL) -> bool:
    m = np.asarray(m)
    scale = 1.0 + (float(np.max(np.abs(m))) if m.size else 0.0)
    return hermitian_defect(m) <= tol * scale


def hermitize(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + m.conj().T)


def _checked(h, tol: float = 1e-10) -> np.ndarray:
    # Results of products like X Y^-1 X carry roundoff well above HERM_TOL,
    # so the public operations accept a looser defect and then symmetrize.
    h = as_matrix(h)
    if not is_hermitian(h, tol):
        raise NotHermitianError(
            f"matrix is not Hermitian (defect {hermitian_defect(h):.3e})"
        )
    return hermitize(h)


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(
    m, dim_left: int, dim_right: int, which: Literal["left", "right"] = "right"
) -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    ``which="right"`` keeps the left factor and vice versa.
    """
    m = np.asarray(m, dtype=complex)
    n = dim_left * dim_right
    if m.shape != (n, n):
        raise ValueError(
            f"matrix of shape {m.shape} does not match dims {dim_left}x{dim_right}"
        )
    t = m.reshape(dim_left, dim_right, dim_left, dim_right)
    which = which.lower()
    if which == "right":
        return np.einsum("ibjb->ij", t)
    if which == "left":
        return np.einsum("aiaj->ij", t)
    raise ValueError(f"which must be 'left' or 'right', not {which!r}")


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in descending order and the matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def eig_hermitian(h) -> Spectrum:
    h = _checked(h)
    w, v = np.linalg.eigh(h)
    order = np.argsort(w)[::-1]
    return Spectrum(eigenvalues=w[order], eigenvectors=v[:, order])


def _support_split(h, rank_tol: float):
    spec = eig_hermitian(h)
    lam = spec.eigenvalues
    lam_max = lam[0] if lam.size else 0.0
    cutoff = rank_tol * max(lam_max, 0.0)
    keep = lam > cutoff
    if lam_max <= 0.0:
        keep = np.zeros_like(lam, dtype=bool)
    return spec, keep


def support_pinv(h, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Inverse of a PSD matrix restricted to its support.

    Eigenvalues at or below ``rank_tol * lambda_max`` are treated as zero.
    """
    spec, keep = _support_split(h, rank_tol)
    v = spec.eigenvectors[:, keep]
    return hermitize((v / spec.eigenvalues[keep]) @ v.conj().T)


def support_projector(h, rank_tol: float = RANK_TOL) -> np.ndarray:
    spec, keep = _support_split(h, rank_tol)
    v = spec.eigenvectors[:, keep]
    return hermitize(v @ v.conj().T)


def kernel_projector(h, rank_tol: float = RANK_TOL) -> np.ndarray:
    spec, keep = _support_split(h, rank_tol)
    v = spec.eigenvectors[:, ~keep]
    return hermitize(v @ v.conj().T)


def inf_norm_psd(h) -> float:
    """Operator norm of a PSD matrix, i.e. its largest eigenvalue."""
    h = _checked(h)
    if h.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(h)[-1])


def min_eigenvalue(h) -> float:
    return float(np.linalg.eigvalsh(_checked(h))[0])


def is_psd(h, tol: float = 1e-10) -> bool:
    h = as_matrix(h)
    if not is_hermitian(h, 1e-10):
        return False
    lam = np.linalg.eigvalsh(hermitize(h))
    return bool(lam[0] >= -tol * max(1.0, abs(lam[-1])))


def op_norm(m) -> float:
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def ket(*amps) -> np.ndarray:
    return np.asarray(amps, dtype=complex).reshape(-1, 1)


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1, 1)
    return v @ v.conj().T


def max_entangled(d: int) -> np.ndarray:
    """Unnormalized vector sum_i |i>|i>."""
    return np.eye(d, dtype=complex).reshape(d * d, 1)
