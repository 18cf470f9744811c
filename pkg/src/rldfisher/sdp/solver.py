"""Small dense primal-dual interior-point solver for complex Hermitian LMIs.

Problems are stated in linear-matrix-inequality form over a real vector x::

    minimize (or maximize)  c.x + offset
    subject to              F0_b + sum_i x_i F_ib  >= 0   for every block b

with Hermitian blocks.  The conic dual of the ``min`` form is::

    maximize  -sum_b Tr[F0_b Z_b] + offset
    subject to sum_b Tr[F_ib Z_b] = c_i,  Z_b >= 0

The solver runs an infeasible-start path-following method with the Nesterov-Todd
search direction and a Mehrotra predictor-corrector step, working directly
with complex matrices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg as spl


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    MAX_ITER = "MaxIter"


@dataclass(frozen=True)
class VarSpec:
    name: str
    kind: str  # "hermitian", "complex" or "scalar"
    shape: tuple
    start: int

    @property
    def size(self) -> int:
        if self.kind == "hermitian":
            return self.shape[0] ** 2
        if self.kind == "complex":
            return 2 * self.shape[0] * self.shape[1]
        return 1

    def unpack(self, x: np.ndarray):
        v = x[self.start : self.start + self.size]
        if self.kind == "scalar":
            return float(v[0])
        if self.kind == "complex":
            r, c = self.shape
            return v[: r * c].reshape(r, c) + 1j * v[r * c :].reshape(r, c)
        n = self.shape[0]
        h = np.diag(v[:n]).astype(complex)
        iu = np.triu_indices(n, 1)
        m = len(iu[0])
        h[iu] = v[n : n + m] + 1j * v[n + m :]
        h[iu[1], iu[0]] = v[n : n + m] - 1j * v[n + m :]
        return h


@dataclass(eq=False)
class LmiBlock:
    name: str
    const: np.ndarray  # (n, n)
    coeffs: np.ndarray  # (k, n, n)

    @property
    def size(self) -> int:
        return self.const.shape[0]


@dataclass(eq=False)
class SdpProblem:
    sense: str
    c: np.ndarray
    blocks: list
    variables: list
    offset: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', not {self.sense!r}")
        k = self.c.shape[0]
        for b in self.blocks:
            if b.size <= 0 or b.coeffs.shape != (k, b.size, b.size):
                raise ValueError(f"block {b.name!r} is malformed")
            for m in (b.const, *b.coeffs):
                if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12 * (
                    1 + np.max(np.abs(m), initial=0.0)
                ):
                    raise ValueError(f"block {b.name!r} has a non-Hermitian operator")

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    @property
    def block_dims(self) -> list:
        return [b.size for b in self.blocks]

    def unpack(self, x) -> dict:
        return {v.name: v.unpack(np.asarray(x, dtype=float)) for v in self.variables}

    def objective(self, x) -> float:
        return float(self.c @ x) + self.offset

    def lmi_values(self, x) -> list:
        return [b.const + np.tensordot(x, b.coeffs, axes=1) for b in self.blocks]

    def to_json(self) -> str:
        """Self-describing dump for cross-validation with external solvers."""

        def cm(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in m]

        return json.dumps(
            {
                "format": "lmi-v1",
                "sense": self.sense,
                "offset": self.offset,
                "objective": [float(v) for v in self.c],
                "variables": [
                    {"name": v.name, "kind": v.kind, "shape": list(v.shape), "start": v.start}
                    for v in self.variables
                ],
                "blocks": [
                    {
                        "name": b.name,
                        "dim": b.size,
                        "const": cm(b.const),
                        "coeffs": [cm(f) for f in b.coeffs],
                    }
                    for b in self.blocks
                ],
                "meta": {k: v for k, v in self.meta.items() if isinstance(v, (int, float, str))},
            }
        )


class LmiBuilder:
    """Collects named variables and affine block constraints into an SdpProblem.

    Objective and blocks are given as callables of the unpacked variable dict;
    they must be affine.  Coefficients are obtained by evaluating on the
    standard basis of the real parameter vector.
    """

    def __init__(self):
        self.variables: list[VarSpec] = []
        self._k = 0

    def _add(self, name, kind, shape):
        v = VarSpec(name, kind, tuple(shape), self._k)
        self.variables.append(v)
        self._k += v.size
        return v

    def hermitian(self, name: str, n: int) -> VarSpec:
        return self._add(name, "hermitian", (n, n))

    def complex(self, name: str, rows: int, cols: int) -> VarSpec:
        return self._add(name, "complex", (rows, cols))

    def scalar(self, name: str) -> VarSpec:
        return self._add(name, "scalar", ())

    def build(self, sense, objective, blocks, meta=None) -> SdpProblem:
        k = self._k

        def vals(x):
            return {v.name: v.unpack(x) for v in self.variables}

        x0 = np.zeros(k)
        v0 = vals(x0)
        offset = float(np.real(objective(v0)))
        consts = [np.asarray(f(v0), dtype=complex) for _, f in blocks]
        c = np.empty(k)
        coeffs = [np.empty((k,) + m.shape, dtype=complex) for m in consts]
        for i in range(k):
            e = np.zeros(k)
            e[i] = 1.0
            vi = vals(e)
            c[i] = float(np.real(objective(vi))) - offset
            for b, (_, f) in enumerate(blocks):
                coeffs[b][i] = np.asarray(f(vi), dtype=complex) - consts[b]
        lmi = [
            LmiBlock(name, 0.5 * (m + m.conj().T), co)
            for (name, _), m, co in zip(blocks, consts, coeffs)
        ]
        return SdpProblem(sense, c, lmi, list(self.variables), offset, dict(meta or {}))


@dataclass(eq=False)
class SdpSolution:
    status: Status
    sense: str
    primal_value: float
    dual_value: float
    x: np.ndarray
    primal_point: dict
    dual_point: list
    iterations: int
    primal_infeasibility: float
    dual_infeasibility: float
    certificate: np.ndarray | None = None

    @property
    def gap(self) -> float:
        return abs(self.primal_value - self.dual_value)

    @property
    def value(self) -> float:
        return self.primal_value


def _blockdiag(mats):
    return spl.block_diag(*mats).astype(complex) if mats else np.zeros((0, 0), complex)


def _herm(m):
    return 0.5 * (m + m.conj().T)


def _max_step(x, dx):
    try:
        L = np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        return 0.0
    linv = spl.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    m = _herm(linv @ dx @ linv.conj().T)
    lam = np.linalg.eigvalsh(m)[0]
    return np.inf if lam >= 0 else -1.0 / lam


def solve_sdp(
    problem: SdpProblem,
    max_iter: int = 200,
    gap_tol: float = 1e-8,
    feas_tol: float = 1e-8,
) -> SdpSolution:
    sign = 1.0 if problem.sense == "min" else -1.0
    k = problem.n_vars
    sizes = problem.block_dims
    N = sum(sizes)
    # standard form: max b.y s.t. C - sum y_i A_i = S >= 0 ; min <C,X> s.t. <A_i,X> = b_i
    C = _blockdiag([b.const for b in problem.blocks])
    A = np.empty((k, N, N), dtype=complex)
    for i in range(k):
        A[i] = -_blockdiag([b.coeffs[i] for b in problem.blocks])
    b = -sign * problem.c
    # scale variables to unit-norm operators and the data to unit size
    anorm = np.linalg.norm(A.reshape(k, -1), axis=1) if k else np.zeros(0)
    vscale = np.where(anorm > 0, anorm, 1.0)
    A = A / vscale[:, None, None]
    b = b / vscale
    sb = max(1.0, float(np.linalg.norm(b)))
    sc = max(1.0, float(np.linalg.norm(C)))
    b = b / sb
    C = C / sc
    Aconj = A.conj().reshape(k, -1)

    def op(M):  # <A_i, M> for all i
        return (Aconj @ M.reshape(-1)).real

    def adj(y):
        return np.tensordot(y, A, axes=1)

    normb = 1.0 + np.linalg.norm(b)
    normC = 1.0 + np.linalg.norm(C)
    xi = max(1.0, np.sqrt(N))
    eta = max(1.0, np.sqrt(N))
    X = xi * np.eye(N, dtype=complex)
    S = eta * np.eye(N, dtype=complex)
    y = np.zeros(k)

    status = Status.MAX_ITER
    certificate = None
    best = None
    stall = 0
    it = 0
    eye = np.eye(N)
    for it in range(1, max_iter + 1):
        Rp = b - op(X)
        Rd = C - adj(y) - S
        pobj = float(np.real(np.vdot(C, X)))
        dobj = float(b @ y)
        mu = float(np.real(np.vdot(X, S))) / N
        pinf = np.linalg.norm(Rp) / normb
        dinf = np.linalg.norm(Rd) / normC
        unit = sb * sc
        gap = unit * abs(pobj - dobj)
        scale = 1.0 + unit * (abs(pobj) + abs(dobj))
        merit = max(pinf, dinf, gap / scale, unit * N * mu / scale)
        if best is None or merit < 0.9 * best[0]:
            stall = 0
        else:
            stall += 1
        if best is None or merit < best[0]:
            best = (merit, X, y, S)
        if (
            pinf <= feas_tol
            and dinf <= feas_tol
            and gap <= gap_tol * scale
            and unit * N * mu <= gap_tol * scale
        ):
            status = Status.OPTIMAL
            break
        if stall >= 25:
            break
        trX = float(np.trace(X).real)
        ynorm = float(np.linalg.norm(y))
        if trX > 1e10 * xi and pobj < 0 and np.linalg.norm(op(X)) / trX < 1e-8:
            status, certificate = Status.INFEASIBLE, X / trX
            break
        if ynorm > 1e10 and dobj > 0 and np.linalg.norm(Rd + S) / ynorm < 1e-8:
            status, certificate = Status.INFEASIBLE, y / ynorm
            break

        # Nesterov-Todd scaling: W S W = X with W = D D^H, D^H S D = D^-1 X D^-H = diag(v)
        try:
            Lx = np.linalg.cholesky(X)
            Ls = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            break
        U, v, Vh = np.linalg.svd(Ls.conj().T @ Lx)
        if v[-1] <= 0:
            break
        rt = np.sqrt(v)
        D = (Lx @ Vh.conj().T) / rt
        Dinv = (Vh * rt[:, None]) @ spl.solve_triangular(Lx, eye, lower=True)
        Wm = D @ D.conj().T
        B = D.conj().T @ A @ D
        Bf = B.reshape(k, -1)
        Bre = np.concatenate([Bf.real, Bf.imag], axis=1)
        R = np.linalg.qr(Bre.T, mode="r")
        dmag = np.abs(np.diag(R))
        if k:
            # guard against exact rank loss, then refine against the Gram form
            R = R + np.diag(np.where(dmag <= 1e-15 * dmag.max(), 1e-15 * dmag.max(), 0.0))

        def solve(r):
            dy = np.zeros(k)
            res = r
            for _ in range(3):
                z = spl.solve_triangular(R, res, trans="T")
                dy = dy + spl.solve_triangular(R, z)
                res = r - Bre @ (Bre.T @ dy)
            return dy

        base = Rp + op(Wm @ Rd @ Wm)
        vsum = v[:, None] + v[None, :]

        def direction(rmat):
            rc = D @ (2.0 * rmat / vsum) @ D.conj().T
            dy = solve(base - op(rc))
            dS = _herm(Rd - adj(dy))
            dX = _herm(rc - Wm @ dS @ Wm)
            return dX, dy, dS

        v2 = np.diag(v * v).astype(complex)
        dX, dy, dS = direction(-v2)
        ap = min(1.0, _max_step(X, dX))
        ad = min(1.0, _max_step(S, dS))
        mu_aff = float(np.real(np.vdot(X + ap * dX, S + ad * dS))) / N
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
        xt = Dinv @ dX @ Dinv.conj().T
        st = D.conj().T @ dS @ D
        corr = 0.5 * (xt @ st + st @ xt)
        dX, dy, dS = direction(sigma * mu * eye - v2 - corr)
        tau = 0.98 if it > 1 else 0.9
        ap = min(1.0, tau * _max_step(X, dX))
        ad = min(1.0, tau * _max_step(S, dS))
        if ap <= 0 and ad <= 0:
            break
        X = _herm(X + ap * dX)
        y = y + ad * dy
        S = _herm(S + ad * dS)

    if status is not Status.OPTIMAL and best is not None:
        _, X, y, S = best
    x = sc * y / vscale
    X = sb * X
    if certificate is not None and certificate.ndim == 1:
        certificate = certificate / vscale
        certificate /= np.linalg.norm(certificate)
    lmi_val = [v for v in problem.lmi_values(x)]
    pfeas = max((0.0, *(max(0.0, -np.linalg.eigvalsh(_herm(m))[0]) for m in lmi_val)))
    blocks_Z = []
    pos = 0
    for n in sizes:
        blocks_Z.append(X[pos : pos + n, pos : pos + n].copy())
        pos += n
    dres = op(X / sb) - b
    lmi_obj = problem.objective(x)
    dual_obj = -sign * sc * float(np.real(np.vdot(C, X))) + problem.offset
    return SdpSolution(
        status=status,
        sense=problem.sense,
        primal_value=lmi_obj,
        dual_value=dual_obj,
        x=x,
        primal_point=problem.unpack(x),
        dual_point=blocks_Z,
        iterations=it,
        primal_infeasibility=float(pfeas),
        dual_infeasibility=float(np.linalg.norm(dres) / normb),
        certificate=certificate,
    )
