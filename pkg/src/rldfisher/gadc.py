"""Generalized amplitude damping channel: closed forms and the loss sweep.

Parameters are the loss ``gamma`` and the noise ``N``, both in (0, 1).  The
Choi matrix is written in the basis |00>, |01>, |10>, |11> (reference first).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .families import ChannelFamilyPoint, finite_diff_point, validate_weight
from .rld import rld_value_channel
from .sld import PROBE_GRID, optimize_probe

FIGURE2_WEIGHT = np.array([[1.0, 1.0], [1.0, 3.0]]) / 4.0
FIGURE2_NOISE = 0.2
DEFAULT_GAMMA_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))


@dataclass(frozen=True)
class GadcParams:
    gamma: float
    n_noise: float

    def __post_init__(self):
        for name, v in (("gamma", self.gamma), ("N", self.n_noise)):
            if not (isinstance(v, (int, float)) and 0.0 < v < 1.0):
                raise ValueError(f"GADC parameter {name}={v!r} must lie in the open interval (0, 1)")


def gadc_choi(p: GadcParams) -> np.ndarray:
    g, n = p.gamma, p.n_noise
    c = np.diag([1 - g * n, g * n, g * (1 - n), 1 - g * (1 - n)]).astype(complex)
    c[0, 3] = c[3, 0] = math.sqrt(1 - g)
    return c


def gadc_choi_inverse(p: GadcParams) -> np.ndarray:
    g, n = p.gamma, p.n_noise
    den = (1 - n) * n * g * g
    inv = np.zeros((4, 4), dtype=complex)
    inv[0, 0] = (1 - g * (1 - n)) / den
    inv[3, 3] = (1 - g * n) / den
    inv[0, 3] = inv[3, 0] = -math.sqrt(1 - g) / den
    inv[1, 1] = 1 / (g * n)
    inv[2, 2] = 1 / (g * (1 - n))
    return inv


def gadc_derivatives(p: GadcParams) -> tuple[np.ndarray, np.ndarray]:
    """``(d Gamma / d gamma, d Gamma / d N)``."""
    g, n = p.gamma, p.n_noise
    dg = np.diag([-n, n, 1 - n, -(1 - n)]).astype(complex)
    dg[0, 3] = dg[3, 0] = -1 / (2 * math.sqrt(1 - g))
    dn = -g * np.kron(np.eye(2), np.diag([1.0, -1.0])).astype(complex)
    return dg, dn


def gadc_kraus(p: GadcParams) -> list[np.ndarray]:
    g, n = p.gamma, p.n_noise
    a = math.sqrt(1 - n) * np.array([[1, 0], [0, math.sqrt(1 - g)]])
    b = math.sqrt(1 - n) * np.array([[0, math.sqrt(g)], [0, 0]])
    c = math.sqrt(n) * np.array([[math.sqrt(1 - g), 0], [0, 1]])
    d = math.sqrt(n) * np.array([[0, 0], [math.sqrt(g), 0]])
    return [m.astype(complex) for m in (a, b, c, d)]


def gadc_family(
    p: GadcParams, params: str = "gamma,N", h: float | None = None
) -> ChannelFamilyPoint:
    """GADC family at ``p`` differentiated in ``params``.

    ``params`` is ``"gamma,N"``, ``"gamma"`` or ``"N"``.  With ``h`` set the
    derivatives come from central differences instead of the closed form.
    """
    names = [s.strip() for s in params.split(",")]
    if not names or any(s not in ("gamma", "N") for s in names):
        raise ValueError(f"unknown GADC parameter list {params!r}")
    if h is None:
        dg, dn = gadc_derivatives(p)
        table = {"gamma": dg, "N": dn}
        derivs = tuple(table[s] for s in names)
    else:
        theta0 = np.array([p.gamma, p.n_noise])
        idx = {"gamma": 0, "N": 1}

        def evaluator_for(name):
            def ev(t):
                th = theta0.copy()
                th[idx[name]] = t[0]
                return gadc_choi(GadcParams(float(th[0]), float(th[1])))

            return ev

        derivs = tuple(
            finite_diff_point(evaluator_for(s), [theta0[idx[s]]], h)[0] for s in names
        )
    theta = tuple(p.gamma if s == "gamma" else p.n_noise for s in names)
    return ChannelFamilyPoint(gadc_choi(p), derivs, 2, 2, theta)


def gadc_traced_blocks(p: GadcParams) -> dict[tuple[str, str], np.ndarray]:
    """Closed-form ``Tr_B[(d_a Gamma) Gamma^-1 (d_b Gamma)]`` for a, b in {gamma, N}."""
    g, n = p.gamma, p.n_noise
    gg = np.diag(
        [
            (1 / (n - g * n) + 1 / (1 - n) - 4) / (4 * g * g),
            (1 / ((g - 1) * (n - 1)) + 1 / n - 4) / (4 * g * g),
        ]
    )
    cross = -(1 - 2 * n) / (2 * g * n * (1 - n)) * np.eye(2)
    nn = 1 / (n * (1 - n)) * np.eye(2)
    return {
        ("gamma", "gamma"): gg.astype(complex),
        ("gamma", "N"): cross.astype(complex),
        ("N", "gamma"): cross.astype(complex),
        ("N", "N"): nn.astype(complex),
    }


def gadc_rld_value(p: GadcParams, w=FIGURE2_WEIGHT) -> float:
    """Closed-form channel RLD value from the diagonal traced blocks."""
    w = validate_weight(w)
    if w.shape != (2, 2):
        raise ValueError("GADC weight matrix must be 2x2")
    blocks = gadc_traced_blocks(p)
    names = ("gamma", "N")
    total = np.zeros((2, 2), dtype=complex)
    for j, a in enumerate(names):
        for k, b in enumerate(names):
            total += w[k, j] * blocks[a, b]
    # every block is diagonal, so the norm is the largest diagonal entry
    return max(float(np.max(total.real.diagonal())), 0.0)


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    n_noise: float
    log10_rld_value: float
    log10_sld_value: float
    p_star: float
    rld_value: float
    sld_value: float
    status: str

    @property
    def ok(self) -> bool:
        return self.status == "ok"


SWEEP_COLUMNS = (
    "gamma",
    "n_noise",
    "log10_rld_value",
    "log10_sld_value",
    "p_star",
    "rld_value",
    "sld_value",
    "status",
)


def sweep_point(gamma: float, n_noise: float, w=FIGURE2_WEIGHT, probe_grid: int = PROBE_GRID) -> SweepRow:
    nan = math.nan
    try:
        p = GadcParams(gamma, n_noise)
        fam = gadc_family(p)
        rld = rld_value_channel(fam, w)
        p_star, helstrom = optimize_probe(fam, w=w, grid_size=probe_grid)
        sld = 1.0 / helstrom
        return SweepRow(gamma, n_noise, math.log10(rld), math.log10(sld), p_star, rld, sld, "ok")
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        msg = str(exc).replace(",", ";").replace("\n", " ")
        return SweepRow(gamma, n_noise, nan, nan, nan, nan, nan, f"error: {msg}")


def gadc_sweep(points, w=FIGURE2_WEIGHT, probe_grid: int = PROBE_GRID, workers: int = 1) -> list[SweepRow]:
    """Evaluate ``(gamma, N)`` points; output order follows the input order."""
    points = [(float(g), float(n)) for g, n in points]
    if workers > 1 and len(points) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda gn: sweep_point(gn[0], gn[1], w, probe_grid), points))
    return [sweep_point(g, n, w, probe_grid) for g, n in points]


def figure2_sweep(
    n_noise: float = FIGURE2_NOISE,
    gamma_grid=DEFAULT_GAMMA_GRID,
    w=FIGURE2_WEIGHT,
    probe_grid: int = PROBE_GRID,
    workers: int = 1,
) -> list[SweepRow]:
    """RLD and optimized-probe SLD values along the loss axis at fixed noise."""
    return gadc_sweep([(g, n_noise) for g in gamma_grid], w, probe_grid, workers)
