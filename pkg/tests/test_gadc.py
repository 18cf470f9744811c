import math

import numpy as np
import pytest

from rldfisher import linalg as la
from rldfisher.families import choi_from_kraus
from rldfisher.gadc import (
    DEFAULT_GAMMA_GRID,
    FIGURE2_WEIGHT,
    GadcParams,
    figure2_sweep,
    gadc_choi,
    gadc_choi_inverse,
    gadc_derivatives,
    gadc_family,
    gadc_kraus,
    gadc_rld_value,
    gadc_sweep,
    gadc_traced_blocks,
)
from rldfisher.rld import rld_value_channel, traced_blocks, weighted_traced_operator
from rldfisher.sdp import build_channel_primal, solve_sdp

GRID9 = np.linspace(0.1, 0.9, 9)
GRID5 = np.linspace(0.1, 0.9, 5)
NAMES = ("gamma", "N")


def grid(points):
    return [GadcParams(float(g), float(n)) for g in points for n in points]


def test_choi_limits():
    c = gadc_choi(GadcParams(1e-12, 0.3))
    ident = np.zeros((4, 4))
    ident[np.ix_([0, 3], [0, 3])] = 1
    assert np.allclose(c, ident, atol=1e-11)
    c = gadc_choi(GadcParams(1 - 1e-12, 1e-12))
    assert np.allclose(c, np.diag([1, 0, 1, 0]), atol=1e-5)


def test_choi_at_reference_point():
    c = gadc_choi(GadcParams(0.5, 0.2))
    assert np.allclose(c.diagonal(), [0.9, 0.1, 0.4, 0.6])
    assert c[0, 3] == pytest.approx(math.sqrt(0.5))
    assert c[3, 0] == pytest.approx(math.sqrt(0.5))


def test_params_validated():
    for bad in [(0.0, 0.2), (1.0, 0.2), (0.5, 1.2), (0.5, -0.1)]:
        with pytest.raises(ValueError, match="open interval"):
            GadcParams(*bad)


@pytest.mark.parametrize("p", grid(GRID9), ids=str)
def test_choi_invariants_on_grid(p):
    c = gadc_choi(p)
    assert la.min_eigenvalue(c) > 0
    assert np.allclose(la.partial_trace(c, 2, 2, "right"), np.eye(2), atol=1e-14)
    assert np.max(np.abs(gadc_choi_inverse(p) @ c - np.eye(4))) <= 1e-9
    det = np.linalg.det(c[np.ix_([0, 3], [0, 3])]).real
    assert det == pytest.approx(p.gamma**2 * p.n_noise * (1 - p.n_noise), abs=1e-12)


def test_inverse_examples():
    p = GadcParams(0.5, 0.2)
    assert np.allclose(gadc_choi_inverse(p) @ gadc_choi(p), np.eye(4))
    assert gadc_choi_inverse(GadcParams(0.5, 0.1))[1, 1].real == pytest.approx(20.0)
    for q in grid(GRID5):
        assert np.max(np.abs(la.support_pinv(gadc_choi(q)) - gadc_choi_inverse(q))) <= 1e-8


def test_derivative_examples():
    _, dn = gadc_derivatives(GadcParams(0.5, 0.3))
    assert np.allclose(dn, np.diag([-0.5, 0.5, -0.5, 0.5]))
    dg, _ = gadc_derivatives(GadcParams(0.75, 0.3))
    assert dg[0, 3].real == pytest.approx(-1.0)


def test_derivatives_match_finite_differences():
    p = GadcParams(0.5, 0.2)
    for a, b in zip(gadc_family(p, h=1e-5).derivs, gadc_derivatives(p)):
        assert np.max(np.abs(a - b)) <= 1e-8


def test_kraus_set_reproduces_choi():
    for p in grid(GRID5):
        assert np.max(np.abs(choi_from_kraus(gadc_kraus(p)) - gadc_choi(p))) <= 1e-12


def test_block_examples():
    b = gadc_traced_blocks(GadcParams(0.5, 0.2))
    assert np.allclose(b["N", "N"], 6.25 * np.eye(2))
    b = gadc_traced_blocks(GadcParams(0.5, 0.5))
    assert np.allclose(b["gamma", "N"], 0)


@pytest.mark.parametrize("p", grid(GRID9), ids=str)
def test_blocks_match_generic_pipeline(p):
    closed = gadc_traced_blocks(p)
    generic = traced_blocks(gadc_family(p))
    for j, a in enumerate(NAMES):
        for k, b in enumerate(NAMES):
            ref = generic[j, k]
            assert np.max(np.abs(closed[a, b] - ref)) <= 1e-10 * max(1.0, np.abs(ref).max())
    nn = closed["N", "N"]
    assert np.max(np.abs(nn - np.eye(2) / (p.n_noise * (1 - p.n_noise)))) <= 1e-12


def test_rld_value_examples():
    p = GadcParams(0.5, 0.2)
    assert gadc_rld_value(p, np.zeros((2, 2))) == 0.0
    closed = gadc_rld_value(p, FIGURE2_WEIGHT)
    generic = rld_value_channel(gadc_family(p), FIGURE2_WEIGHT)
    sdp = solve_sdp(build_channel_primal(gadc_family(p), FIGURE2_WEIGHT)).value
    for a, b in [(closed, generic), (closed, sdp), (generic, sdp)]:
        assert abs(a - b) <= 1e-6 * max(a, b)
    op = weighted_traced_operator(gadc_family(p), FIGURE2_WEIGHT)
    assert closed == pytest.approx(la.inf_norm_psd(op), rel=1e-12)


def test_rld_value_three_routes_on_grid():
    rng = np.random.default_rng(17)
    for p in grid(GRID5)[::3]:
        g = rng.normal(size=(2, 2))
        w = g @ g.T
        w /= np.trace(w)
        vals = [
            gadc_rld_value(p, w),
            rld_value_channel(gadc_family(p), w),
            solve_sdp(build_channel_primal(gadc_family(p), w)).value,
        ]
        assert max(vals) - min(vals) <= 1e-6 * max(vals)


def test_single_point_sweep():
    (row,) = figure2_sweep(gamma_grid=[0.5])
    assert row.ok
    assert math.isfinite(row.rld_value) and math.isfinite(row.sld_value)
    assert row.log10_rld_value == pytest.approx(math.log10(row.rld_value))
    assert 0 < row.p_star < 1


def test_sweep_reversal():
    pts = [(0.2, 0.2), (0.5, 0.2), (0.8, 0.2)]
    fwd = gadc_sweep(pts, probe_grid=41)
    rev = gadc_sweep(pts[::-1], probe_grid=41)
    assert fwd == rev[::-1]


def test_sweep_threads_match_serial():
    pts = [(g, 0.2) for g in (0.3, 0.6, 0.9)]
    assert gadc_sweep(pts, probe_grid=41, workers=3) == gadc_sweep(pts, probe_grid=41, workers=1)


def test_sweep_flags_poles():
    rows = gadc_sweep([(0.0, 0.2), (0.5, 0.2), (1.0, 0.2)], probe_grid=21)
    assert [r.ok for r in rows] == [False, True, False]
    assert "open interval" in rows[0].status
    assert math.isnan(rows[0].rld_value)


def test_default_grid():
    assert len(DEFAULT_GAMMA_GRID) == 19
    assert DEFAULT_GAMMA_GRID[0] == 0.05 and DEFAULT_GAMMA_GRID[-1] == 0.95
