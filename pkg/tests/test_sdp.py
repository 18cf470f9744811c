import math

import numpy as np
import pytest

from rldfisher import linalg as la
from rldfisher import models
from rldfisher.families import StateFamilyPoint, push_through_channel
from rldfisher.gadc import FIGURE2_WEIGHT, GadcParams, gadc_family, gadc_rld_value
from rldfisher.rld import rld_value_channel, rld_value_channel_single, rld_value_state
from rldfisher.sdp import (
    LmiBuilder,
    Status,
    build_channel_dual,
    build_channel_primal,
    build_state_dual,
    build_state_primal,
    cross_check,
    schur_residual_min_eig,
    solve_sdp,
)
from rldfisher.sld import entangled_probe

P = GadcParams(0.5, 0.2)


def gadc_output():
    return push_through_channel(StateFamilyPoint.constant(entangled_probe(0.5).rho, 2), gadc_family(P))


def test_scalar_program():
    b = LmiBuilder()
    b.scalar("lam")
    prob = b.build("min", lambda v: v["lam"], [("lb", lambda v: np.array([[v["lam"] - 3.0]]))])
    sol = solve_sdp(prob)
    assert sol.status is Status.OPTIMAL
    assert sol.value == pytest.approx(3.0, abs=1e-7)


def test_schur_program():
    x = np.array([[2.0], [0.0]])
    b = LmiBuilder()
    b.hermitian("M", 2)
    prob = b.build(
        "min",
        lambda v: np.trace(v["M"]).real,
        [("schur", lambda v: np.block([[v["M"], x], [x.T, np.eye(1)]]))],
    )
    sol = solve_sdp(prob)
    assert sol.status is Status.OPTIMAL
    assert sol.value == pytest.approx(4.0, abs=1e-7)
    assert np.allclose(sol.primal_point["M"], x @ x.T, atol=1e-4)


def test_infeasible_program_reports_certificate():
    b = LmiBuilder()
    b.scalar("t")
    prob = b.build(
        "min",
        lambda v: v["t"],
        [("a", lambda v: np.array([[v["t"]]])), ("b", lambda v: np.array([[-1.0 - v["t"]]]))],
    )
    sol = solve_sdp(prob)
    assert sol.status is Status.INFEASIBLE
    assert sol.certificate is not None


def test_state_primal_examples():
    zero = StateFamilyPoint.constant(np.eye(2) / 2)
    assert solve_sdp(build_state_primal(zero, [[1.0]])).value == pytest.approx(0.0, abs=1e-7)
    bern = models.bernoulli_family(0.5)
    assert solve_sdp(build_state_primal(bern, [[1.0]])).value == pytest.approx(4.0, rel=1e-7)
    bern3 = models.bernoulli_family(0.3)
    assert solve_sdp(build_state_primal(bern3, [[1.0]])).value == pytest.approx(100 / 21, rel=1e-7)


def test_state_primal_random_qubit():
    rng = np.random.default_rng(11)
    state = models.random_state_family(rng, 2, 2, scale=0.3)
    w = models.random_weight(rng, 2)
    assert solve_sdp(build_state_primal(state, w)).value == pytest.approx(rld_value_state(state, w), abs=1e-6)


def test_state_dual_examples():
    zero = StateFamilyPoint.constant(np.eye(2) / 2)
    sol = solve_sdp(build_state_dual(zero, [[1.0]]))
    assert sol.value == pytest.approx(0.0, abs=1e-7)
    bern = models.bernoulli_family(0.5)
    assert solve_sdp(build_state_dual(bern, [[1.0]])).value == pytest.approx(4.0, rel=1e-7)
    out = gadc_output()
    p = solve_sdp(build_state_primal(out, FIGURE2_WEIGHT)).value
    d = solve_sdp(build_state_dual(out, FIGURE2_WEIGHT)).value
    assert abs(p - d) <= 1e-6


def test_channel_primal_examples():
    const = models.identity_channel_family(2, 1)
    assert solve_sdp(build_channel_primal(const, [[1.0]])).value == pytest.approx(0.0, abs=1e-7)
    sol = solve_sdp(build_channel_primal(gadc_family(P), FIGURE2_WEIGHT))
    assert sol.value == pytest.approx(gadc_rld_value(P), abs=1e-6)
    single = gadc_family(P, params="gamma")
    sol = solve_sdp(build_channel_primal(single, [[1.0]]))
    assert sol.value == pytest.approx(rld_value_channel_single(single), abs=1e-6)


def test_channel_dual_examples():
    const = models.identity_channel_family(2, 1)
    assert solve_sdp(build_channel_dual(const, [[1.0]])).value == pytest.approx(0.0, abs=1e-7)
    for g, n in [(0.3, 0.2), (0.5, 0.5), (0.8, 0.7)]:
        fam = gadc_family(GadcParams(g, n))
        sol = solve_sdp(build_channel_primal(fam, FIGURE2_WEIGHT))
        assert sol.gap <= 1e-7


def test_weak_duality_random_channels():
    rng = np.random.default_rng(5)
    for _ in range(5):
        fam = models.random_channel_family(rng, 2, 2, 2)
        w = models.random_weight(rng, 2)
        primal = solve_sdp(build_channel_primal(fam, w))
        dual = solve_sdp(build_channel_dual(fam, w))
        assert dual.status is not Status.INFEASIBLE
        assert dual.value <= primal.value + 1e-7
        # each solve also certifies its own weak duality
        for sol in (primal, dual):
            if sol.sense == "min":
                assert sol.dual_value <= sol.primal_value + 1e-7
            else:
                assert sol.primal_value <= sol.dual_value + 1e-7


def test_state_primal_matches_closed_form_on_random_instances():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        d = int(rng.integers(2, 4))
        D = int(rng.integers(1, 3))
        state = models.random_state_family(rng, d, D, scale=0.2)
        w = models.random_weight(rng, D)
        closed = rld_value_state(state, w)
        sol = solve_sdp(build_state_primal(state, w))
        assert abs(sol.value - closed) <= 1e-5 * max(closed, 1e-12) + 1e-9
        assert schur_residual_min_eig(build_state_primal(state, w), sol) >= -1e-7


def test_schur_consistency_channel():
    prob = build_channel_primal(gadc_family(P), FIGURE2_WEIGHT)
    sol = solve_sdp(prob)
    assert schur_residual_min_eig(prob, sol) >= -1e-7


def test_solver_is_deterministic():
    prob = build_channel_primal(gadc_family(P), FIGURE2_WEIGHT)
    a, b = solve_sdp(prob), solve_sdp(prob)
    assert a.primal_value == b.primal_value
    assert a.dual_value == b.dual_value
    assert np.array_equal(a.x, b.x)


def test_singular_state_is_perturbed_and_reported():
    state = StateFamilyPoint.constant(np.diag([1.0, 0.0]))
    prob = build_state_primal(state, [[1.0]])
    assert prob.meta["perturbation"] == pytest.approx(1e-9)
    full = build_state_primal(models.bernoulli_family(0.4), [[1.0]])
    assert full.meta["perturbation"] == 0.0


def test_problem_json_dump():
    import json

    doc = json.loads(build_state_primal(models.bernoulli_family(0.4), [[1.0]]).to_json())
    assert doc["sense"] == "min"
    assert len(doc["blocks"]) == 1


def test_cross_check_gadc_grid():
    worst = 0.0
    for g in np.linspace(0.1, 0.9, 5):
        for n in np.linspace(0.1, 0.9, 5):
            r = cross_check(gadc_family(GadcParams(float(g), float(n))), FIGURE2_WEIGHT)
            assert r.passed, r
            worst = max(worst, r.deviation)
    assert worst <= 1e-5


def test_cross_check_constant_and_unitary():
    r = cross_check(models.identity_channel_family(2, 1), [[1.0]])
    assert r.passed
    assert max(abs(r.closed_form), abs(r.primal), abs(r.dual)) <= 1e-7
    r = cross_check(models.unitary_phase_family(), [[1.0]])
    assert r.verdict == "Infinite"
    assert not r.passed
    assert math.isnan(r.primal) and math.isnan(r.dual)


def test_cross_check_state():
    rng = np.random.default_rng(9)
    state = models.random_state_family(rng, 3, 2)
    r = cross_check(state, models.random_weight(rng, 2))
    assert r.kind == "state" and r.passed
