"""Seeded randomized property suites.

Each instance draws from its own generator spawned from the root seed, so
results do not depend on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds, models
from .families import StateFamilyPoint
from .gadc import GadcParams, gadc_family
from .rld import rld_matrix_state, rld_value_channel, rld_value_state
from .sdp import cross_check
from .sld import sld_matrix

SLACK_TOL = 1e-8
MATRIX_TOL = 1e-7
CROSSCHECK_TOL = 1e-5
GAP_TOL = 1e-7
CLASSICAL_TOL = 1e-10


@dataclass(frozen=True)
class InstanceResult:
    index: int
    metric: float
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class SuiteReport:
    name: str
    seed: int
    metric_name: str
    # "min" when the summary is the smallest metric, "max" for the largest
    summary_kind: str
    results: tuple = field(default=())

    @property
    def count(self) -> int:
        return len(self.results)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def summary(self) -> float:
        vals = [r.metric for r in self.results]
        if not vals:
            return math.nan
        return min(vals) if self.summary_kind == "min" else max(vals)

    @property
    def warning(self) -> str:
        return "no instances were run; the pass is vacuous" if not self.results else ""

    def to_csv_lines(self) -> list[str]:
        lines = ["suite,seed,instance,metric,passed,detail"]
        for r in self.results:
            lines.append(
                f"{self.name},{self.seed},{r.index},{r.metric:.17g},{int(r.passed)},{r.detail}"
            )
        return lines


def _qubit_pair(rng, n_params):
    channel = models.random_channel_family(rng, 2, 2, n_params)
    state = models.random_state_family(rng, 4, n_params)
    return channel, state


def _chain_rule(rng, index):
    D = 1 + index % 2
    channel, state = _qubit_pair(rng, D)
    w = models.random_weight(rng, D)
    slack = bounds.chain_rule_slack(channel, state, w)
    gap = bounds.chain_rule_matrix_gap(channel, state)
    ok = slack >= -SLACK_TOL and gap >= -MATRIX_TOL
    return InstanceResult(index, slack, ok, f"D={D};matrix_min_eig={gap:.3e}")


def _amortization(rng, index):
    D = 1 + index % 2
    channel, state = _qubit_pair(rng, D)
    w = models.random_weight(rng, D)
    gain = bounds.amortized_gain(channel, state, w)
    margin = rld_value_channel(channel, w) - gain
    return InstanceResult(index, margin, margin >= -SLACK_TOL, f"D={D};gain={gain:.6g}")


def _sequential(rng, index):
    n = 1 + index % 3
    D = 1 + (index // 3) % 2
    channel = models.random_channel_family(rng, 2, 2, D)
    w = models.random_weight(rng, D)
    initial = StateFamilyPoint.constant(models.random_density(rng, 4), D)
    inter = [models.random_channel(rng, 4, 4) for _ in range(n - 1)]
    value = bounds.sequential_fi(bounds.SequentialProtocol(n, initial, inter), channel, w)
    margin = n * rld_value_channel(channel, w) - value
    return InstanceResult(index, margin, margin >= -SLACK_TOL, f"n={n};D={D};value={value:.6g}")


def _sdp_crosscheck(rng, index):
    g, n = rng.uniform(0.1, 0.9, size=2)
    w = models.random_weight(rng, 2)
    r = cross_check(gadc_family(GadcParams(float(g), float(n))), w, tol=CROSSCHECK_TOL)
    ok = r.passed and r.primal_gap <= GAP_TOL
    return InstanceResult(
        index, r.deviation, ok, f"gamma={g:.6f};N={n:.6f};primal_gap={r.primal_gap:.3e}"
    )


def _classical(rng, index):
    d = 2 + index % 3
    D = 1 + index % 2
    p = rng.dirichlet(np.ones(d))
    p = 0.5 * p + 0.5 / d
    dps = rng.normal(size=(D, d))
    dps -= dps.mean(axis=1, keepdims=True)
    state = models.diagonal_family(p / p.sum(), dps)
    oracle = models.classical_fisher_matrix(state.rho.diagonal().real, dps)
    dev = max(
        float(np.max(np.abs(rld_matrix_state(state).entries - oracle))),
        float(np.max(np.abs(sld_matrix(state).entries - oracle))),
    )
    scale = max(1.0, float(np.max(np.abs(oracle))))
    return InstanceResult(index, dev / scale, dev / scale <= CLASSICAL_TOL, f"d={d};D={D}")


def _rld_vs_sld(rng, index):
    state = models.random_state_family(rng, 2, 1, scale=0.3)
    rld = rld_value_state(state, [[1.0]])
    sld = float(sld_matrix(state).entries[0, 0].real)
    margin = rld - sld
    return InstanceResult(index, margin, margin >= -SLACK_TOL, f"rld={rld:.6g};sld={sld:.6g}")


SUITES = {
    "chain-rule": (_chain_rule, "slack", "min"),
    "amortization": (_amortization, "margin", "min"),
    "sequential": (_sequential, "margin", "min"),
    "sdp-crosscheck": (_sdp_crosscheck, "deviation", "max"),
    "classical-reduction": (_classical, "deviation", "max"),
    "rld-vs-sld": (_rld_vs_sld, "margin", "min"),
}


def run_suite(name: str, seed: int = 0, count: int = 100, workers: int = 1) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if count < 0:
        raise ValueError("count must be non-negative")
    fn, metric, kind = SUITES[name]
    children = np.random.SeedSequence(seed).spawn(count)

    def one(i):
        try:
            return fn(np.random.default_rng(children[i]), i)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            return InstanceResult(i, math.nan, False, f"error: {exc}".replace(",", ";"))

    if workers > 1 and count > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = tuple(pool.map(one, range(count)))
    else:
        results = tuple(one(i) for i in range(count))
    return SuiteReport(name, seed, metric, kind, results)

