"""Shared fixtures: a seeded random corpus of plants/couplers with cached verdicts.

The corpus is drawn once per session and reused by the equivalence, hierarchy,
and one-port-consequence suites so the expensive exact checks run only once.
"""
from __future__ import annotations

import dataclasses
from typing import Tuple

import numpy as np
import pytest

from vcoupler.model import (
    SystemParams,
    VirtualCoupler,
    hybrid_matrix,
    nominal_params,
)
from vcoupler.passivity import (
    check_absolute_stability,
    check_sufficient_conditions,
    check_two_port_passivity,
    default_grid,
    two_port_grid_margins,
)
from vcoupler.perf import EnvironmentModel, transmitted_impedance
from vcoupler.stability import positive_real

CORPUS_SEED = 12345
CORPUS_SIZE = 500

PLANT_FIELDS = ("Kf", "Bf", "M", "B", "Pm", "Im", "Pf", "If")


def draw_plant(rng: np.random.Generator, spread: float = 0.3, **fixed) -> SystemParams:
    """One random plant: each physical field scaled by 10**U(-spread, spread)."""
    nom = nominal_params()
    kw = {f: getattr(nom, f) * 10.0 ** rng.uniform(-spread, spread) for f in PLANT_FIELDS}
    kw["alpha"] = float(rng.uniform(0.0, 1.0))
    kw.update(fixed)
    return SystemParams(**kw)


def draw_coupler(rng: np.random.Generator, Bf: float) -> VirtualCoupler:
    """One random coupler; b22 is drawn around the 4*Bf feasibility edge so the
    corpus contains a healthy mix of passing and failing instances."""
    k22 = 10.0 ** rng.uniform(1.5, 3.0)
    b22 = 4.0 * Bf * 10.0 ** rng.uniform(-0.8, 0.1)
    return VirtualCoupler(k22, b22)


@dataclasses.dataclass(frozen=True)
class CorpusInstance:
    params: SystemParams
    coupler: VirtualCoupler
    two_port: object       # PassivityReport
    absolute: object       # AbsoluteStabilityReport
    sufficient: object     # ConditionReport


@pytest.fixture(scope="session")
def corpus() -> Tuple[CorpusInstance, ...]:
    rng = np.random.default_rng(CORPUS_SEED)
    out = []
    for _ in range(CORPUS_SIZE):
        p = draw_plant(rng)
        vc = draw_coupler(rng, p.Bf)
        out.append(
            CorpusInstance(
                params=p,
                coupler=vc,
                two_port=check_two_port_passivity(p, vc),
                absolute=check_absolute_stability(p, vc),
                sufficient=check_sufficient_conditions(p, vc),
            )
        )
    return tuple(out)


@pytest.fixture(scope="session")
def corpus_sampled_margins(corpus) -> Tuple[float, ...]:
    """Per-instance minimum of the normalized sampled real-part margins on the
    4000-point default grid (the frequency-sampling route of the real-part
    conditions, independent of the exact polynomial route)."""
    grid = default_grid(4000)
    mins = []
    for inst in corpus:
        m11, m22, mdet = two_port_grid_margins(inst.params, inst.coupler, grid)
        mins.append(
            min(float(np.nanmin(m11)), float(np.nanmin(m22)), float(np.nanmin(mdet)))
        )
    return tuple(mins)


ONE_PORT_ENVIRONMENTS = (
    EnvironmentModel("null", 0.0, 0.0),
    EnvironmentModel("spring", 50.0, 0.0),
    EnvironmentModel("spring", 200.0, 0.0),
    EnvironmentModel("voigt", 200.0, 0.05),
)


@pytest.fixture(scope="session")
def one_port_violations(corpus):
    """Positive-realness failures of the transmitted impedance across every
    passive corpus instance and every reference termination (expected empty)."""
    violations = []
    for idx, inst in enumerate(corpus):
        if not inst.two_port.overall:
            continue
        h = hybrid_matrix(inst.params, inst.coupler)
        for env in ONE_PORT_ENVIRONMENTS:
            verdict = positive_real(transmitted_impedance(h, env))
            if not verdict.passive:
                violations.append((idx, env.kind, env.Ke, env.Be, verdict))
    return tuple(violations)


# ---------------------------------------------------------------------------
# acceptance reporting: one line per criterion in the terminal summary
# ---------------------------------------------------------------------------

ACCEPTANCE_LINES: list = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
