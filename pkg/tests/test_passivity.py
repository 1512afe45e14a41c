"""Two-port passivity and coupled-stability verdicts, bounds, and oracles."""
from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import draw_coupler, draw_plant
from vcoupler.model import VirtualCoupler, nominal_params
from vcoupler.passivity import (
    check_absolute_stability,
    check_condition_a,
    check_condition_b,
    check_condition_c_i,
    check_condition_c_ii,
    check_sufficient_conditions,
    check_two_port_passivity,
    default_grid,
    k22_upper_bound,
    llewellyn_grid_margins,
    two_port_grid_margins,
)

NOM = nominal_params()


def vc(k22: float, b22: float) -> VirtualCoupler:
    return VirtualCoupler(k22, b22)


# ---------------------------------------------------------------------------
# the passivity frontier in (k22, b22): frozen reference values
# ---------------------------------------------------------------------------

# Independently computed upper bounds on the coupler stiffness at fixed
# damping for the bundled parameter set (bisection tolerance 1e-3).
FROZEN_BOUNDS = {
    0.13: 356.825,
    0.14: 370.295,
    0.15: 383.291,
    0.16: 395.861,
    0.17: 408.0448,
    0.1704: 407.844,
    0.18: 390.583,
    0.19: 358.385,
    0.20: 234.134,
}


@pytest.mark.parametrize("b22,expected", sorted(FROZEN_BOUNDS.items()))
def test_stiffness_bound_frozen_values(b22, expected):
    assert k22_upper_bound(NOM, b22) == pytest.approx(expected, abs=2e-3)


def test_bound_is_zero_outside_the_damping_window():
    assert k22_upper_bound(NOM, 0.0) == 0.0
    assert k22_upper_bound(NOM, 0.21) == 0.0
    assert k22_upper_bound(NOM, 5.0) == 0.0


def test_bound_window_boundary_is_four_times_the_elastic_damping():
    # verdict exists exactly for 0 < b22 <= 4*Bf = 0.20 with the bundled plant
    for b22 in (1e-3, 0.02, 0.05, 0.10, 0.15, 0.20):
        assert k22_upper_bound(NOM, b22) > 0.0, b22


def test_bound_decreases_when_force_filter_lag_grows():
    bounds = [
        k22_upper_bound(dataclasses.replace(NOM, If=If), 0.17)
        for If in (60.0, 70.0, 80.0)
    ]
    assert bounds[0] > bounds[1] > bounds[2]


def test_zero_motor_integral_gain_leaves_no_passive_stiffness():
    assert k22_upper_bound(dataclasses.replace(NOM, Im=0.0), 0.15) == 0.0


# ---------------------------------------------------------------------------
# verdicts at named operating points
# ---------------------------------------------------------------------------


def test_verdicts_straddle_the_bound_at_nominal_damping():
    assert check_two_port_passivity(NOM, vc(400.0, 0.17)).overall
    assert check_two_port_passivity(NOM, vc(408.0, 0.17)).overall
    assert not check_two_port_passivity(NOM, vc(409.0, 0.17)).overall
    assert not check_two_port_passivity(NOM, vc(450.0, 0.17)).overall


def test_static_violation_reports_the_constant_coefficient():
    rep = check_two_port_passivity(NOM, vc(450.0, 0.17))
    assert rep.condition_c_ii.failing == "t0"
    assert rep.condition_c_ii.witness_omega == 0.0
    assert rep.witnesses == (0.0,)

    rep2 = check_two_port_passivity(NOM, vc(357.0, 0.13))
    assert not rep2.overall and rep2.condition_c_ii.failing == "t0"


def test_overdamped_coupler_fails_through_the_cubic_coefficient():
    rep = check_two_port_passivity(NOM, vc(10.0, 0.21))
    assert not rep.overall
    assert rep.condition_c_ii.failing == "t3"
    assert rep.condition_c_ii.witness_omega > 1e6  # violation far out in frequency


def test_undamped_coupler_fails_for_any_stiffness():
    for k22 in (1.0, 100.0, 408.0):
        rep = check_two_port_passivity(NOM, vc(k22, 0.0))
        assert not rep.overall
        assert not rep.condition_c_ii.passed


def test_branch_labels_distinguish_the_two_interior_cases():
    assert check_two_port_passivity(NOM, vc(408.0, 0.17)).condition_c_ii.branch == "ii2"
    assert check_two_port_passivity(NOM, vc(300.0, 0.15)).condition_c_ii.branch == "ii1"


def test_first_conditions_pass_at_nominal():
    rep = check_two_port_passivity(NOM, vc(408.0, 0.17))
    assert rep.condition_a.passed and rep.condition_a.branch == "quartic-margin"
    assert rep.condition_b.passed and rep.condition_b.branch == "no-axis-pole"
    assert rep.condition_c_i.passed and rep.condition_c_i.branch == "i1"


def test_grid_statistics_frozen_at_nominal():
    rep = check_two_port_passivity(NOM, vc(408.0, 0.17))
    assert rep.grid_min_determinant == pytest.approx(1.089092718e-4, rel=1e-6)
    assert rep.grid_min_re_h11 == pytest.approx(5.69738479e-4, rel=1e-6)
    assert rep.grid_argmin_omega == pytest.approx(1.1324708e-3, rel=1e-6)


def test_force_filter_gain_threshold_for_input_resistance():
    # raising the force-filter integral gain eventually makes the input
    # resistance dip negative at an interior frequency; the flip happens
    # strictly below the static single-coefficient threshold Im*Pf/B
    assert check_condition_c_i(dataclasses.replace(NOM, If=17000.0)).passed
    failed = check_condition_c_i(dataclasses.replace(NOM, If=18000.0))
    assert not failed.passed and failed.failing == "interior"
    static_threshold = NOM.Im * NOM.Pf / NOM.B
    assert 17646.0 < static_threshold  # exact flip near 17646.13 comes first


def test_conditions_are_individually_addressable():
    a = check_condition_a(NOM)
    b = check_condition_b(NOM)
    ci = check_condition_c_i(NOM)
    cii = check_condition_c_ii(NOM, vc(408.0, 0.17))
    assert a.passed and b.passed and ci.passed and cii.passed
    assert cii.name == "condition_c_ii" and cii.branch == "ii2"
    assert cii.failing is None and cii.witness_omega is None


# ---------------------------------------------------------------------------
# sufficient conditions and their gap to the exact test
# ---------------------------------------------------------------------------


def test_sufficient_conditions_pass_well_inside_the_region():
    assert check_sufficient_conditions(NOM, vc(150.0, 0.15)).passed


def test_sufficient_conditions_gap_witness():
    # coefficient-wise test fails on the quadratic term while the exact
    # verdict still passes: the stronger test is only sufficient
    s = check_sufficient_conditions(NOM, vc(300.0, 0.15))
    assert not s.passed and s.failing == "t2"
    assert check_two_port_passivity(NOM, vc(300.0, 0.15)).overall


# ---------------------------------------------------------------------------
# coupled (absolute) stability: grid verdicts and the relaxation gap
# ---------------------------------------------------------------------------


def test_absolute_verdicts_straddle_their_own_threshold():
    assert check_absolute_stability(NOM, vc(357.0, 0.13)).overall
    assert not check_absolute_stability(NOM, vc(358.0, 0.13)).overall
    assert check_absolute_stability(NOM, vc(408.0, 0.17)).overall
    assert not check_absolute_stability(NOM, vc(409.0, 0.17)).overall


def test_absolute_failure_details_far_above_threshold():
    rep = check_absolute_stability(NOM, vc(430.0, 0.13))
    assert not rep.overall and not rep.llewellyn_ok
    assert rep.min_margin == pytest.approx(-5.70e-5, rel=0.02)
    assert 50.0 < rep.argmin_omega < 300.0
    assert rep.grid_points == 4000

    rep2 = check_absolute_stability(NOM, vc(420.0, 0.17))
    assert not rep2.overall
    assert 1e3 < rep2.argmin_omega < 1e4  # deep notch near the coupler resonance


def test_relaxation_strictly_extends_the_passive_region():
    # points that fail the two-port test but pass the coupled-stability test
    for point in (vc(357.3, 0.13), vc(408.2, 0.17)):
        assert not check_two_port_passivity(NOM, point).overall, point
        assert check_absolute_stability(NOM, point).overall, point


def test_margin_tolerance_is_respected():
    strict = check_absolute_stability(NOM, vc(409.0, 0.17))
    loose = check_absolute_stability(NOM, vc(409.0, 0.17), margin_tol=1e-2)
    assert not strict.llewellyn_ok and loose.llewellyn_ok
    assert strict.min_margin == pytest.approx(-3.894e-4, rel=0.02)


def test_undamped_coupler_is_never_absolutely_stable():
    for k22 in (50.0, 408.0):
        assert not check_absolute_stability(NOM, vc(k22, 0.0)).overall


def test_grid_margins_expose_the_violation_shape():
    grid = default_grid(4000)
    margins = llewellyn_grid_margins(NOM, vc(430.0, 0.13), grid)
    assert float(np.nanmin(margins)) < -1e-5
    ok = llewellyn_grid_margins(NOM, vc(408.0, 0.17), grid)
    assert float(np.nanmin(ok)) >= -1e-8

    m11, m22, mdet = two_port_grid_margins(NOM, vc(450.0, 0.17), grid)
    assert float(np.nanmin(mdet)) < -1e-3
    assert float(np.nanmin(m11)) >= -1e-8  # input resistance itself still fine


def test_default_grid_shape():
    g = default_grid(2000)
    assert g.shape == (2000,)
    assert g[0] == pytest.approx(1e-3) and g[-1] == pytest.approx(1e6)
    assert np.all(np.diff(np.log10(g)) > 0)


# ---------------------------------------------------------------------------
# randomized corpora: necessity, equivalence, hierarchy
# ---------------------------------------------------------------------------


def test_no_elastic_damping_is_never_passive():
    rng = np.random.default_rng(12345)
    for _ in range(100):
        p = draw_plant(rng, Bf=0.0)
        coupler = draw_coupler(rng, NOM.Bf)
        assert not check_two_port_passivity(p, coupler).overall
        assert not check_absolute_stability(p, coupler).overall


def test_no_coupler_damping_fails_both_checks():
    rng = np.random.default_rng(12345)
    for _ in range(100):
        p = draw_plant(rng)
        coupler = VirtualCoupler(10.0 ** rng.uniform(1.5, 3.0), 0.0)
        assert not check_two_port_passivity(p, coupler).overall
        assert not check_absolute_stability(p, coupler).overall


def test_exact_and_sampled_real_part_verdicts_agree(corpus, corpus_sampled_margins):
    disagreements = []
    for inst, sampled_min in zip(corpus, corpus_sampled_margins):
        exact = inst.two_port.condition_c_i.passed and inst.two_port.condition_c_ii.passed
        sampled = sampled_min >= -1e-8
        if sampled != exact and abs(sampled_min) > 1e-8:
            disagreements.append((inst.coupler, sampled_min, exact))
    assert disagreements == []


def test_verdict_hierarchy_over_the_corpus(corpus):
    for inst in corpus:
        if inst.sufficient.passed:
            assert inst.two_port.overall, inst.coupler
        if inst.two_port.overall:
            assert inst.absolute.overall, inst.coupler


def test_corpus_exercises_both_sides_of_every_verdict(corpus):
    n_two_port = sum(i.two_port.overall for i in corpus)
    n_absolute = sum(i.absolute.overall for i in corpus)
    n_sufficient = sum(i.sufficient.passed for i in corpus)
    assert 0 < n_sufficient < n_two_port < n_absolute < len(corpus)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dual_route_interior_test_never_disagrees(seed):
    # the coefficient test runs its closed form and its chain route together
    # and raises if they ever split; random draws must stay silent
    rng = np.random.default_rng(seed)
    p = draw_plant(rng)
    coupler = draw_coupler(rng, p.Bf)
    check_condition_c_ii(p, coupler)


# ---------------------------------------------------------------------------
# bound consistency with the verdicts it summarizes
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("b22", [0.13, 0.15, 0.17, 0.19])
def test_bound_is_the_verdict_frontier(b22):
    bound = k22_upper_bound(NOM, b22)
    assert check_two_port_passivity(NOM, vc(bound - 1e-3, b22)).overall
    assert not check_two_port_passivity(NOM, vc(bound + 1.0, b22)).overall


def test_absolute_frontier_sits_above_the_passivity_frontier():
    # sampled-criterion threshold is never below the exact-criterion one
    for b22 in (0.13, 0.17):
        k_pass = k22_upper_bound(NOM, b22)
        assert check_absolute_stability(NOM, vc(k_pass + 0.2, b22)).overall
