import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from kerrspt import criticality as crit
from kerrspt.criticality import CriticalityInput as CI, PhaseLabel
from kerrspt.errors import UnstablePhaseError
from kerrspt.params import from_ratios


def test_bare_rabi():
    assert crit.critical_coupling(0.0, 0.0) == 1.0
    assert crit.classify_phase(CI(0.99)) is PhaseLabel.NP
    assert crit.classify_phase(CI(1.0)) is PhaseLabel.NP
    assert crit.classify_phase(CI(1.01)) is PhaseLabel.SP
    assert crit.order_parameter_analytic(CI(1.0)) == 0.0


def test_alpha_one_has_no_transition():
    assert crit.critical_coupling(1.0, 0.1) is None
    assert crit.transition_direction(1.0, 0.1) is None


def test_unstable():
    c = CI(0.1, alpha=0.0, chi_over_omega=0.3)
    assert crit.classify_phase(c) is PhaseLabel.UP
    for f in (crit.rescaled_coupling, crit.squeezing_parameter, crit.order_parameter_analytic):
        with pytest.raises(UnstablePhaseError):
            f(c)
    # stability factor exactly zero is still UP
    assert crit.classify_phase(CI(0.0, 0.0, 0.25)) is PhaseLabel.UP


def test_squeezing_parameter_matches_stability():
    c = CI(0.4, alpha=0.5, chi_over_omega=0.1)
    assert math.exp(-4 * crit.squeezing_parameter(c)) == pytest.approx(crit.stability_factor(c))


def test_directions():
    assert crit.transition_direction(0.0, 0.245) == "forward"
    assert crit.transition_direction(1.5, 0.26) == "reversed"
    g = crit.critical_coupling(1.5, 0.26)
    assert crit.classify_phase(CI(g * 0.95, 1.5, 0.26)) is PhaseLabel.SP
    assert crit.classify_phase(CI(g * 1.05, 1.5, 0.26)) is PhaseLabel.NP


def test_from_params_agrees():
    p = from_ratios(0.8, alpha=0.3, chi_over_omega=0.12)
    c = CI.from_params(p)
    assert c.g_bar == pytest.approx(0.8)
    assert c.chi_over_omega == pytest.approx(0.12)


@given(st.floats(0.0, 0.999), st.floats(0.0, 0.2499))
def test_critical_coupling_is_fixed_point(alpha, x):
    g = crit.critical_coupling(alpha, x)
    assert g is not None
    assert crit.rescaled_coupling(CI(g, alpha, x)) == pytest.approx(1.0, rel=1e-9)


@given(st.floats(1.0, 50.0), st.floats(1e-6, 1e6))
def test_no_go_without_kerr(alpha, g):
    assert crit.rescaled_coupling(CI(g, alpha, 0.0)) < 1.0


@given(st.floats(0, 5), st.floats(0, 3), st.floats(0, 1))
def test_boundaries_bracket_labels(g, alpha, x):
    c = CI(g, alpha, x)
    label = crit.classify_phase(c)
    s = crit.stability_factor(c)
    assume(abs(s) > 1e-9 and abs(x - crit.np_sp_boundary_chi(g, alpha)) > 1e-9)
    if x >= crit.sp_up_boundary_chi(g, alpha):
        assert label is PhaseLabel.UP
    elif x > crit.np_sp_boundary_chi(g, alpha):
        assert label is PhaseLabel.SP
    else:
        assert label is PhaseLabel.NP


@given(st.floats(1.0001, 100))
def test_order_parameter_positive_in_sp(G):
    xi = crit.order_parameter_from_rescaled(G)
    assert xi > 0
    assert xi == pytest.approx((G * G - 1 / (G * G)) / 4)


def test_regime_forms():
    assert crit.regime_threshold(0.01) == pytest.approx(0.0612372, abs=1e-6)
    ratios = np.geomspace(1e-3, 10, 60)
    gms = np.linspace(0, 2, 60)
    for r in ratios:
        for gm in gms:
            assert crit.regime_condition(r, 1.0, gm, 1.0) == crit.regime_condition_ratio(r, 1.0, gm, 1.0)
    with pytest.raises(ValueError):
        crit.regime_condition(1.0, 0.0, 0.1, 1.0)
