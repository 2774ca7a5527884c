import math

import numpy as np
import pytest

from kerrspt import spectra as sx
from kerrspt.errors import ConstraintError, UnstablePhaseError
from kerrspt.fock import FockCutoff
from kerrspt.params import SystemParams, derive, enforce_constraint, from_ratios


def _rabi_reference(omega, Omega, g, n):
    a = np.diag(np.sqrt(np.arange(1, n + 1)), 1)
    sz = np.diag([1.0, -1.0])
    sx_ = np.array([[0.0, 1.0], [1.0, 0.0]])
    return (omega * np.kron(np.eye(2), a.T @ a) + Omega / 2 * np.kron(sz, np.eye(n + 1))
            + g * np.kron(sx_, a + a.T))


def test_rabi_matches_reference():
    p = SystemParams(omega=1.0, Omega=1.3, g=0.4)
    H = sx.build_rabi(p, FockCutoff(20))
    np.testing.assert_allclose(H.to_dense(), _rabi_reference(1.0, 1.3, 0.4, 20), atol=1e-14)
    assert H.is_hermitian()


def test_uncoupled_ground_state():
    p = SystemParams(omega=1.0, Omega=2.0)
    cut = FockCutoff(8)
    gs = sx.ground_state(sx.build_rabi(p, cut), cutoff=cut)
    assert gs.energy == pytest.approx(-1.0)
    assert gs.n_photon == pytest.approx(0.0, abs=1e-14)
    assert gs.sz == pytest.approx(-1.0)
    assert gs.parity == pytest.approx(-1.0)


def test_quadratic_oscillator_energy():
    # g = 0: only the cavity quadratic form survives
    chi = 0.15
    p = SystemParams(omega=1.0, Omega=1.0)
    cut = FockCutoff(60)
    vals, _ = sx.lowest_eigenpairs(sx.build_effective(p, cut, chi=chi), k=1)
    w_t = math.sqrt(1.0 - 4 * chi)
    assert vals[0] == pytest.approx((w_t - 1.0) / 2 - 0.5, abs=1e-10)


def test_at_term():
    p = SystemParams(omega=1.0, Omega=2.0, g=0.5, alpha=1.5)
    cut = FockCutoff(6)
    at = sx.build_at(p, cut).to_dense()
    x = np.diag(np.sqrt(np.arange(1, 7)), 1)
    x = x + x.T
    np.testing.assert_allclose(at, 1.5 * 0.25 / 2.0 * np.kron(np.eye(2), x @ x), atol=1e-14)


def test_full_reduces_without_magnon_coupling():
    p = SystemParams(omega=1.0, Omega=1.0, g=0.3, alpha=0.5, omega_m=2.0, K=-0.1)
    cut = FockCutoff(10, 3)
    H = sx.build_full(p, cut).to_dense()
    base = (sx.build_rabi(p, FockCutoff(10)) + sx.build_at(p, FockCutoff(10))).to_dense()
    nm = np.arange(4.0)
    mag = np.diag(2.0 * nm - 0.1 * nm**2)
    expected = np.kron(base, np.eye(4)) + np.kron(np.eye(22), mag)
    np.testing.assert_allclose(H, expected, atol=1e-13)


def test_effective_requires_constraint():
    p = SystemParams(omega_m=3.0, K=-0.5, g_m=0.3, kappa_m=1.0, N_m=0.2)
    with pytest.raises(ConstraintError):
        sx.build_effective(p, FockCutoff(4))
    sx.build_effective(enforce_constraint(p), FockCutoff(4))
    sx.build_effective(p, FockCutoff(4), chi=0.01)


def test_squeezed_frame_values_and_unstable():
    p = from_ratios(0.6, alpha=0.5, chi_over_omega=0.1)
    s = 1 + 0.5 * 0.36 - 0.4
    w_t, g_t = sx.squeezed_frame(p)
    assert w_t == pytest.approx(math.sqrt(s))
    assert g_t == pytest.approx(p.g * s**-0.25)
    with pytest.raises(UnstablePhaseError):
        sx.squeezed_frame(from_ratios(0.1, chi_over_omega=0.3))


def test_dense_and_iterative_agree():
    p = from_ratios(1.1, alpha=0.2, chi_over_omega=0.05, omega=0.1)
    cut = FockCutoff(300)
    H = sx.build_squeezed_qrm(p, cut)
    vd, _ = sx.lowest_eigenpairs(H, k=4, method="dense")
    vi, _ = sx.lowest_eigenpairs(H, k=4, method="iterative")
    np.testing.assert_allclose(vd, vi, rtol=1e-10)


def test_unitary_equivalence_small():
    p = from_ratios(0.9, alpha=0.4, chi_over_omega=0.12, omega=0.5)
    rep = sx.unitary_equivalence(p, k=4, tol=1e-11)
    assert rep["converged"]
    assert rep["max_rel_gap"] < 1e-8
    assert rep["zero_point_shift"] < 0


def test_converge_cutoff_reports():
    p = from_ratios(1.3, omega=1e-2)
    res = sx.converge_cutoff(sx.build_squeezed_qrm, p, tol=1e-6)
    assert res.converged and res.steps >= 2
    res = sx.converge_cutoff(sx.build_squeezed_qrm, from_ratios(1.5, omega=1e-3), tol=1e-8,
                             dim_cap=200)
    assert not res.converged


def test_parity_symmetry_of_rabi_ground_state():
    p = SystemParams(omega=1.0, Omega=1.0, g=0.8)
    cut = FockCutoff(40)
    gs = sx.ground_state(sx.build_rabi(p, cut), cutoff=cut)
    assert abs(gs.parity) == pytest.approx(1.0, abs=1e-10)
    assert gs.gap > 0 and not gs.near_degenerate
    d = gs.to_dict(include_state=False)
    assert "state" not in d and d["cutoff_used"]["n_cavity"] == 40


@pytest.mark.parametrize("G,expected", [(1.2, (1.44 - 1 / 1.44) / 4), (0.5, 0.0)])
def test_order_parameter_numeric(G, expected):
    p = from_ratios(G, omega=1e-3)
    res = sx.order_parameter_numeric(p)
    assert res.converged
    if expected:
        assert res.xi == pytest.approx(expected, rel=0.05)
    else:
        assert res.xi < 1e-3
