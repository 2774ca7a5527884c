import math

import numpy as np
import pytest

from kerrspt import criticality as crit
from kerrspt.criticality import PhaseLabel
from kerrspt.io import read_csv
from kerrspt.spectra import CutoffPolicy
from kerrspt.sweep import (GridSpec, analytic_boundaries, critical_from_scan, evaluate_point,
                           extract_critical_line, regime_map, run_grid)


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec("bogus", (0, 1, 3))
    with pytest.raises(ValueError):
        GridSpec("g_bar", (1, 0, 3))
    with pytest.raises(ValueError):
        GridSpec("g_bar", (0, 1, 1))
    with pytest.raises(ValueError):
        GridSpec("g_bar", (0, 1, 3), "g_bar", (0, 1, 3))
    with pytest.raises(ValueError):
        GridSpec("g_bar", (0, 1, 3), fixed={"g_bar": 1})
    with pytest.raises(ValueError):
        GridSpec("g_bar", (0, 1, 3), mode="fast")
    assert list(GridSpec("g_bar", (0.5, 0.5, 1)).axis("x")) == [0.5]


def test_row_major_order():
    t = run_grid(GridSpec("g_bar", (0, 1, 3), "chi_over_omega", (0, 0.2, 2)))
    assert [(p.x, p.y) for p in t.points] == [(0, 0), (0.5, 0), (1, 0), (0, 0.2), (0.5, 0.2), (1, 0.2)]
    assert t.grid().shape == (2, 3)


def test_analytic_points():
    up = evaluate_point({"g_bar": 0.1, "alpha": 0.0, "chi_over_omega": 0.3, "omega_over_Omega": 1e-3})
    assert up.phase is PhaseLabel.UP and up.xi is None
    sp = evaluate_point({"g_bar": 1.5, "alpha": 0.0, "chi_over_omega": 0.0, "omega_over_Omega": 1e-3})
    assert sp.phase is PhaseLabel.SP
    assert sp.xi == pytest.approx((1.5**2 - 1.5**-2) / 4)


def test_numeric_point_failure_is_recorded():
    pol = CutoffPolicy(dim_cap=10)
    pt = evaluate_point({"g_bar": 1.2, "alpha": 0.0, "chi_over_omega": 0.0, "omega_over_Omega": 1e-3},
                        mode="numeric-ED", policy=pol)
    assert pt.error and "DimensionCapError" in pt.error
    assert pt.xi is None and not pt.converged


@pytest.mark.parametrize("alpha", [0.0, 1.5])
def test_boundaries_within_one_cell(alpha):
    n = 60
    t = run_grid(GridSpec("g_bar", (0, 1.5, n), "chi_over_omega", (0, 0.5, n), fixed={"alpha": alpha}))
    cell = 1.5 / (n - 1)
    for kind in ("NP/SP", "SP/UP"):
        line = extract_critical_line(t, kind)
        # at alpha = 0 the stability edge chi/omega = 1/4 does not depend on g_bar
        assert bool(line) == (kind == "NP/SP" or alpha > 0)
        for g, chi in line:
            # exact g_bar on this row
            if kind == "SP/UP":
                g_ex = math.sqrt(max(4 * chi - 1, 0) / alpha) if alpha else None
            else:
                q = (1 - 4 * chi) / (1 - alpha)
                g_ex = math.sqrt(q) if q > 0 else None
            if g_ex is not None:
                assert abs(g - g_ex) <= cell


def test_parallel_matches_serial():
    spec = GridSpec("g_bar", (0, 2, 9), "chi_over_omega", (0, 0.3, 4), fixed={"alpha": 0.5})
    a = run_grid(spec)
    b = run_grid(spec, jobs=2)
    assert a.to_csv({"x": 1}) == b.to_csv({"x": 1})


def test_critical_from_scan_directions():
    g = np.linspace(0, 2, 41)
    xi = [crit.order_parameter_from_rescaled(x) for x in g]
    gc, d = critical_from_scan(g, xi, threshold=1e-12)
    assert d == "forward" and gc == pytest.approx(1.0, abs=0.05)
    gc, d = critical_from_scan(g[::-1], xi[::-1], threshold=1e-12)
    assert d == "reversed"
    assert critical_from_scan(g, [0.0] * len(g)) == (None, None)
    assert critical_from_scan(g, [None] * len(g)) == (None, None)


def test_analytic_boundaries_polylines():
    b = analytic_boundaries(0.0, [0.0, 1.0, 2.0])
    assert b["NP/SP"] == [(0.0, 0.25), (1.0, 0.0)]
    assert b["SP/UP"][2] == (2.0, 0.25)


def test_regime_map_and_csv(tmp_path):
    tab = regime_map("omega_over_omega_m", np.linspace(0.01, 1, 20), np.linspace(0, 0.5, 20))
    assert all(r.forms_agree for r in tab.rows)
    assert tab.boundary[0][1] == pytest.approx(0.0612372, abs=1e-6)
    p = tmp_path / "r.csv"
    p.write_text(tab.to_csv({"k": 1}))
    cols, rows = read_csv(p)
    assert cols[0] == "omega_over_omega_m" and len(rows) == 400
    with pytest.raises(ValueError):
        regime_map("kappa", [1], [1])


def test_sweep_csv_deterministic():
    spec = GridSpec("g_bar", (0, 1.5, 5), fixed={"chi_over_omega": 0.1})
    assert run_grid(spec).to_csv({"a": 1}) == run_grid(spec).to_csv({"a": 1})
    assert '"n_failed": 0' in run_grid(spec).sidecar()
