import json

import pytest

from kerrspt.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main, resolve
from kerrspt.io import read_csv

YIG = ["--set", "gamma=28", "--set", "B0=0.1", "--set", "mu0=1.2566e-6", "--set", "M=1.4e5",
       "--set", "V_m=1e-7"]


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path), "--quiet"])


def test_precedence(tmp_path):
    f = tmp_path / "c.cfg"
    f.write_text("alpha = 0.5\ng_bar_count = 7\n")
    cfg = resolve("phase-diagram", {"alpha": "0.5", "g_bar_count": "7"}, {"alpha": "1.5"})
    assert cfg["alpha"] == 1.5 and cfg["g_bar_count"] == 7 and cfg["chi_count"] == 200


@pytest.mark.parametrize("argv", [
    ["regime"],
    ["regime", "--set", "bogus=1"],
    ["regime", "--set", "omega_m"],
    ["regime", "--set", "omega_m=1", "--set", "x_min=-1"],
    ["spectrum", "--set", "builder=magic"],
    ["order-parameter", "--set", "mode=fast"],
    ["materials", "--set", "gamma=1"],
    ["nonsense"],
])
def test_usage_errors(tmp_path, argv):
    assert run(tmp_path, *argv) == EXIT_USAGE


def test_missing_config_file(tmp_path):
    assert run(tmp_path, "regime", "--config", str(tmp_path / "nope.cfg")) == EXIT_USAGE


def test_regime_outputs_reproducible(tmp_path):
    args = ["regime", "--set", "axis=omega_over_omega_m", "--set", "x_count=20", "--set", "g_m_count=20"]
    assert run(tmp_path, *args) == EXIT_OK
    first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    assert set(first) == {"regime.csv", "regime_boundary.csv", "regime.json"}
    assert run(tmp_path, *args) == EXIT_OK
    assert first == {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    cols, rows = read_csv(tmp_path / "regime_boundary.csv")
    assert cols == ["omega_over_omega_m", "g_m_threshold"]
    assert float(rows[0][1]) == pytest.approx(0.0612372, abs=1e-6)


def test_phase_diagram(tmp_path):
    assert run(tmp_path, "phase-diagram", "--set", "alpha=1.5", "--set", "g_bar_count=30",
               "--set", "chi_count=30") == EXIT_OK
    cols, rows = read_csv(tmp_path / "phase_diagram.csv")
    assert cols[:4] == ["g_bar", "chi_over_omega", "xi", "phase"] and len(rows) == 900
    _, line = read_csv(tmp_path / "critical_line.csv")
    assert {r[0] for r in line} == {"NP/SP", "SP/UP"}
    side = json.loads((tmp_path / "phase_diagram.json").read_text())
    assert side["n_failed"] == 0 and side["grid_spec"]["fixed"]["alpha"] == 1.5


def test_phase_diagram_failures_exit_3(tmp_path):
    argv = ["phase-diagram", "--set", "mode=numeric", "--set", "g_bar_min=1.2", "--set", "g_bar_max=1.3",
            "--set", "g_bar_count=2", "--set", "chi_min=0", "--set", "chi_max=0", "--set", "chi_count=1",
            "--set", "dim_cap=20"]
    assert run(tmp_path, *argv) == EXIT_NUMERIC
    assert run(tmp_path, *argv, "--set", "max_error_rate=1") == EXIT_OK


def test_order_parameter(tmp_path, capsys):
    assert main(["order-parameter", "--set", "chi_over_omega=0.245", "--set", "g_bar_count=11",
                 "--set", "g_bar_max=1", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "0.141421" in out and "forward" in out
    rep = json.loads((tmp_path / "order_parameter.json").read_text())
    assert rep["direction"] == "forward"


def test_spectrum_commands(tmp_path):
    assert run(tmp_path, "spectrum", "--set", "g=0.4", "--set", "n_cavity=20") == EXIT_OK
    _, rows = read_csv(tmp_path / "spectrum_rabi.csv")
    assert len(rows) == 6
    gs = json.loads((tmp_path / "ground_state.json").read_text())
    assert gs["cutoff_used"]["n_cavity"] == 20
    assert run(tmp_path, "spectrum", "--set", "builder=both", "--set", "g_bar=0.8",
               "--set", "chi_over_omega=0.1", "--set", "k=3") == EXIT_OK
    eq = json.loads((tmp_path / "equivalence.json").read_text())
    assert eq["max_rel_gap"] < 1e-6
    assert run(tmp_path, "spectrum", "--set", "builder=squeezed", "--set", "g_bar=0.1",
               "--set", "chi_over_omega=0.3") == EXIT_NUMERIC


def test_dynamics(tmp_path):
    base = ["dynamics", "--set", "g=0.3", "--set", "omega_m=3", "--set", "K=-0.5", "--set", "g_m=0.3",
            "--set", "kappa_m=2", "--set", "s_x=0.5", "--set", "t_end=2", "--set", "dt=0.01"]
    for model in ("full", "effective"):
        assert run(tmp_path, *base, "--set", f"model={model}") == EXIT_OK
        cols, rows = read_csv(tmp_path / "trajectory.csv")
        assert cols == ["t", "re_a", "im_a", "re_m", "im_m"] and len(rows) == 201
    # A^2 dominated unstable cavity without damping
    assert run(tmp_path, "dynamics", "--set", "g_m=0.5", "--set", "omega_m=1", "--set", "K=-0.1",
               "--set", "kappa_m=0.2", "--set", "s_x=0.5", "--set", "g=0.1",
               "--set", "t_end=1e4", "--set", "model=effective") == EXIT_NUMERIC


def test_validate(tmp_path):
    assert run(tmp_path, "validate") == EXIT_OK
    cols, rows = read_csv(tmp_path / "elimination_error.csv")
    assert cols == ["kappa_m_over_g_m", "rel_error"] and len(rows) == 3
    assert run(tmp_path, "validate", "--set", "metric=steady") == EXIT_NUMERIC


def test_materials(tmp_path):
    assert run(tmp_path, "materials", *YIG, "--set", "K_an=-610") == EXIT_OK
    rep = json.loads((tmp_path / "materials.json").read_text())
    assert rep["identity"]["holds"] and rep["K"] < 0
    assert run(tmp_path, "materials", *YIG, "--set", "K_an=610") == EXIT_NUMERIC
    rep = json.loads((tmp_path / "materials.json").read_text())
    assert "constraint_error" in rep


def test_ghz_units_scale_free(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["spectrum", "--set", "g=0.4", "--set", "Omega=1", "--set", "omega=1", "-o", str(a), "-q"]) == 0
    assert main(["spectrum", "--set", "units=GHz", "--set", "g=2", "--set", "Omega=5", "--set", "omega=5",
                 "-o", str(b), "-q"]) == 0
    ea = json.loads((a / "ground_state.json").read_text())["energy"]
    eb = json.loads((b / "ground_state.json").read_text())["energy"]
    assert ea == pytest.approx(eb, rel=1e-12)
