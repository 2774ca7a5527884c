"""Command-line entry point.

Every command reads an optional flat ``key = value`` file (``--config``)
and ``--set key=value`` overrides, in that order of precedence over the
built-in defaults.  Outputs are CSV/JSON files in ``--out``.

Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import criticality as crit
from . import langevin as lv
from . import spectra as sx
from .config import ConfigError, read_config, to_internal_units
from .errors import KerrSPTError
from .fock import DEFAULT_DIM_CAP, FockCutoff
from .io import write_csv, write_json
from .params import (MaterialParams, SystemParams, derive, enforce_constraint, from_ratios,
                     magnon_from_material)
from .sweep import (GridSpec, analytic_boundaries, critical_from_scan, extract_critical_line,
                    regime_map, run_grid)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


def _floats(raw):
    if isinstance(raw, (list, tuple)):
        return [float(v) for v in raw]
    return [float(v) for v in str(raw).replace(";", ",").split(",") if v.strip()]


def _bool(raw):
    if isinstance(raw, bool):
        return raw
    s = str(raw).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _opt_float(raw):
    return None if raw in (None, "", "none", "None") else float(raw)


_SYSTEM = {
    "omega": (float, 1.0), "Omega": (float, 1.0), "g": (float, 0.0), "alpha": (float, 0.0),
    "omega_m": (float, 0.0), "K": (float, 0.0), "g_m": (float, 0.0), "kappa": (float, 0.0),
    "kappa_m": (float, 1.0), "N_m": (float, 0.0),
}
_COMMON = {"units": (str, "dimensionless"), "reference": (_opt_float, None),
           "max_error_rate": (float, 0.0)}
_ED = {"tol": (float, 1e-4), "dim_cap": (int, DEFAULT_DIM_CAP)}

SCHEMAS = {
    "regime": {
        "axis": (str, "omega"), "omega": (_opt_float, None), "omega_m": (_opt_float, None),
        "kappa_m": (float, 1.0), "x_min": (float, 0.01), "x_max": (float, 1.0),
        "x_count": (int, 100), "g_m_min": (float, 0.0), "g_m_max": (float, 0.5),
        "g_m_count": (int, 100),
    },
    "phase-diagram": {
        "alpha": (float, 0.0), "g_bar_min": (float, 0.0), "g_bar_max": (float, 1.5),
        "g_bar_count": (int, 200), "chi_min": (float, 0.0), "chi_max": (float, 0.5),
        "chi_count": (int, 200), "mode": (str, "analytic"), "omega_over_Omega": (float, 1e-3),
        **_ED,
    },
    "order-parameter": {
        "alpha": (float, 0.0), "chi_over_omega": (float, 0.0), "g_bar_min": (float, 0.0),
        "g_bar_max": (float, 2.0), "g_bar_count": (int, 201), "mode": (str, "analytic"),
        "omega_over_Omega": (float, 1e-3), **_ED,
    },
    "spectrum": {
        **_SYSTEM, "g_bar": (_opt_float, None), "chi_over_omega": (_opt_float, None),
        "builder": (str, "rabi"), "n_cavity": (int, 64), "n_magnon": (int, 8), "k": (int, 6),
        "enforce_constraint": (_bool, True), "equivalence_tol": (float, 1e-10),
        "dim_cap": (int, DEFAULT_DIM_CAP),
    },
    "dynamics": {
        **_SYSTEM, "s_x": (float, 0.0), "model": (str, "full"), "dt": (_opt_float, None),
        "t_end": (float, 100.0), "stride": (int, 1), "bound": (float, lv.DEFAULT_BOUND),
        "a0_re": (float, 0.0), "a0_im": (float, 0.0), "m0_re": (float, 0.0),
        "m0_im": (float, 0.0), "enforce_constraint": (_bool, True),
    },
    "validate": {
        **_SYSTEM, "g": (float, 0.3), "alpha": (float, 0.5), "omega_m": (float, 3.0),
        "K": (float, -0.5), "g_m": (float, 0.4), "kappa": (float, 0.2), "kappa_m": (float, 4.0),
        "s_x": (float, 0.5), "ratios": (_floats, [10.0, 20.0, 40.0]), "metric": (str, "transient"),
        "max_final": (float, 0.01), "factor_min": (float, 2.0), "factor_max": (float, 8.0),
        "t_end": (_opt_float, None), "dt": (_opt_float, None),
    },
    "materials": {
        "gamma": (float, None), "B0": (float, None), "mu0": (float, None), "K_an": (float, None),
        "M": (float, None), "V_m": (float, None), "rho_s": (float, 2.1e22), "s": (float, 0.5),
        "g_m": (_opt_float, None), "kappa_m": (_opt_float, None), "omega": (_opt_float, None),
    },
}


def resolve(command: str, file_values: dict, overrides: dict) -> dict:
    """Merge defaults < file < overrides and coerce types; unknown keys are usage errors."""
    schema = {**_COMMON, **SCHEMAS[command]}
    merged = {k: d for k, (_, d) in schema.items()}
    for source in (file_values, overrides):
        unknown = sorted(set(source) - set(schema))
        if unknown:
            raise UsageError(f"unknown keys for '{command}': {', '.join(unknown)}")
        for k, raw in source.items():
            conv = schema[k][0]
            try:
                merged[k] = conv(raw)
            except (TypeError, ValueError) as exc:
                raise UsageError(f"{k}: {exc}") from None
    return merged


def _system(cfg: dict, constrain: bool) -> SystemParams:
    vals = {k: cfg[k] for k in _SYSTEM}
    vals = to_internal_units(vals, cfg["units"], cfg["reference"])
    try:
        p = SystemParams(**vals)
    except ValueError as exc:
        raise UsageError(f"invalid parameters: {exc}") from None
    if constrain and p.K < 0 and p.omega_m > 0:
        p = enforce_constraint(p)
    return p


def _say(args, msg):
    if not args.quiet:
        print(msg)


# ---------------------------------------------------------------------------
# commands

def cmd_regime(cfg, out: Path, args) -> int:
    axis = cfg["axis"]
    if axis == "omega" and cfg["omega_m"] is None:
        raise UsageError("regime along omega needs omega_m")
    if axis == "omega_m" and cfg["omega"] is None:
        raise UsageError("regime along omega_m needs omega")
    if axis not in ("omega", "omega_m", "omega_over_omega_m"):
        raise UsageError(f"axis must be omega, omega_m or omega_over_omega_m, got {axis!r}")
    if cfg["x_count"] < 1 or cfg["g_m_count"] < 1 or cfg["x_min"] <= 0 or cfg["x_max"] < cfg["x_min"]:
        raise UsageError("invalid regime ranges (need 0 < x_min <= x_max and counts >= 1)")
    if cfg["g_m_max"] < cfg["g_m_min"] or cfg["kappa_m"] <= 0:
        raise UsageError("invalid g_m range or kappa_m")
    xs = np.linspace(cfg["x_min"], cfg["x_max"], cfg["x_count"])
    gms = np.linspace(cfg["g_m_min"], cfg["g_m_max"], cfg["g_m_count"])
    fixed = {"kappa_m": cfg["kappa_m"]}
    if cfg["omega"] is not None:
        fixed["omega"] = cfg["omega"]
    if cfg["omega_m"] is not None:
        fixed["omega_m"] = cfg["omega_m"]
    table = regime_map(axis, xs, gms, fixed)
    (out / "regime.csv").write_text(table.to_csv(cfg))
    (out / "regime_boundary.csv").write_text(table.boundary_csv(cfg))
    write_json(out / "regime.json", {"command": "regime", "config": cfg,
                                     "restored_points": sum(r.restored for r in table.rows),
                                     "n_points": len(table.rows)}, cfg)
    _say(args, f"regime map: {sum(r.restored for r in table.rows)}/{len(table.rows)} points restored")
    return EXIT_OK


def _policy(cfg):
    return sx.CutoffPolicy(tol=cfg["tol"], dim_cap=cfg["dim_cap"])


def _error_rate_exit(n_failed, n_total, cfg):
    rate = n_failed / n_total if n_total else 0.0
    return EXIT_NUMERIC if rate > cfg["max_error_rate"] else EXIT_OK


def cmd_phase_diagram(cfg, out: Path, args) -> int:
    mode = {"numeric": "numeric-ED"}.get(cfg["mode"], cfg["mode"])
    try:
        spec = GridSpec(
            "g_bar", (cfg["g_bar_min"], cfg["g_bar_max"], cfg["g_bar_count"]),
            "chi_over_omega", (cfg["chi_min"], cfg["chi_max"], cfg["chi_count"]),
            fixed={"alpha": cfg["alpha"], "omega_over_Omega": cfg["omega_over_Omega"]},
            mode=mode, policy=_policy(cfg),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    table = run_grid(spec, jobs=args.jobs)
    (out / "phase_diagram.csv").write_text(table.to_csv(cfg))
    (out / "phase_diagram.json").write_text(table.sidecar(cfg))
    lines = [(kind, x, y) for kind in ("NP/SP", "SP/UP") for x, y in extract_critical_line(table, kind)]
    write_csv(out / "critical_line.csv", ["kind", "g_bar", "chi_over_omega"], lines, cfg)
    closed = analytic_boundaries(cfg["alpha"], table.xs)
    write_csv(out / "boundaries.csv", ["kind", "g_bar", "chi_over_omega"],
              [(k, x, y) for k in ("NP/SP", "SP/UP") for x, y in closed[k]], cfg)
    counts = {lab: sum(p.phase.value == lab for p in table.points) for lab in ("NP", "SP", "UP")}
    _say(args, f"phase diagram alpha={cfg['alpha']:g}: " + " ".join(f"{k}={v}" for k, v in counts.items())
         + (f" failed={table.n_failed}" if table.n_failed else ""))
    return _error_rate_exit(table.n_failed, len(table.points), cfg)


def cmd_order_parameter(cfg, out: Path, args) -> int:
    mode = cfg["mode"]
    if mode not in ("analytic", "numeric", "both"):
        raise UsageError(f"mode must be analytic, numeric or both, got {mode!r}")
    try:
        spec_a = GridSpec("g_bar", (cfg["g_bar_min"], cfg["g_bar_max"], cfg["g_bar_count"]),
                          fixed={"alpha": cfg["alpha"], "chi_over_omega": cfg["chi_over_omega"],
                                 "omega_over_Omega": cfg["omega_over_Omega"]})
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ana = run_grid(spec_a)
    num = None
    if mode in ("numeric", "both"):
        num = run_grid(GridSpec(spec_a.x_name, spec_a.x_range, fixed=spec_a.fixed,
                                mode="numeric-ED", policy=_policy(cfg)), jobs=args.jobs)
    rows = []
    for k, pa in enumerate(ana.points):
        pn = num.points[k] if num else None
        rows.append([pa.x, pa.xi_analytic if pa.phase.value != "UP" else None,
                     None if pn is None else pn.xi, pa.phase.value,
                     None if pn is None else pn.phase.value,
                     True if pn is None else pn.converged])
    write_csv(out / "order_parameter.csv",
              ["g_bar", "xi_analytic", "xi_numeric", "phase_analytic", "phase_numeric", "converged"],
              rows, cfg)
    gc = crit.critical_coupling(cfg["alpha"], cfg["chi_over_omega"])
    direction = crit.transition_direction(cfg["alpha"], cfg["chi_over_omega"])
    report = {"g_bar_c_analytic": gc, "direction": direction}
    gc_txt = "none" if gc is None else f"{gc:.6g}"
    msg = f"g_bar_c = {gc_txt} (analytic)"
    if num is not None:
        gcn, dirn = critical_from_scan(num.xs, [p.xi for p in num.points])
        report.update({"g_bar_c_numeric": gcn, "direction_numeric": dirn,
                       "n_failed": num.n_failed})
        msg += f"; {'none' if gcn is None else f'{gcn:.6g}'} (numeric)"
    msg += f"; direction = {direction or 'none'}"
    write_json(out / "order_parameter.json", report, cfg)
    _say(args, msg)
    if num is not None:
        return _error_rate_exit(num.n_failed, len(num.points), cfg)
    return EXIT_OK


_BUILDERS = {
    "rabi": sx.build_rabi,
    "at": sx.build_at,
    "effective": sx.build_effective,
    "squeezed": sx.build_squeezed_qrm,
    "full": sx.build_full,
}


def _rabi_at(p, cutoff, sparse=None):
    return sx.build_rabi(p, cutoff, sparse) + sx.build_at(p, cutoff, sparse)


_BUILDERS["rabi_at"] = _rabi_at


def _spectrum_params(cfg):
    if cfg["g_bar"] is not None or cfg["chi_over_omega"] is not None:
        vals = to_internal_units({"omega": cfg["omega"], "Omega": cfg["Omega"]},
                                 cfg["units"], cfg["reference"])
        return from_ratios(g_bar=cfg["g_bar"] or 0.0, alpha=cfg["alpha"],
                           chi_over_omega=cfg["chi_over_omega"] or 0.0,
                           omega=vals["omega"], Omega=vals["Omega"])
    return _system(cfg, cfg["enforce_constraint"])


def cmd_spectrum(cfg, out: Path, args) -> int:
    p = _spectrum_params(cfg)
    builder = cfg["builder"]
    if builder == "both":
        rep = sx.unitary_equivalence(p, k=cfg["k"], tol=cfg["equivalence_tol"], dim_cap=cfg["dim_cap"])
        write_csv(out / "spectrum_effective.csv", ["index", "eigenvalue"], enumerate(rep["effective"]), cfg)
        write_csv(out / "spectrum_squeezed.csv", ["index", "eigenvalue"], enumerate(rep["squeezed"]), cfg)
        write_json(out / "equivalence.json", rep, cfg)
        _say(args, f"max relative eigenvalue gap = {rep['max_rel_gap']:.3e} "
                   f"(zero-point shift {rep['zero_point_shift']:.9g})")
        return EXIT_OK if rep["converged"] else EXIT_NUMERIC
    if builder not in _BUILDERS:
        raise UsageError(f"unknown builder {builder!r}; choose from {sorted(_BUILDERS) + ['both']}")
    n_mag = cfg["n_magnon"] if builder == "full" else 0
    try:
        cutoff = FockCutoff(cfg["n_cavity"], n_mag, cfg["dim_cap"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    H = _BUILDERS[builder](p, cutoff)
    vals, _ = sx.lowest_eigenpairs(H, k=cfg["k"])
    write_csv(out / f"spectrum_{builder}.csv", ["index", "eigenvalue"], enumerate(vals.tolist()), cfg)
    gs = sx.ground_state(H, cutoff=cutoff)
    write_json(out / "ground_state.json", gs.to_dict(), cfg)
    _say(args, f"{builder}: E0 = {gs.energy:.12g}, <n> = {gs.n_photon:.6g}, <P> = {gs.parity:.6g}")
    return EXIT_OK


def cmd_dynamics(cfg, out: Path, args) -> int:
    p = _system(cfg, cfg["enforce_constraint"])
    drive = lv.SpinDrive(cfg["s_x"])
    model = cfg["model"]
    if model == "full":
        flow = lv.full_flow(p, drive)
        init = lv.MeanFieldState(complex(cfg["a0_re"], cfg["a0_im"]), complex(cfg["m0_re"], cfg["m0_im"]))
    elif model == "effective":
        flow = lv.effective_flow(p, drive)
        init = lv.MeanFieldState(complex(cfg["a0_re"], cfg["a0_im"]))
    else:
        raise UsageError(f"model must be full or effective, got {model!r}")
    dt = cfg["dt"] or lv.default_dt(p)
    tr = lv.integrate(flow, init, dt, cfg["t_end"], bound=cfg["bound"], stride=cfg["stride"])
    if model == "full":
        m = tr.m
    else:
        m = np.array([lv.eliminated_magnon(a, p) for a in tr.a]) if p.g_m else np.zeros(len(tr), complex)
    rows = ((t, a.real, a.imag, mm.real, mm.imag) for t, a, mm in zip(tr.t, tr.a, m))
    write_csv(out / "trajectory.csv", ["t", "re_a", "im_a", "re_m", "im_m"], rows, cfg)
    _say(args, f"{model} trajectory: {len(tr)} samples, dt = {tr.dt:.6g}, backend = {tr.backend}, "
               f"a(t_end) = {tr.a[-1]:.9g}")
    return EXIT_OK


def cmd_validate(cfg, out: Path, args) -> int:
    p = _system(cfg, True)
    drive = lv.SpinDrive(cfg["s_x"])
    if cfg["metric"] not in ("steady", "transient"):
        raise UsageError(f"metric must be steady or transient, got {cfg['metric']!r}")
    rows = lv.elimination_error(p, drive, cfg["ratios"], metric=cfg["metric"],
                                t_end=cfg["t_end"], dt=cfg["dt"])
    write_csv(out / "elimination_error.csv", ["kappa_m_over_g_m", "rel_error"], rows, cfg)
    if p.g_m == 0:
        verdict = {"pass": all(e == 0 for _, e in rows), "decoupled": True}
    else:
        verdict = lv.elimination_verdict(rows, cfg["max_final"], (cfg["factor_min"], cfg["factor_max"]))
    write_json(out / "validate.json", {"metric": cfg["metric"], "rows": rows, "verdict": verdict}, cfg)
    for r, e in rows:
        _say(args, f"kappa_m/g_m = {r:g}: rel_error = {e:.6e}")
    _say(args, f"verdict: {'PASS' if verdict['pass'] else 'FAIL'}")
    return EXIT_OK if verdict["pass"] else EXIT_NUMERIC


def cmd_materials(cfg, out: Path, args) -> int:
    keys = ("gamma", "B0", "mu0", "K_an", "M", "V_m")
    missing = [k for k in keys if cfg[k] is None]
    if missing:
        raise UsageError(f"materials needs {', '.join(missing)}")
    try:
        mat = MaterialParams(**{k: cfg[k] for k in (*keys, "rho_s", "s")})
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"invalid material parameters: {exc}") from None
    omega_m, K = magnon_from_material(mat)
    identity_rhs = mat.gamma * mat.B0 + K * (1.0 - mat.rho_s * mat.s * mat.V_m**2)
    scale = max(abs(omega_m), abs(identity_rhs), abs(mat.gamma * mat.B0), abs(K), 1e-300)
    identity_ok = abs(omega_m - identity_rhs) <= 1e-12 * scale
    report = {"material": mat.as_dict(), "omega_m": omega_m, "K": K,
              "identity": {"lhs": omega_m, "rhs": identity_rhs, "holds": identity_ok}}
    code = EXIT_OK
    try:
        base = SystemParams(omega=cfg["omega"] or 1.0, omega_m=omega_m, K=K,
                            g_m=cfg["g_m"] or 0.0, kappa_m=cfg["kappa_m"] or 1.0)
        q = enforce_constraint(base)
        d = derive(q)
        report["constraint"] = {"N_m": q.N_m, "Delta_m": d.Delta_m, "mean_m": math.sqrt(q.N_m)}
        if cfg["g_m"] is not None and cfg["kappa_m"] is not None:
            report["constraint"].update({"eta": d.eta, "chi": d.chi})
            if cfg["omega"] is not None:
                report["constraint"]["chi_over_omega"] = d.chi / cfg["omega"]
    except (KerrSPTError, ValueError) as exc:
        report["constraint_error"] = str(exc)
        code = EXIT_NUMERIC
    write_json(out / "materials.json", report, cfg)
    _say(args, f"omega_m = {omega_m:.9g}, K = {K:.9g}")
    _say(args, f"identity omega_m = gamma*B0 + K*(1 - rho_s*s*V_m^2): "
               f"{omega_m:.9g} vs {identity_rhs:.9g} -> {'ok' if identity_ok else 'MISMATCH'}")
    if "constraint_error" in report:
        _say(args, f"constraint: {report['constraint_error']}")
    else:
        c = report["constraint"]
        _say(args, f"constraint: N_m = {c['N_m']:.9g}, Delta_m = {c['Delta_m']:.9g}")
    if not identity_ok:
        code = EXIT_NUMERIC
    return code


COMMANDS = {
    "regime": cmd_regime,
    "phase-diagram": cmd_phase_diagram,
    "order-parameter": cmd_order_parameter,
    "spectrum": cmd_spectrum,
    "dynamics": cmd_dynamics,
    "validate": cmd_validate,
    "materials": cmd_materials,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kerrspt", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"kerrspt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=COMMANDS[name].__doc__)
        sp.add_argument("--config", "-c", help="flat key = value configuration file")
        sp.add_argument("--set", "-s", action="append", default=[], metavar="KEY=VALUE",
                        help="override a configuration value (repeatable)")
        sp.add_argument("--out", "-o", default=".", help="output directory")
        sp.add_argument("--jobs", "-j", type=int, default=1, help="worker processes for grids")
        sp.add_argument("--quiet", "-q", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        file_values = read_config(args.config) if args.config else {}
        overrides = {}
        for item in args.set:
            if "=" not in item:
                raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
            k, v = item.split("=", 1)
            overrides[k.strip()] = v.strip()
        cfg = resolve(args.command, file_values, overrides)
        cfg_doc = {"command": args.command, **cfg}
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg_doc, out, args)
    except (UsageError, ConfigError, FileNotFoundError) as exc:
        print(f"kerrspt: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (KerrSPTError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"kerrspt: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"kerrspt: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
