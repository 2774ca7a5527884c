"""Parameter-plane sweeps: phase diagrams, order-parameter scans, regime maps."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import criticality as crit
from .criticality import CriticalityInput, PhaseLabel
from .errors import KerrSPTError
from .io import csv_text, json_text
from .params import from_ratios
from .spectra import CutoffPolicy, order_parameter_numeric

__all__ = [
    "AXES",
    "GridSpec",
    "PhasePoint",
    "SweepTable",
    "RegimeRow",
    "RegimeTable",
    "run_grid",
    "evaluate_point",
    "regime_map",
    "extract_critical_line",
    "analytic_boundaries",
    "critical_from_scan",
    "XI_THRESHOLD",
]

AXES = ("g_bar", "chi_over_omega", "alpha", "omega_over_Omega")
DEFAULTS = {"g_bar": 0.0, "chi_over_omega": 0.0, "alpha": 0.0, "omega_over_Omega": 1e-3}
XI_THRESHOLD = 0.005


@dataclass(frozen=True)
class GridSpec:
    """Axes and fixed values of a sweep.

    Ranges are ``(min, max, count)``; ``count = 1`` evaluates only ``min``.
    ``y_name = None`` gives a one-dimensional scan.
    """

    x_name: str
    x_range: tuple
    y_name: str | None = None
    y_range: tuple | None = None
    fixed: dict = field(default_factory=dict)
    mode: str = "analytic"
    policy: CutoffPolicy = field(default_factory=CutoffPolicy)

    def __post_init__(self):
        names = [self.x_name] + ([self.y_name] if self.y_name else [])
        for n in names:
            if n not in AXES:
                raise ValueError(f"unknown axis {n!r}; choose from {AXES}")
        if self.y_name == self.x_name:
            raise ValueError("x and y axes must differ")
        for k in self.fixed:
            if k not in AXES:
                raise ValueError(f"unknown fixed parameter {k!r}")
            if k in names:
                raise ValueError(f"{k!r} is both an axis and fixed")
        if self.mode not in ("analytic", "numeric-ED"):
            raise ValueError(f"mode must be 'analytic' or 'numeric-ED', got {self.mode!r}")
        _check_range(self.x_name, self.x_range)
        if self.y_name is not None:
            if self.y_range is None:
                raise ValueError("y_range required with y_name")
            _check_range(self.y_name, self.y_range)

    def axis(self, which: str) -> np.ndarray:
        lo, hi, n = self.x_range if which == "x" else self.y_range
        return np.linspace(lo, hi, int(n)) if int(n) > 1 else np.array([float(lo)])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["x_range"] = list(self.x_range)
        d["y_range"] = None if self.y_range is None else list(self.y_range)
        return d


def _check_range(name, r):
    if len(r) != 3:
        raise ValueError(f"{name} range must be (min, max, count)")
    lo, hi, n = r
    if int(n) != n or n < 1:
        raise ValueError(f"{name} count must be a positive integer")
    if n >= 2 and not lo < hi:
        raise ValueError(f"{name} range needs min < max")
    if n == 1 and lo != hi:
        raise ValueError(f"{name}: a single-point axis needs min == max")


@dataclass(frozen=True)
class PhasePoint:
    x: float
    y: float | None
    xi: float | None
    phase: PhaseLabel
    converged: bool = True
    g_tilde_bar: float | None = None
    stability: float | None = None
    xi_analytic: float | None = None
    error: str | None = None


def evaluate_point(values: dict, mode: str = "analytic", policy: CutoffPolicy | None = None,
                   x: float = 0.0, y: float | None = None) -> PhasePoint:
    """Classify one parameter point; failures are captured in ``error``."""
    c = CriticalityInput(g_bar=values["g_bar"], alpha=values["alpha"],
                         chi_over_omega=values["chi_over_omega"])
    s = crit.stability_factor(c)
    phase = crit.classify_phase(c)
    if phase is PhaseLabel.UP:
        return PhasePoint(x, y, None, phase, True, None, s)
    gt = crit.rescaled_coupling(c)
    xi_a = crit.order_parameter_from_rescaled(gt)
    if mode == "analytic":
        return PhasePoint(x, y, xi_a, phase, True, gt, s, xi_a)
    try:
        p = from_ratios(g_bar=c.g_bar, alpha=c.alpha, chi_over_omega=c.chi_over_omega,
                        omega=values["omega_over_Omega"], Omega=1.0)
        res = order_parameter_numeric(p, policy)
    except (KerrSPTError, ValueError, ArithmeticError) as exc:
        return PhasePoint(x, y, None, phase, False, gt, s, xi_a, f"{type(exc).__name__}: {exc}")
    label = PhaseLabel.SP if res.xi > XI_THRESHOLD else PhaseLabel.NP
    return PhasePoint(x, y, res.xi, label, res.converged, gt, s, xi_a)


def _point_task(args):
    values, mode, policy, x, y = args
    return evaluate_point(values, mode, policy, x, y)


@dataclass
class SweepTable:
    spec: GridSpec
    points: list
    xs: np.ndarray
    ys: np.ndarray | None

    @property
    def columns(self) -> list[str]:
        cols = [self.spec.x_name]
        if self.spec.y_name:
            cols.append(self.spec.y_name)
        return cols + ["xi", "phase", "converged", "g_tilde_bar", "stability_factor",
                       "xi_analytic", "error"]

    def rows(self):
        for pt in self.points:
            row = [pt.x] + ([pt.y] if self.spec.y_name else [])
            row += [pt.xi, pt.phase.value, pt.converged, pt.g_tilde_bar, pt.stability,
                    pt.xi_analytic, (pt.error or "").replace(",", ";")]
            yield row

    def to_csv(self, config: dict | None = None) -> str:
        return csv_text(self.columns, self.rows(), config)

    def sidecar(self, config: dict | None = None) -> str:
        return json_text({"grid_spec": self.spec.to_dict(), "n_points": len(self.points),
                          "n_failed": self.n_failed}, config)

    @property
    def n_failed(self) -> int:
        return sum(1 for p in self.points if p.error)

    def grid(self, attr: str = "xi") -> np.ndarray:
        """Values as an ``(ny, nx)`` array (NaN where absent)."""
        ny = 1 if self.ys is None else len(self.ys)
        out = np.full((ny, len(self.xs)), np.nan)
        for k, pt in enumerate(self.points):
            v = getattr(pt, attr)
            if v is not None:
                out[k // len(self.xs), k % len(self.xs)] = float(v)
        return out

    def labels(self) -> list[list[PhaseLabel]]:
        nx = len(self.xs)
        return [[p.phase for p in self.points[i:i + nx]] for i in range(0, len(self.points), nx)]


def run_grid(spec: GridSpec, jobs: int = 1) -> SweepTable:
    """Evaluate `spec` point by point in row-major order (rows = y values).

    With ``jobs > 1`` points run in worker processes; the merge order is
    always row-major, independent of completion order.
    """
    xs = spec.axis("x")
    ys = spec.axis("y") if spec.y_name else None
    base = dict(DEFAULTS)
    base.update(spec.fixed)
    tasks = []
    for y in (ys if ys is not None else [None]):
        for x in xs:
            vals = dict(base)
            vals[spec.x_name] = float(x)
            if spec.y_name:
                vals[spec.y_name] = float(y)
            tasks.append((vals, spec.mode, spec.policy, float(x), None if y is None else float(y)))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            points = list(ex.map(_point_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        points = [_point_task(t) for t in tasks]
    return SweepTable(spec, points, xs, ys)


def extract_critical_line(table: SweepTable, kind: str = "NP/SP") -> list[tuple[float, float]]:
    """Boundary points located by sign changes along each row (x direction).

    ``kind="NP/SP"`` interpolates ``g_tilde_bar - 1`` linearly between
    neighbouring stable points; ``kind="SP/UP"`` interpolates the stability
    factor where it changes sign.  Rows without a crossing contribute
    nothing; one-dimensional tables use ``y = nan``.
    """
    if kind not in ("NP/SP", "SP/UP"):
        raise ValueError(f"kind must be 'NP/SP' or 'SP/UP', got {kind!r}")
    nx = len(table.xs)
    out = []
    for start in range(0, len(table.points), nx):
        row = table.points[start:start + nx]
        for p0, p1 in zip(row, row[1:]):
            if kind == "NP/SP":
                if p0.g_tilde_bar is None or p1.g_tilde_bar is None:
                    continue
                f0, f1 = p0.g_tilde_bar - 1.0, p1.g_tilde_bar - 1.0
            else:
                f0, f1 = p0.stability, p1.stability
            # f == 0 belongs to the non-positive side (NP resp. UP tie-break)
            if (f0 > 0) == (f1 > 0):
                continue
            w = f0 / (f0 - f1)
            xb = p0.x + w * (p1.x - p0.x)
            out.append((float(xb), float("nan") if p0.y is None else p0.y))
    return out


def analytic_boundaries(alpha: float, g_bar_values: Sequence[float]) -> dict:
    """Closed-form boundary polylines in the (g_bar, chi/omega) plane."""
    g = np.asarray(g_bar_values, dtype=float)
    return {
        "NP/SP": [(float(x), crit.np_sp_boundary_chi(x, alpha)) for x in g
                  if crit.np_sp_boundary_chi(x, alpha) >= 0],
        "SP/UP": [(float(x), crit.sp_up_boundary_chi(x, alpha)) for x in g],
    }


def critical_from_scan(g_values: Sequence[float], xi_values: Sequence[float | None],
                       threshold: float = XI_THRESHOLD) -> tuple[float | None, str | None]:
    """Critical coupling from a 1D order-parameter scan.

    Forward transitions (NP below, SP above) give the smallest g where xi
    rises through `threshold`; reversed ones (SP below, NP above) the
    largest g where it falls through it.  The crossing is refined by a
    quadratic through three neighbouring points.  Absent (unstable)
    entries are skipped.  Returns ``(g_c, direction)``.
    """
    pts = [(float(g), float(v)) for g, v in zip(g_values, xi_values) if v is not None and math.isfinite(v)]
    if len(pts) < 2:
        return None, None
    g = np.array([q[0] for q in pts])
    xi = np.array([q[1] for q in pts])
    above = xi > threshold
    rises = [i for i in range(len(g) - 1) if not above[i] and above[i + 1]]
    falls = [i for i in range(len(g) - 1) if above[i] and not above[i + 1]]
    if rises and (not falls or xi[0] <= threshold):
        i, direction = rises[0], "forward"
    elif falls:
        i, direction = falls[-1], "reversed"
    else:
        return None, None
    return _refine(g, xi, i, threshold), direction


def _refine(g, xi, i, threshold):
    lo = max(0, min(i - 1, len(g) - 3))
    idx = [lo, lo + 1, lo + 2] if len(g) >= 3 else [i, i + 1]
    if len(idx) == 3:
        coeffs = np.polyfit(g[idx], xi[idx] - threshold, 2)
        roots = [r.real for r in np.roots(coeffs) if abs(r.imag) < 1e-12]
        inside = [r for r in roots if g[i] <= r <= g[i + 1]]
        if inside:
            return float(inside[0])
    w = (threshold - xi[i]) / (xi[i + 1] - xi[i])
    return float(g[i] + w * (g[i + 1] - g[i]))


@dataclass(frozen=True)
class RegimeRow:
    x: float
    g_m: float
    g_m_over_kappa_m: float
    four_chi_over_omega: float
    restored: bool
    forms_agree: bool


@dataclass
class RegimeTable:
    x_name: str
    rows: list
    boundary: list  # (x, g_m threshold)
    fixed: dict

    columns = ["x", "g_m", "g_m_over_kappa_m", "four_chi_over_omega", "restored", "forms_agree"]

    def to_csv(self, config=None) -> str:
        cols = [self.x_name] + self.columns[1:]
        return csv_text(cols, ([r.x, r.g_m, r.g_m_over_kappa_m, r.four_chi_over_omega,
                                r.restored, r.forms_agree] for r in self.rows), config)

    def boundary_csv(self, config=None) -> str:
        return csv_text([self.x_name, "g_m_threshold"], self.boundary, config)


def regime_map(x_name: str, x_values: Sequence[float], g_m_values: Sequence[float],
               fixed: dict | None = None) -> RegimeTable:
    """Where ``4 chi / omega > 1`` under the detuning constraint.

    `x_name` is ``"omega"`` (``omega_m`` fixed), ``"omega_m"`` (``omega``
    fixed) or ``"omega_over_omega_m"``.  ``kappa_m`` (default 1) is fixed.
    The boundary polyline is the closed form
    ``g_m = kappa_m sqrt(3 omega / (8 omega_m))``.
    """
    fixed = dict(fixed or {})
    kappa_m = float(fixed.get("kappa_m", 1.0))
    if x_name not in ("omega", "omega_m", "omega_over_omega_m"):
        raise ValueError(f"regime axis must be omega, omega_m or omega_over_omega_m, got {x_name!r}")

    def pair(x):
        if x_name == "omega":
            return float(x), float(fixed["omega_m"])
        if x_name == "omega_m":
            return float(fixed["omega"]), float(x)
        return float(x), 1.0

    rows = []
    boundary = []
    for x in x_values:
        w, wm = pair(x)
        boundary.append((float(x), kappa_m * crit.regime_threshold(w / wm)))
    for gm in g_m_values:
        for x in x_values:
            w, wm = pair(x)
            chi = 2.0 * gm * gm * (wm / 3.0) / (kappa_m * kappa_m)
            a = crit.regime_condition(w, wm, gm, kappa_m)
            b = crit.regime_condition_ratio(w, wm, gm, kappa_m)
            rows.append(RegimeRow(float(x), float(gm), float(gm) / kappa_m, 4.0 * chi / w, a, a == b))
    return RegimeTable(x_name, rows, boundary, {**fixed, "kappa_m": kappa_m})
