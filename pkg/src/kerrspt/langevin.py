"""Mean-field cavity/magnon dynamics and checks of the magnon elimination.

Noise operators enter only through their zero means, the qubit is frozen
to a classical ``s_x`` and the magnon operating point ``N_m`` is held
fixed.  Amplitudes are packed into real vectors
``(Re a, Im a[, Re m, Im m])`` so that the equations, which mix ``z``
and ``conj(z)``, become real-linear: ``y' = M y + b``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import DivergenceError, NoSteadyStateError
from .params import SystemParams, derive, enforce_constraint

__all__ = [
    "MeanFieldState",
    "SpinDrive",
    "Trajectory",
    "AffineFlow",
    "rhs_full",
    "rhs_effective",
    "full_flow",
    "effective_flow",
    "integrate",
    "steady_state",
    "eliminated_magnon",
    "default_dt",
    "elimination_error",
    "elimination_verdict",
    "DEFAULT_BOUND",
]

DEFAULT_BOUND = 1e12


@dataclass(frozen=True)
class MeanFieldState:
    a_amp: complex
    m_amp: complex | None = None
    t: float = 0.0

    def __post_init__(self):
        vals = [self.a_amp] + ([] if self.m_amp is None else [self.m_amp])
        if not all(np.isfinite(complex(v).real) and np.isfinite(complex(v).imag) for v in vals):
            raise ValueError("mean-field amplitudes must be finite")

    def to_vector(self) -> np.ndarray:
        a = complex(self.a_amp)
        if self.m_amp is None:
            return np.array([a.real, a.imag])
        m = complex(self.m_amp)
        return np.array([a.real, a.imag, m.real, m.imag])

    @classmethod
    def from_vector(cls, y, t: float = 0.0) -> "MeanFieldState":
        y = np.asarray(y, dtype=float)
        a = complex(y[0], y[1])
        m = complex(y[2], y[3]) if y.shape[0] >= 4 else None
        return cls(a, m, float(t))


@dataclass(frozen=True)
class SpinDrive:
    """Frozen classical value substituted for sigma_x."""

    s_x: float = 0.0

    def __post_init__(self):
        if not -1.0 <= self.s_x <= 1.0:
            raise ValueError(f"s_x must lie in [-1, 1], got {self.s_x!r}")


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    dt: float
    scheme: str = "rk4"
    backend: str = "python"

    @property
    def a(self) -> np.ndarray:
        return self.y[:, 0] + 1j * self.y[:, 1]

    @property
    def m(self) -> np.ndarray | None:
        if self.y.shape[1] < 4:
            return None
        return self.y[:, 2] + 1j * self.y[:, 3]

    @property
    def samples(self) -> list[MeanFieldState]:
        return [MeanFieldState.from_vector(row, t) for t, row in zip(self.t, self.y)]

    def __len__(self):
        return len(self.t)


def _a2_coeff(p: SystemParams) -> float:
    return p.alpha * p.g * p.g / p.Omega


def rhs_full(state: MeanFieldState, p: SystemParams, drive: SpinDrive) -> tuple[complex, complex]:
    """Time derivatives ``(da/dt, dm/dt)`` of the linearized cavity-magnon equations."""
    d = derive(p)
    a = complex(state.a_amp)
    m = complex(state.m_amp if state.m_amp is not None else 0.0)
    c = _a2_coeff(p)
    da = (-(p.kappa / 2 + 1j * p.omega) * a - 1j * p.g * drive.s_x - 1j * p.g_m * m
          - 2j * c * (a + a.conjugate()))
    dm = (-(p.kappa_m / 2 + 1j * d.Delta_m) * m - 2j * p.K * p.N_m * m.conjugate()
          - 1j * p.g_m * a)
    return da, dm


def rhs_effective(state: MeanFieldState, p: SystemParams, drive: SpinDrive) -> complex:
    """Cavity derivative after the magnon has been eliminated."""
    d = derive(p)
    a = complex(state.a_amp)
    c = _a2_coeff(p)
    return (-(d.kappa_eff / 2 + 1j * (p.omega - d.eta * d.Delta_m)) * a
            - 1j * p.g * drive.s_x
            - 2j * c * (a + a.conjugate())
            - 2j * p.K * d.eta * p.N_m * a.conjugate())


def _lin(z: complex) -> np.ndarray:
    # z * w as a real 2x2 block acting on (Re w, Im w)
    return np.array([[z.real, -z.imag], [z.imag, z.real]])


def _conj(z: complex) -> np.ndarray:
    # z * conj(w)
    return np.array([[z.real, z.imag], [z.imag, -z.real]])


@dataclass(frozen=True)
class AffineFlow:
    """Real affine vector field ``y' = M y + b`` (time independent)."""

    M: np.ndarray
    b: np.ndarray
    model: str = "custom"

    def __call__(self, t, y):
        return self.M @ y + self.b

    @property
    def dim(self) -> int:
        return self.b.shape[0]

    def relaxation_rate(self) -> float:
        """Slowest decay rate, ``-max Re(eig M)``; <= 0 means no attracting fixed point."""
        return float(-np.max(np.linalg.eigvals(self.M).real))


def full_flow(p: SystemParams, drive: SpinDrive) -> AffineFlow:
    d = derive(p)
    c = _a2_coeff(p)
    M = np.zeros((4, 4))
    M[:2, :2] = _lin(-(p.kappa / 2 + 1j * p.omega) - 2j * c) + _conj(-2j * c)
    M[:2, 2:] = _lin(-1j * p.g_m)
    M[2:, :2] = _lin(-1j * p.g_m)
    M[2:, 2:] = _lin(-(p.kappa_m / 2 + 1j * d.Delta_m)) + _conj(-2j * p.K * p.N_m)
    f = -1j * p.g * drive.s_x
    b = np.array([f.real, f.imag, 0.0, 0.0])
    return AffineFlow(M, b, "full")


def effective_flow(p: SystemParams, drive: SpinDrive) -> AffineFlow:
    d = derive(p)
    c = _a2_coeff(p)
    M = (_lin(-(d.kappa_eff / 2 + 1j * (p.omega - d.eta * d.Delta_m)) - 2j * c)
         + _conj(-2j * c - 2j * p.K * d.eta * p.N_m))
    f = -1j * p.g * drive.s_x
    return AffineFlow(M, np.array([f.real, f.imag]), "effective")


def default_dt(p: SystemParams) -> float:
    d = derive(p)
    return 0.01 / max(abs(p.omega), abs(d.Delta_m), p.kappa_m)


def _rk4_generic(f, y0, t0, dt, nsteps, bound, stride):
    y = np.array(y0, dtype=float)
    out = [y.copy()]
    t = t0
    for step in range(nsteps):
        k1 = np.asarray(f(t, y), dtype=float)
        k2 = np.asarray(f(t + dt / 2, y + dt / 2 * k1), dtype=float)
        k3 = np.asarray(f(t + dt / 2, y + dt / 2 * k2), dtype=float)
        k4 = np.asarray(f(t + dt, y + dt * k3), dtype=float)
        ynew = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        pairs = ynew[: 2 * (len(ynew) // 2)].reshape(-1, 2)
        if not np.all(np.isfinite(ynew)) or np.any(np.hypot(pairs[:, 0], pairs[:, 1]) > bound):
            return np.array(out), step, y
        y = ynew
        t = t0 + (step + 1) * dt
        if (step + 1) % stride == 0:
            out.append(y.copy())
    return np.array(out), nsteps, y


def integrate(rhs: AffineFlow | Callable, initial: MeanFieldState | Sequence[float], dt: float,
              t_end: float, bound: float = DEFAULT_BOUND, stride: int = 1,
              backend: str | None = None) -> Trajectory:
    """Classical fixed-step RK4 from ``initial.t`` to `t_end`.

    `rhs` is either an `AffineFlow` (dispatched to the compiled kernel when
    available) or any callable ``f(t, y) -> dy/dt`` on the packed real
    vector.  The step is shrunk, if needed, so that an integer number of
    uniform steps lands exactly on `t_end`.

    Raises
    ------
    DivergenceError
        When an amplitude modulus exceeds `bound` or turns non-finite.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    if isinstance(initial, MeanFieldState):
        y0, t0 = initial.to_vector(), initial.t
    else:
        y0, t0 = np.asarray(initial, dtype=float), 0.0
    span = t_end - t0
    if span < 0:
        raise ValueError("t_end precedes the initial time")
    nsteps = int(math.ceil(span / dt - 1e-9)) if span > 0 else 0
    if nsteps:
        dt = span / nsteps
    if isinstance(rhs, AffineFlow):
        if rhs.dim != y0.shape[0]:
            raise ValueError(f"initial state has {y0.shape[0]} components, flow expects {rhs.dim}")
        if backend == "python":
            fn, used = kernels._fallback.rk4_affine, "python"
        else:
            fn, used = kernels.rk4_affine, kernels.BACKEND
        ys, done, y_last = fn(np.ascontiguousarray(rhs.M), np.ascontiguousarray(rhs.b),
                              np.ascontiguousarray(y0), dt, nsteps, bound, stride)
    else:
        ys, done, y_last = _rk4_generic(rhs, y0, t0, dt, nsteps, bound, stride)
        used = "python"
    if done < nsteps:
        last = MeanFieldState.from_vector(y_last, t0 + done * dt)
        raise DivergenceError(
            f"trajectory exceeded bound {bound:g} at t={t0 + (done + 1) * dt:.6g}", last
        )
    t = t0 + dt * stride * np.arange(len(ys))
    return Trajectory(t=t, y=np.asarray(ys), dt=dt, scheme="rk4", backend=used)


def steady_state(rhs_spec: str | AffineFlow, p: SystemParams | None = None,
                 drive: SpinDrive | None = None) -> MeanFieldState:
    """Fixed point of the full (``"full"``) or eliminated (``"effective"``) model."""
    if isinstance(rhs_spec, AffineFlow):
        flow = rhs_spec
    elif rhs_spec == "full":
        flow = full_flow(p, drive)
    elif rhs_spec == "effective":
        flow = effective_flow(p, drive)
    else:
        raise ValueError(f"unknown model {rhs_spec!r}; expected 'full' or 'effective'")
    if np.linalg.cond(flow.M) > 1e14:
        raise NoSteadyStateError("mean-field linear system is singular")
    y = np.linalg.solve(flow.M, -flow.b)
    return MeanFieldState.from_vector(y)


def eliminated_magnon(a: complex, p: SystemParams) -> complex:
    """Slaved magnon amplitude ``(2 K N_m g_m / W) a* - g_m (Delta_m + i kappa_m/2) a / W``."""
    d = derive(p)
    a = complex(a)
    return (2 * p.K * p.N_m * p.g_m / d.W) * a.conjugate() - p.g_m * (d.Delta_m + 0.5j * p.kappa_m) / d.W * a


def _ratio_params(p: SystemParams, ratio: float) -> SystemParams:
    if not ratio > 1:
        raise ValueError(f"kappa_m / g_m ratio must be > 1, got {ratio!r}")
    if p.g_m == 0.0:
        return p
    return p.replace(g_m=p.kappa_m / ratio)


def _transient_discrepancy(p: SystemParams, drive: SpinDrive, t_end: float | None,
                           dt: float | None, max_steps: int) -> float:
    full = full_flow(p, drive)
    eff = effective_flow(p, drive)
    rate = min(full.relaxation_rate(), eff.relaxation_rate())
    if not rate > 0:
        raise DivergenceError("mean-field dynamics has no attracting fixed point")
    t_end = 10.0 / rate if t_end is None else t_end
    dt = default_dt(p) if dt is None else dt
    if t_end / dt > max_steps:
        raise ValueError(f"{t_end / dt:.3g} steps exceed max_steps={max_steps}; pass t_end or dt")
    tf = integrate(full, MeanFieldState(0j, 0j), dt, t_end)
    te = integrate(eff, MeanFieldState(0j), dt, t_end)
    scale = np.max(np.abs(tf.a))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(tf.a - te.a)) / scale)


def elimination_error(p: SystemParams, drive: SpinDrive, ratio_list: Sequence[float],
                      metric: str = "steady", t_end: float | None = None,
                      dt: float | None = None, max_steps: int = 5_000_000) -> list[tuple[float, float]]:
    """Relative full-vs-effective cavity discrepancy for each ``kappa_m / g_m``.

    Each ratio sets ``g_m = kappa_m / ratio`` (``kappa_m`` held fixed; a
    decoupled magnon, ``g_m = 0``, stays decoupled) and re-imposes the
    detuning constraint when ``K < 0``.

    ``metric="steady"`` compares fixed points, ``|a_full - a_eff| / |a_full|``.
    With a frozen drive the elimination is exact there, so this is zero up
    to rounding.  ``metric="transient"`` compares trajectories relaxing
    from the vacuum, ``max_t |a_full - a_eff| / max_t |a_full|``, which
    carries the finite-``kappa_m`` retardation neglected by the elimination.

    Returns rows ``(ratio, rel_error)`` sorted by ratio.
    """
    rows = []
    for ratio in sorted(ratio_list):
        q = _ratio_params(p, ratio)
        if q.K < 0 and q.omega_m > 0:
            q = enforce_constraint(q)
        if metric == "steady":
            af = complex(steady_state("full", q, drive).a_amp)
            ae = complex(steady_state("effective", q, drive).a_amp)
            err = abs(af - ae) / abs(af) if af != 0 else abs(ae)
        elif metric == "transient":
            err = _transient_discrepancy(q, drive, t_end, dt, max_steps)
        else:
            raise ValueError(f"unknown metric {metric!r}; expected 'steady' or 'transient'")
        rows.append((float(ratio), float(err)))
    return rows


def elimination_verdict(rows: Sequence[tuple[float, float]], max_final: float = 0.01,
                        ratio_window: tuple[float, float] = (2.0, 8.0)) -> dict:
    """Pass/fail summary for an `elimination_error` table.

    Passes when errors decrease strictly with the ratio, the error at the
    largest ratio is below `max_final`, and each ratio between consecutive
    errors lies in `ratio_window`.
    """
    errs = [e for _, e in rows]
    monotone = all(b < a for a, b in zip(errs, errs[1:]))
    final_ok = bool(errs) and errs[-1] < max_final
    factors = [a / b if b > 0 else math.inf for a, b in zip(errs, errs[1:])]
    lo, hi = ratio_window
    window_ok = all(lo <= f <= hi for f in factors)
    return {
        "pass": bool(monotone and final_ok and window_ok),
        "monotone_decreasing": monotone,
        "final_below_threshold": final_ok,
        "reduction_factors": factors,
        "factors_in_window": window_ok,
    }
