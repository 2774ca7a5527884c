"""Closed-form results of the squeezed-frame analysis.

Everything here works on dimensionless ratios: the rescaled coupling
``g_bar = g / g_c``, the A^2 factor ``alpha`` and ``chi / omega``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import UnstablePhaseError

__all__ = [
    "PhaseLabel",
    "CriticalityInput",
    "stability_factor",
    "squeezing_parameter",
    "rescaled_coupling",
    "critical_coupling",
    "classify_phase",
    "order_parameter_analytic",
    "order_parameter_from_rescaled",
    "regime_condition",
    "regime_condition_ratio",
    "regime_threshold",
    "np_sp_boundary_chi",
    "sp_up_boundary_chi",
    "transition_direction",
]


class PhaseLabel(str, enum.Enum):
    NP = "NP"
    SP = "SP"
    UP = "UP"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class CriticalityInput:
    g_bar: float
    alpha: float = 0.0
    chi_over_omega: float = 0.0

    def __post_init__(self):
        if not self.g_bar >= 0:
            raise ValueError(f"g_bar must be >= 0, got {self.g_bar!r}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha!r}")

    @classmethod
    def from_params(cls, p) -> "CriticalityInput":
        from .params import derive

        d = derive(p)
        return cls(g_bar=d.g_bar, alpha=p.alpha, chi_over_omega=d.chi_over_omega)


def stability_factor(c: CriticalityInput) -> float:
    """``exp(-4 r) = 1 + alpha g_bar^2 - 4 chi/omega``; a value <= 0 means UP."""
    return 1.0 + c.alpha * c.g_bar * c.g_bar - 4.0 * c.chi_over_omega


def _require_stable(c: CriticalityInput) -> float:
    s = stability_factor(c)
    if not s > 0:
        raise UnstablePhaseError(
            f"stability factor {s!r} <= 0 at g_bar={c.g_bar!r}, alpha={c.alpha!r}, "
            f"chi/omega={c.chi_over_omega!r}"
        )
    return s


def squeezing_parameter(c: CriticalityInput) -> float:
    """Squeezing parameter ``r = -ln(stability_factor) / 4``."""
    return -0.25 * math.log(_require_stable(c))


def rescaled_coupling(c: CriticalityInput) -> float:
    """Coupling in units of the squeezed-frame critical coupling."""
    return c.g_bar / math.sqrt(_require_stable(c))


def critical_coupling(alpha: float, chi_over_omega: float) -> float | None:
    """Critical ``g_bar`` solving ``rescaled_coupling == 1``.

    Returns ``None`` when there is no finite positive solution.
    """
    num = 1.0 - 4.0 * chi_over_omega
    den = 1.0 - alpha
    if den == 0.0:
        return None
    q = num / den
    if not (q > 0 and math.isfinite(q)):
        return None
    return math.sqrt(q)


def classify_phase(c: CriticalityInput) -> PhaseLabel:
    """UP if the stability factor is <= 0, SP if the rescaled coupling exceeds 1, else NP."""
    s = stability_factor(c)
    if not s > 0:
        return PhaseLabel.UP
    if c.g_bar / math.sqrt(s) > 1.0:
        return PhaseLabel.SP
    return PhaseLabel.NP


def order_parameter_from_rescaled(g_tilde_bar: float) -> float:
    if g_tilde_bar <= 1.0:
        return 0.0
    g2 = g_tilde_bar * g_tilde_bar
    return (g2 - 1.0 / g2) / 4.0


def order_parameter_analytic(c: CriticalityInput) -> float:
    """Low-frequency-limit order parameter: 0 in NP, ``(G^2 - G^-2)/4`` in SP.

    ``G`` is the rescaled coupling.  Raises `UnstablePhaseError` in UP.
    """
    return order_parameter_from_rescaled(rescaled_coupling(c))


def np_sp_boundary_chi(g_bar: float, alpha: float) -> float:
    """chi/omega on the NP/SP line at given g_bar: ``(1 + (alpha - 1) g_bar^2) / 4``."""
    return (1.0 + (alpha - 1.0) * g_bar * g_bar) / 4.0


def sp_up_boundary_chi(g_bar: float, alpha: float) -> float:
    """chi/omega on the stability edge at given g_bar: ``(1 + alpha g_bar^2) / 4``."""
    return (1.0 + alpha * g_bar * g_bar) / 4.0


def transition_direction(alpha: float, chi_over_omega: float) -> str | None:
    """``"forward"`` (NP below g_c) or ``"reversed"`` (SP below g_c); None without a transition."""
    gc = critical_coupling(alpha, chi_over_omega)
    if gc is None:
        return None
    # d(stability)/d(g_bar^2) = alpha; G^2 = g^2 / (1 - 4x + alpha g^2) increases in g iff 1 - 4x > 0
    return "forward" if 1.0 - 4.0 * chi_over_omega > 0 else "reversed"


def regime_threshold(omega_over_omega_m: float) -> float:
    """Threshold on ``g_m / kappa_m``: ``sqrt(3 omega / (8 omega_m))``."""
    if not omega_over_omega_m > 0:
        raise ValueError("omega / omega_m must be > 0")
    return math.sqrt(3.0 * omega_over_omega_m / 8.0)


def regime_condition(omega: float, omega_m: float, g_m: float, kappa_m: float) -> bool:
    """Whether the Kerr magnons restore the transition, ``4 chi / omega > 1``.

    Assumes the detuning constraint, under which
    ``chi = 2 g_m^2 (omega_m / 3) / kappa_m^2``.
    """
    if not omega_m > 0:
        raise ValueError(f"omega_m must be > 0, got {omega_m!r}")
    if not omega > 0:
        raise ValueError(f"omega must be > 0, got {omega!r}")
    if not kappa_m > 0:
        raise ValueError(f"kappa_m must be > 0, got {kappa_m!r}")
    chi = 2.0 * g_m * g_m * (omega_m / 3.0) / (kappa_m * kappa_m)
    return 4.0 * chi / omega > 1.0


def regime_condition_ratio(omega: float, omega_m: float, g_m: float, kappa_m: float) -> bool:
    """Equivalent form ``g_m / kappa_m > sqrt(3 omega / (8 omega_m))``."""
    if not omega_m > 0:
        raise ValueError(f"omega_m must be > 0, got {omega_m!r}")
    if not kappa_m > 0:
        raise ValueError(f"kappa_m must be > 0, got {kappa_m!r}")
    return abs(g_m) / kappa_m > regime_threshold(omega / omega_m)
