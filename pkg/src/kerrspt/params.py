"""Model parameters and the adiabatic-elimination chain.

All frequencies are dimensionless multiples of a reference frequency
(by default the qubit splitting, ``Omega = 1``); hbar = 1.  The magnon
displacement <m> is taken real and non-negative so that <m>^2 = N_m.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .errors import ConstraintError, SingularEliminationError

__all__ = [
    "SystemParams",
    "DerivedParams",
    "MaterialParams",
    "derive",
    "enforce_constraint",
    "magnon_from_material",
    "from_ratios",
    "constraint_residual",
    "DEFAULT_RHO_S",
]

# YIG spin density in cm^-3.  The printed source value carries a negative
# exponent; both magnitudes are accepted through configuration.
DEFAULT_RHO_S = 2.1e22


@dataclass(frozen=True)
class SystemParams:
    """Raw symbols of the hybrid cavity / qubit / Kerr-magnon model.

    Parameters
    ----------
    omega : float
        Cavity frequency.
    Omega : float
        Qubit level splitting.
    g : float
        Rabi coupling.
    alpha : float
        A^2-term strength factor (0 switches the term off).
    omega_m : float
        Bare magnon frequency.
    K : float
        Kerr coefficient, sign free.
    g_m : float
        Magnon-cavity coupling.
    kappa, kappa_m : float
        Cavity and magnon decay rates.
    N_m : float
        Mean magnon number |<m>|^2 at the operating point.
    """

    omega: float = 1.0
    Omega: float = 1.0
    g: float = 0.0
    alpha: float = 0.0
    omega_m: float = 0.0
    K: float = 0.0
    g_m: float = 0.0
    kappa: float = 0.0
    kappa_m: float = 1.0
    N_m: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v!r}")
        if self.omega <= 0:
            raise ValueError("omega must be > 0")
        if self.Omega <= 0:
            raise ValueError("Omega must be > 0")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.N_m < 0:
            raise ValueError("N_m must be >= 0")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.kappa_m < 0:
            raise ValueError("kappa_m must be >= 0")
        if self.g_m != 0 and self.kappa_m <= 0:
            raise ValueError("kappa_m must be > 0 when g_m != 0")

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class DerivedParams:
    """Quantities produced by eliminating the magnon.

    ``chi`` is the strength of the magnon-induced A^2 term
    ``-chi (a + a^dag)^2``; ``g_bar`` is g in units of the bare
    critical coupling ``g_c = sqrt(omega Omega) / 2``.
    """

    Delta_m: float
    W: float
    eta: float
    chi: float
    kappa_eff: float
    g_c: float
    g_bar: float
    chi_over_omega: float

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class MaterialParams:
    """YIG-sphere material constants (any consistent unit system).

    ``K_an`` carries the sign of the resulting Kerr coefficient.
    """

    gamma: float
    B0: float
    mu0: float
    K_an: float
    M: float
    V_m: float
    rho_s: float = DEFAULT_RHO_S
    s: float = 0.5

    def __post_init__(self):
        for name in ("gamma", "mu0", "rho_s", "s"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.B0 < 0:
            raise ValueError("B0 must be >= 0")
        if self.M == 0 or self.V_m == 0:
            raise ZeroDivisionError("M and V_m must be nonzero")
        if self.M < 0 or self.V_m < 0:
            raise ValueError("M and V_m must be > 0")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def derive(p: SystemParams) -> DerivedParams:
    """Evaluate the elimination chain for `p`.

    Raises
    ------
    SingularEliminationError
        If ``W == 0`` while the magnon is coupled (``g_m != 0``).
    """
    Delta_m = p.omega_m + 4.0 * p.K * p.N_m
    W = Delta_m * Delta_m + p.kappa_m * p.kappa_m / 4.0 - 4.0 * p.K * p.K * p.N_m * p.N_m
    if p.g_m == 0.0:
        eta = 0.0
    elif W == 0.0:
        raise SingularEliminationError(
            f"elimination denominator W vanishes (Delta_m={Delta_m!r}, K={p.K!r}, N_m={p.N_m!r})"
        )
    else:
        eta = p.g_m * p.g_m / W
    # eta == 0 must give chi == 0 exactly, also for K == 0 or N_m == 0
    chi = -p.K * eta * p.N_m if eta != 0.0 else 0.0
    kappa_eff = p.kappa + p.kappa_m * eta
    g_c = math.sqrt(p.omega * p.Omega) / 2.0
    return DerivedParams(
        Delta_m=Delta_m, W=W, eta=eta, chi=chi, kappa_eff=kappa_eff,
        g_c=g_c, g_bar=p.g / g_c, chi_over_omega=chi / p.omega,
    )


def enforce_constraint(p: SystemParams) -> SystemParams:
    """Return `p` with N_m chosen so that Delta_m = -2 K N_m.

    The linear constraint ``omega_m + 4 K N_m = -2 K N_m`` gives
    ``N_m = -omega_m / (6 K)`` and ``Delta_m = omega_m / 3``.
    """
    if not p.K < 0:
        raise ConstraintError(f"constraint requires K < 0, got K={p.K!r}")
    if not p.omega_m > 0:
        raise ConstraintError(f"constraint requires omega_m > 0, got omega_m={p.omega_m!r}")
    return p.replace(N_m=-p.omega_m / (6.0 * p.K))


def constraint_residual(p: SystemParams) -> float:
    """Relative violation of Delta_m = -2 K N_m (0 when enforced)."""
    Delta_m = p.omega_m + 4.0 * p.K * p.N_m
    target = -2.0 * p.K * p.N_m
    scale = max(abs(Delta_m), abs(target), abs(p.omega_m), 1e-300)
    return abs(Delta_m - target) / scale


def magnon_from_material(m: MaterialParams) -> tuple[float, float]:
    """Magnon frequency and Kerr coefficient of a YIG sphere.

    Returns
    -------
    omega_m, K : float
        ``K = 2 mu0 K_an gamma^2 / (M^2 V_m^2)`` and
        ``omega_m = gamma B0 + K - 2 mu0 rho_s s K_an gamma^2 / M^2``.
    """
    K = 2.0 * m.mu0 * m.K_an * m.gamma**2 / (m.M**2 * m.V_m**2)
    omega_m = m.gamma * m.B0 + K - 2.0 * m.mu0 * m.rho_s * m.s * m.K_an * m.gamma**2 / m.M**2
    return omega_m, K


def from_ratios(
    g_bar: float,
    alpha: float = 0.0,
    chi_over_omega: float = 0.0,
    omega: float = 1.0,
    Omega: float = 1.0,
    omega_m: float = 3.0,
    K: float = -0.5,
    kappa_m: float = 1.0,
    kappa: float = 0.0,
) -> SystemParams:
    """Constraint-enforced parameters hitting a target (g_bar, alpha, chi/omega).

    Under the constraint ``chi = 2 g_m^2 omega_m / (3 kappa_m^2)``, so the
    magnon coupling is solved for from the requested ``chi``.
    """
    if chi_over_omega < 0:
        raise ValueError("chi_over_omega must be >= 0 (chi < 0 needs K > 0, excluded by the constraint)")
    g = g_bar * math.sqrt(omega * Omega) / 2.0
    chi = chi_over_omega * omega
    g_m = kappa_m * math.sqrt(3.0 * chi / (2.0 * omega_m))
    p = SystemParams(omega=omega, Omega=Omega, g=g, alpha=alpha, omega_m=omega_m, K=K,
                     g_m=g_m, kappa=kappa, kappa_m=kappa_m)
    return enforce_constraint(p)
