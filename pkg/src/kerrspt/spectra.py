"""Hamiltonian matrices, ground states and the numerical order parameter.

Four Hamiltonians are built on the truncated space
qubit (x) cavity [(x) magnon]:

* ``build_rabi``          omega a^dag a + (Omega/2) sz + g sx (a + a^dag)
* ``build_at``            (alpha g^2 / Omega) (a + a^dag)^2
* ``build_full``          Rabi + A^2 + Kerr magnon + beam-splitter coupling
* ``build_effective``     Rabi + A^2 - chi (a + a^dag)^2
* ``build_squeezed_qrm``  the effective model after the squeezing transform

``(a + a^dag)^2`` is always the square of the truncated quadrature matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import criticality as crit
from .errors import ConstraintError, ConvergenceError, DimensionCapError
from .fock import DEFAULT_DIM_CAP, SPARSE_THRESHOLD, FockCutoff, OperatorMatrix
from .params import SystemParams, constraint_residual, derive

__all__ = [
    "GroundStateResult",
    "CutoffPolicy",
    "NumericOrderParameter",
    "build_rabi",
    "build_at",
    "build_full",
    "build_effective",
    "build_squeezed_qrm",
    "squeezed_frame",
    "zero_point_shift",
    "standard_observables",
    "lowest_eigenpairs",
    "ground_state",
    "converge_cutoff",
    "converged_eigenvalues",
    "order_parameter_numeric",
    "unitary_equivalence",
    "DENSE_SOLVER_MAX",
]

DENSE_SOLVER_MAX = 500
CONSTRAINT_RTOL = 1e-12


@dataclass
class GroundStateResult:
    energy: float
    state: np.ndarray
    n_photon: float
    sz: float
    parity: float
    cutoff_used: FockCutoff | None
    converged: bool = True
    gap: float | None = None
    near_degenerate: bool = False
    steps: int = 1
    observables: dict = field(default_factory=dict)

    def to_dict(self, include_state: bool = True) -> dict:
        d = {
            "energy": self.energy,
            "n_photon": self.n_photon,
            "sz": self.sz,
            "parity": self.parity,
            "cutoff_used": None if self.cutoff_used is None else {
                "n_cavity": self.cutoff_used.n_cavity,
                "n_magnon": self.cutoff_used.n_magnon,
            },
            "converged": self.converged,
            "gap": self.gap,
            "near_degenerate": self.near_degenerate,
            "steps": self.steps,
            "observables": dict(self.observables),
        }
        if include_state:
            st = np.asarray(self.state)
            if np.iscomplexobj(st):
                d["state"] = {"re": st.real.tolist(), "im": st.imag.tolist()}
            else:
                d["state"] = st.tolist()
        return d


# ---------------------------------------------------------------------------
# operator embedding

def _sparse_ops(cutoff: FockCutoff) -> dict:
    nc = cutoff.n_cavity + 1
    nm = cutoff.n_magnon + 1
    a = sp.diags(np.sqrt(np.arange(1, nc, dtype=float)), 1, shape=(nc, nc), format="csr")
    n_a = sp.diags(np.arange(nc, dtype=float), 0, format="csr")
    sx = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    sz = sp.diags([1.0, -1.0], 0, format="csr")
    i2 = sp.identity(2, format="csr")
    ic = sp.identity(nc, format="csr")
    im = sp.identity(nm, format="csr")
    x = a + a.T

    def emb(q, c, m=im):
        return sp.kron(sp.kron(q, c, format="csr"), m, format="csr")

    ops = {
        "n_a": emb(i2, n_a),
        "x": emb(i2, x),
        "x2": emb(i2, (x @ x).tocsr()),
        "sz": emb(sz, ic),
        "sx_x": emb(sx, x),
        "a": emb(i2, a),
    }
    par_c = sp.diags(np.where(np.arange(nc) % 2 == 0, 1.0, -1.0), 0, format="csr")
    par_m = sp.diags(np.where(np.arange(nm) % 2 == 0, 1.0, -1.0), 0, format="csr")
    ops["parity"] = emb(sz, par_c, par_m)
    if cutoff.n_magnon > 0:
        m = sp.diags(np.sqrt(np.arange(1, nm, dtype=float)), 1, shape=(nm, nm), format="csr")
        n_m = sp.diags(np.arange(nm, dtype=float), 0, format="csr")
        ops["m"] = emb(i2, ic, m)
        ops["n_m"] = emb(i2, ic, n_m)
        ops["n_m2"] = emb(i2, ic, (n_m @ n_m).tocsr())
    return ops


def _finish(h: sp.csr_matrix, cutoff: FockCutoff, sparse: bool | None) -> OperatorMatrix:
    if cutoff.dim > cutoff.dim_cap:
        raise DimensionCapError(f"dimension {cutoff.dim} exceeds cap {cutoff.dim_cap}")
    use_sparse = cutoff.dim > SPARSE_THRESHOLD if sparse is None else sparse
    h = h.tocsr()
    h.sum_duplicates()
    return OperatorMatrix(h if use_sparse else h.toarray(), hermitian=True)


def standard_observables(cutoff: FockCutoff, sparse: bool | None = None) -> dict:
    """Photon number, sigma_z and parity operators for `cutoff`."""
    ops = _sparse_ops(cutoff)
    out = {k: _finish(ops[k], cutoff, sparse) for k in ("n_a", "sz", "parity")}
    return {"n_photon": out["n_a"], "sz": out["sz"], "parity": out["parity"]}


def _rabi_terms(ops, omega, Omega, g):
    return omega * ops["n_a"] + (Omega / 2.0) * ops["sz"] + g * ops["sx_x"]


# ---------------------------------------------------------------------------
# builders

def build_rabi(p: SystemParams, cutoff: FockCutoff, sparse: bool | None = None) -> OperatorMatrix:
    if cutoff.n_magnon != 0:
        raise ValueError("build_rabi acts on qubit (x) cavity; use n_magnon = 0")
    ops = _sparse_ops(cutoff)
    return _finish(_rabi_terms(ops, p.omega, p.Omega, p.g), cutoff, sparse)


def build_at(p: SystemParams, cutoff: FockCutoff, sparse: bool | None = None) -> OperatorMatrix:
    ops = _sparse_ops(cutoff)
    c = p.alpha * p.g * p.g / p.Omega
    return _finish(c * ops["x2"], cutoff, sparse)


def build_full(p: SystemParams, cutoff: FockCutoff, sparse: bool | None = None) -> OperatorMatrix:
    """Hybrid Hamiltonian with an explicit (truncated) Kerr magnon mode."""
    if cutoff.n_magnon < 1:
        raise ValueError("build_full needs n_magnon >= 1")
    ops = _sparse_ops(cutoff)
    c = p.alpha * p.g * p.g / p.Omega
    a, m = ops["a"], ops["m"]
    hop = (a @ m.T).tocsr()
    h = (
        _rabi_terms(ops, p.omega, p.Omega, p.g)
        + c * ops["x2"]
        + p.omega_m * ops["n_m"]
        + p.K * ops["n_m2"]
        + p.g_m * (hop + hop.T)
    )
    return _finish(h, cutoff, sparse)


def _chi(p: SystemParams, chi: float | None) -> float:
    if chi is not None:
        return float(chi)
    if p.g_m != 0.0 and constraint_residual(p) > CONSTRAINT_RTOL:
        raise ConstraintError(
            "effective Hamiltonian needs Delta_m = -2 K N_m; call enforce_constraint first"
        )
    return derive(p).chi


def build_effective(p: SystemParams, cutoff: FockCutoff, chi: float | None = None,
                    sparse: bool | None = None) -> OperatorMatrix:
    """Rabi + A^2 - chi (a + a^dag)^2, with chi from the elimination chain unless given."""
    if cutoff.n_magnon != 0:
        raise ValueError("build_effective acts on qubit (x) cavity; use n_magnon = 0")
    chi = _chi(p, chi)
    ops = _sparse_ops(cutoff)
    c = p.alpha * p.g * p.g / p.Omega - chi
    return _finish(_rabi_terms(ops, p.omega, p.Omega, p.g) + c * ops["x2"], cutoff, sparse)


def squeezed_frame(p: SystemParams, chi: float | None = None) -> tuple[float, float]:
    """Renormalized ``(omega_tilde, g_tilde)`` of the squeezed-frame Rabi model.

    Raises `UnstablePhaseError` when the stability factor is not positive.
    """
    chi = _chi(p, chi)
    g_c = math.sqrt(p.omega * p.Omega) / 2.0
    c = crit.CriticalityInput(g_bar=p.g / g_c, alpha=p.alpha, chi_over_omega=chi / p.omega)
    s = crit.stability_factor(c)
    crit.squeezing_parameter(c)  # raises in UP
    return p.omega * math.sqrt(s), p.g * s ** -0.25


def zero_point_shift(p: SystemParams, chi: float | None = None) -> float:
    """Constant ``(omega_tilde - omega) / 2`` dropped by the squeezed-frame Hamiltonian.

    ``spec(build_effective) == spec(build_squeezed_qrm) + zero_point_shift``.
    """
    w_t, _ = squeezed_frame(p, chi)
    return (w_t - p.omega) / 2.0


def build_squeezed_qrm(p: SystemParams, cutoff: FockCutoff, chi: float | None = None,
                       sparse: bool | None = None) -> OperatorMatrix:
    if cutoff.n_magnon != 0:
        raise ValueError("build_squeezed_qrm acts on qubit (x) cavity; use n_magnon = 0")
    w_t, g_t = squeezed_frame(p, chi)
    ops = _sparse_ops(cutoff)
    return _finish(_rabi_terms(ops, w_t, p.Omega, g_t), cutoff, sparse)


# ---------------------------------------------------------------------------
# eigensolvers

def _fix_phase(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    ph = v[i] / abs(v[i])
    v = v / ph
    if not np.iscomplexobj(v) or np.all(v.imag == 0):
        v = v.real if np.iscomplexobj(v) else v
    return v


def lowest_eigenpairs(H: OperatorMatrix, k: int = 1, method: str = "auto",
                      tol: float = 1e-13, maxiter: int | None = None):
    """``k`` lowest eigenvalues (ascending) and unit eigenvectors (columns).

    ``method`` is ``"dense"``, ``"iterative"`` or ``"auto"`` (dense up to
    `DENSE_SOLVER_MAX`).  Eigenvectors follow the phase convention of the
    largest-magnitude component being real and positive.
    """
    dim = H.dim
    k = min(k, dim)
    if method == "auto":
        method = "dense" if dim <= DENSE_SOLVER_MAX else "iterative"
    if method == "dense" or k >= dim - 1:
        vals, vecs = sla.eigh(H.to_dense(), subset_by_index=[0, k - 1])
    elif method == "iterative":
        v0 = np.random.default_rng(12345).standard_normal(dim)
        if np.iscomplexobj(H.entries):
            v0 = v0.astype(complex)
        try:
            vals, vecs = spla.eigsh(H.to_sparse(), k=k, which="SA", v0=v0, tol=tol,
                                    ncv=min(dim, max(2 * k + 1, 40)),
                                    maxiter=maxiter or 200 * dim)
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceError(f"Lanczos did not converge for dim={dim}: {exc}") from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    else:
        raise ValueError(f"unknown eigensolver method {method!r}")
    vecs = np.column_stack([_fix_phase(vecs[:, j]) for j in range(vecs.shape[1])])
    return np.asarray(vals, dtype=float), vecs


def ground_state(H: OperatorMatrix, observables: Mapping[str, OperatorMatrix] | None = None,
                 cutoff: FockCutoff | None = None, method: str = "auto") -> GroundStateResult:
    """Lowest eigenpair of `H` with photon number, sigma_z and parity evaluated.

    `observables` defaults to `standard_observables(cutoff)`; extra entries
    are evaluated into ``result.observables``.
    """
    if not H.hermitian and not H.is_hermitian():
        raise ValueError("ground_state needs a Hermitian matrix")
    if observables is None:
        if cutoff is None:
            raise ValueError("pass observables or a cutoff")
        observables = standard_observables(cutoff, sparse=H.is_sparse)
    k = 2 if H.dim >= 2 else 1
    vals, vecs = lowest_eigenpairs(H, k=k, method=method)
    psi = vecs[:, 0]
    psi = psi / np.linalg.norm(psi)
    E = float(vals[0])
    gap = float(vals[1] - vals[0]) if k == 2 else None
    extra = {}
    std = {}
    for name, op in observables.items():
        val = op.expect(psi).real
        (std if name in ("n_photon", "sz", "parity") else extra)[name] = float(val)
    return GroundStateResult(
        energy=E,
        state=psi,
        n_photon=max(std.get("n_photon", float("nan")), 0.0),
        sz=std.get("sz", float("nan")),
        parity=std.get("parity", float("nan")),
        cutoff_used=cutoff,
        converged=True,
        gap=gap,
        near_degenerate=gap is not None and gap < 1e-10 * max(abs(E), 1e-300),
        observables=extra,
    )


@dataclass(frozen=True)
class CutoffPolicy:
    """How cavity cutoffs are chosen: doubling from `start` until `tol`, or `fixed`."""

    tol: float = 1e-4
    start: int = 16
    dim_cap: int = DEFAULT_DIM_CAP
    fixed: int | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be > 0")


Builder = Callable[..., OperatorMatrix]


def _cutoff_ladder(start: int, n_magnon: int, dim_cap: int):
    n = start
    while 2 * (n + 1) * (n_magnon + 1) <= dim_cap:
        yield FockCutoff(n, n_magnon, dim_cap)
        n *= 2


def converge_cutoff(builder: Builder, p: SystemParams, tol: float = 1e-4, start: int = 16,
                    n_magnon: int = 0, dim_cap: int = DEFAULT_DIM_CAP,
                    **builder_kwargs) -> GroundStateResult:
    """Ground state with the cavity cutoff doubled until stable.

    Stops when consecutive cutoffs change the photon number by less than
    ``tol * max(1, n_photon)`` and the energy by less than ``tol * |E|``.
    Returns the larger-cutoff result; ``converged`` is False if the
    dimension cap is reached first.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    prev = None
    steps = 0
    last = None
    for cut in _cutoff_ladder(start, n_magnon, dim_cap):
        H = builder(p, cut, **builder_kwargs)
        res = ground_state(H, cutoff=cut)
        steps += 1
        res.steps = steps
        if prev is not None:
            dn = abs(res.n_photon - prev.n_photon)
            dE = abs(res.energy - prev.energy)
            if dn <= tol * max(1.0, res.n_photon) and dE <= tol * abs(res.energy):
                res.converged = True
                return res
        prev = last = res
    if last is None:
        raise DimensionCapError(f"start cutoff {start} already exceeds cap {dim_cap}")
    last.converged = False
    return last


def converged_eigenvalues(builder: Builder, p: SystemParams, k: int = 4, tol: float = 1e-9,
                          start: int = 16, dim_cap: int = DEFAULT_DIM_CAP, **builder_kwargs):
    """Lowest `k` eigenvalues with the cutoff doubled until each moves by <= tol relative.

    Returns ``(eigenvalues, cutoff, converged)``.
    """
    prev = None
    cut = None
    for cut in _cutoff_ladder(start, 0, dim_cap):
        vals, _ = lowest_eigenpairs(builder(p, cut, **builder_kwargs), k=k)
        if prev is not None:
            scale = np.maximum(np.abs(vals), 1e-300)
            if np.all(np.abs(vals - prev) <= tol * scale):
                return vals, cut, True
        prev = vals
    if prev is None:
        raise DimensionCapError(f"start cutoff {start} already exceeds cap {dim_cap}")
    return prev, cut, False


@dataclass(frozen=True)
class NumericOrderParameter:
    xi: float
    n_photon: float
    omega_tilde: float
    converged: bool
    ground: GroundStateResult

    def __float__(self):
        return self.xi


def order_parameter_numeric(p: SystemParams, policy: CutoffPolicy | None = None,
                            chi: float | None = None) -> NumericOrderParameter:
    """``xi = (omega_tilde / Omega) <a^dag a>`` in the squeezed-frame ground state."""
    policy = policy or CutoffPolicy()
    w_t, _ = squeezed_frame(p, chi)
    if policy.fixed is not None:
        cut = FockCutoff(policy.fixed, 0, policy.dim_cap)
        gs = ground_state(build_squeezed_qrm(p, cut, chi=chi), cutoff=cut)
    else:
        gs = converge_cutoff(build_squeezed_qrm, p, tol=policy.tol, start=policy.start,
                             dim_cap=policy.dim_cap, chi=chi)
    return NumericOrderParameter(
        xi=w_t / p.Omega * gs.n_photon,
        n_photon=gs.n_photon,
        omega_tilde=w_t,
        converged=gs.converged,
        ground=gs,
    )


def unitary_equivalence(p: SystemParams, k: int = 4, tol: float = 1e-10, start: int = 16,
                        dim_cap: int = DEFAULT_DIM_CAP, chi: float | None = None) -> dict:
    """Compare the low spectra of the effective and squeezed-frame Hamiltonians.

    The squeezed-frame spectrum is shifted by `zero_point_shift` before the
    comparison.
    """
    e_eff, cut_eff, ok_eff = converged_eigenvalues(build_effective, p, k=k, tol=tol,
                                                   start=start, dim_cap=dim_cap, chi=chi)
    e_sq, cut_sq, ok_sq = converged_eigenvalues(build_squeezed_qrm, p, k=k, tol=tol,
                                                start=start, dim_cap=dim_cap, chi=chi)
    shift = zero_point_shift(p, chi)
    e_sq_shifted = e_sq + shift
    rel = np.abs(e_eff - e_sq_shifted) / np.maximum(np.abs(e_eff), 1e-300)
    return {
        "effective": e_eff.tolist(),
        "squeezed": e_sq.tolist(),
        "zero_point_shift": shift,
        "max_rel_gap": float(np.max(rel)),
        "cutoff_effective": cut_eff.n_cavity,
        "cutoff_squeezed": cut_sq.n_cavity,
        "converged": bool(ok_eff and ok_sq),
    }
