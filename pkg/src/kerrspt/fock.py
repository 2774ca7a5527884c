"""Operators on truncated Fock and Fock (x) qubit spaces.

Tensor order is fixed everywhere: qubit (x) cavity (x) magnon.  The qubit
basis is ``(|e>, |g>)`` so that ``sigma_z = diag(1, -1)``.

Matrices are dense below `SPARSE_THRESHOLD` and CSR above it; both
representations hold identical entries.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DimensionCapError

__all__ = [
    "DEFAULT_DIM_CAP",
    "SPARSE_THRESHOLD",
    "FockCutoff",
    "OperatorMatrix",
    "annihilation",
    "creation",
    "number",
    "identity",
    "pauli",
    "tensor",
    "parity",
    "QUBIT_EXCITED",
    "QUBIT_GROUND",
]

DEFAULT_DIM_CAP = 20000
SPARSE_THRESHOLD = 2000
QUBIT_EXCITED = 0
QUBIT_GROUND = 1


@dataclass(frozen=True)
class FockCutoff:
    """Maximum occupations kept for the cavity and magnon modes.

    ``n_magnon = 0`` means the magnon space is absent.
    """

    n_cavity: int
    n_magnon: int = 0
    dim_cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        if int(self.n_cavity) != self.n_cavity or self.n_cavity < 1:
            raise ValueError(f"n_cavity must be an integer >= 1, got {self.n_cavity!r}")
        if int(self.n_magnon) != self.n_magnon or self.n_magnon < 0:
            raise ValueError(f"n_magnon must be an integer >= 0, got {self.n_magnon!r}")
        if self.dim > self.dim_cap:
            raise DimensionCapError(f"dimension {self.dim} exceeds cap {self.dim_cap}")

    @property
    def dim(self) -> int:
        return 2 * (self.n_cavity + 1) * (self.n_magnon + 1)

    def with_cavity(self, n_cavity: int) -> "FockCutoff":
        return FockCutoff(n_cavity, self.n_magnon, self.dim_cap)


class OperatorMatrix:
    """A square matrix on a truncated Hilbert space.

    Thin wrapper over either a numpy array or a scipy CSR matrix.  Treat
    instances as immutable.
    """

    __slots__ = ("entries", "hermitian")

    def __init__(self, entries, hermitian: bool = False):
        if sp.issparse(entries):
            entries = sp.csr_matrix(entries)
        else:
            entries = np.asarray(entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"operator must be square, got shape {entries.shape}")
        self.entries = entries
        self.hermitian = bool(hermitian)
        if self.hermitian and not self.is_hermitian():
            raise ValueError("matrix flagged Hermitian fails the Hermiticity check")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.entries)

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return f"OperatorMatrix(dim={self.dim}, {kind}, hermitian={self.hermitian})"

    def to_dense(self) -> np.ndarray:
        return self.entries.toarray() if self.is_sparse else self.entries

    def to_sparse(self) -> sp.csr_matrix:
        return self.entries if self.is_sparse else sp.csr_matrix(self.entries)

    def as_dense(self) -> "OperatorMatrix":
        return OperatorMatrix(self.to_dense(), self.hermitian)

    def as_sparse(self) -> "OperatorMatrix":
        return OperatorMatrix(self.to_sparse(), self.hermitian)

    def max_abs(self) -> float:
        if self.is_sparse:
            return float(abs(self.entries).max()) if self.entries.nnz else 0.0
        return float(np.max(np.abs(self.entries))) if self.entries.size else 0.0

    def is_hermitian(self, rtol: float = 1e-12) -> bool:
        diff = self.entries - self.entries.conj().T
        if sp.issparse(diff):
            dmax = float(abs(diff).max()) if diff.nnz else 0.0
        else:
            dmax = float(np.max(np.abs(diff))) if diff.size else 0.0
        return dmax <= rtol * self.max_abs()

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.hermitian)

    def _other(self, other):
        if isinstance(other, OperatorMatrix):
            if other.dim != self.dim:
                raise ValueError(f"dimension mismatch {self.dim} vs {other.dim}")
            return other
        return NotImplemented

    def __add__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        a, b = self.entries, other.entries
        if self.is_sparse != other.is_sparse:
            a, b = self.to_sparse(), other.to_sparse()
        return OperatorMatrix(a + b, self.hermitian and other.hermitian)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, scalar):
        if isinstance(scalar, OperatorMatrix):
            return NotImplemented
        herm = self.hermitian and np.isreal(scalar)
        return OperatorMatrix(self.entries * scalar, herm)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._other(other)
            a, b = self.entries, other.entries
            if self.is_sparse != other.is_sparse:
                a, b = self.to_sparse(), other.to_sparse()
            return OperatorMatrix(a @ b, False)
        return self.entries @ other

    def commutator(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return self @ other - other @ self

    def norm(self) -> float:
        """Frobenius norm."""
        if self.is_sparse:
            return float(spla.norm(self.entries))
        return float(np.linalg.norm(self.entries))

    def expect(self, state: np.ndarray) -> complex:
        return complex(np.vdot(state, self.entries @ state))

    def equals(self, other: "OperatorMatrix") -> bool:
        """Exact entrywise equality, independent of representation."""
        if self.dim != other.dim:
            return False
        d = self.to_sparse() - other.to_sparse()
        return d.count_nonzero() == 0


def _representation(dim: int, sparse: bool | None) -> bool:
    return dim > SPARSE_THRESHOLD if sparse is None else bool(sparse)


def annihilation(n_max: int, sparse: bool | None = None) -> OperatorMatrix:
    """Ladder operator with ``<k-1| a |k> = sqrt(k)`` on occupations 0..n_max."""
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be an integer >= 1, got {n_max!r}")
    n_max = int(n_max)
    off = np.sqrt(np.arange(1, n_max + 1, dtype=float))
    m = sp.diags(off, 1, shape=(n_max + 1, n_max + 1), format="csr")
    if not _representation(n_max + 1, sparse):
        m = m.toarray()
    return OperatorMatrix(m)


def creation(n_max: int, sparse: bool | None = None) -> OperatorMatrix:
    return annihilation(n_max, sparse).dag()


def number(n_max: int, sparse: bool | None = None) -> OperatorMatrix:
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be an integer >= 1, got {n_max!r}")
    d = np.arange(int(n_max) + 1, dtype=float)
    m = sp.diags(d, 0, format="csr")
    if not _representation(len(d), sparse):
        m = m.toarray()
    return OperatorMatrix(m, hermitian=True)


def identity(dim: int, sparse: bool | None = None) -> OperatorMatrix:
    m = sp.identity(dim, dtype=float, format="csr")
    if not _representation(dim, sparse):
        m = m.toarray()
    return OperatorMatrix(m, hermitian=True)


def pauli(which: str) -> OperatorMatrix:
    """sigma_x or sigma_z in the ``(|e>, |g>)`` basis."""
    if which == "x":
        return OperatorMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]), hermitian=True)
    if which == "z":
        return OperatorMatrix(np.array([[1.0, 0.0], [0.0, -1.0]]), hermitian=True)
    raise ValueError(f"unknown Pauli matrix {which!r}; expected 'x' or 'z'")


def tensor(factors: Sequence[OperatorMatrix] | Iterable[OperatorMatrix],
           dim_cap: int = DEFAULT_DIM_CAP, sparse: bool | None = None) -> OperatorMatrix:
    """Kronecker product of `factors`, leftmost factor slowest."""
    factors = list(factors)
    if not factors:
        raise ValueError("tensor needs at least one factor")
    dim = int(np.prod([f.dim for f in factors]))
    if dim > dim_cap:
        raise DimensionCapError(f"tensor dimension {dim} exceeds cap {dim_cap}")
    use_sparse = _representation(dim, sparse)
    herm = all(f.hermitian for f in factors)
    if use_sparse:
        m = reduce(lambda x, y: sp.kron(x, y, format="csr"), [f.to_sparse() for f in factors])
    else:
        m = reduce(np.kron, [f.to_dense() for f in factors])
    return OperatorMatrix(m, hermitian=herm)


def parity(n_max: int, sparse: bool | None = None) -> OperatorMatrix:
    """``sigma_z (x) exp(i pi a^dag a)`` on qubit (x) cavity."""
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be an integer >= 1, got {n_max!r}")
    signs = np.where(np.arange(int(n_max) + 1) % 2 == 0, 1.0, -1.0)
    diag = np.concatenate([signs, -signs])
    m = sp.diags(diag, 0, format="csr")
    if not _representation(len(diag), sparse):
        m = m.toarray()
    return OperatorMatrix(m, hermitian=True)
