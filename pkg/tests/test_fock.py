import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from kerrspt import fock
from kerrspt.errors import DimensionCapError
from kerrspt.fock import FockCutoff, OperatorMatrix


@pytest.mark.parametrize("sparse", [False, True])
def test_ladder_algebra(sparse):
    n = 12
    a = fock.annihilation(n, sparse=sparse)
    ad = fock.creation(n, sparse=sparse)
    assert a.is_sparse == sparse
    comm = a.commutator(ad).to_dense()
    expected = np.eye(n + 1)
    expected[n, n] = -n  # truncation edge
    np.testing.assert_allclose(comm, expected, atol=1e-12)
    np.testing.assert_allclose((ad @ a).to_dense(), fock.number(n).to_dense(), atol=1e-12)


def test_annihilation_entries():
    a = fock.annihilation(4).to_dense()
    np.testing.assert_allclose(np.diag(a, 1), np.sqrt([1, 2, 3, 4]))
    assert np.count_nonzero(a) == 4


def test_pauli_and_tensor():
    sz = fock.pauli("z")
    sx = fock.pauli("x")
    assert (sz @ sx + sx @ sz).max_abs() == 0
    with pytest.raises(ValueError):
        fock.pauli("y")
    t = fock.tensor([sz, fock.number(3)])
    np.testing.assert_allclose(t.to_dense(), np.kron(sz.to_dense(), np.diag([0., 1, 2, 3])))
    assert t.hermitian


def test_parity_matches_exponential():
    n = 6
    par = fock.parity(n).to_dense()
    expected = np.kron(np.diag([1.0, -1.0]), np.diag(np.cos(np.pi * np.arange(n + 1))))
    np.testing.assert_allclose(par, expected, atol=1e-15)


def test_cutoff_dimension_and_cap():
    c = FockCutoff(10, 2)
    assert c.dim == 2 * 11 * 3
    with pytest.raises(DimensionCapError):
        FockCutoff(100, 100, dim_cap=1000)
    with pytest.raises(DimensionCapError):
        fock.tensor([fock.identity(50), fock.identity(50)], dim_cap=100)
    with pytest.raises(ValueError):
        FockCutoff(0)


def test_hermiticity_flag_checked():
    with pytest.raises(ValueError):
        OperatorMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]), hermitian=True)
    assert not fock.annihilation(3).is_hermitian()
    x = fock.annihilation(3) + fock.creation(3)
    assert x.is_hermitian()


def test_dense_sparse_round_trip():
    a = fock.annihilation(5, sparse=True)
    assert isinstance(a.entries, sp.csr_matrix)
    assert a.as_dense().equals(a)
    assert a.as_dense().as_sparse().equals(a)
    assert (2.0 * a - a).equals(a)
    assert a.norm() == pytest.approx(np.sqrt(15))


@given(st.integers(1, 30))
def test_number_expectation(n):
    num = fock.number(n)
    v = np.zeros(n + 1)
    v[n] = 1
    assert num.expect(v) == pytest.approx(n)
