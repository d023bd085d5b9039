import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nvforge.gates import cnot_matrix
from nvforge.grape import fidelity
from nvforge.tomography import chi_entries, chi_matrix, pauli_coefficients, pauli_products, process_fidelity

from conftest import random_unitary


def test_pauli_products_order():
    labels, mats = pauli_products(2)
    assert labels[:5] == ["II", "IX", "IY", "IZ", "XI"]
    assert mats.shape == (16, 4, 4)
    gram = np.einsum("mab,nab->mn", mats.conj(), mats) / 4
    assert np.allclose(gram, np.eye(16))


def test_identity_chi():
    chi = chi_matrix(np.eye(2), 1)
    expected = np.zeros((4, 4))
    expected[0, 0] = 1
    assert np.allclose(chi, expected)


def test_cnot_chi():
    chi = chi_matrix(cnot_matrix(), 2)
    labels, _ = pauli_products(2)
    support = [labels.index(p) for p in ("II", "IX", "ZI", "ZX")]
    assert np.isclose(np.trace(chi).real, 1) and np.linalg.matrix_rank(chi, tol=1e-10) == 1
    mask = np.zeros_like(chi, dtype=bool)
    mask[np.ix_(support, support)] = True
    assert np.allclose(chi[~mask], 0)
    assert np.allclose(np.abs(chi[mask]), 0.25)
    # CNOT = (II + IX + ZI - ZX) / 2
    c = pauli_coefficients(cnot_matrix(), 2)
    assert np.allclose(c[support], [0.5, 0.5, 0.5, -0.5])


def test_non_unitary_rejected():
    with pytest.raises(ValueError):
        chi_matrix(2 * np.eye(4), 2)
    with pytest.raises(ValueError):
        pauli_coefficients(np.eye(4), 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_chi_of_random_unitary(n, seed):
    u = random_unitary(2**n, np.random.default_rng(seed))
    chi = chi_matrix(u, n)
    assert np.isclose(np.trace(chi).real, 1)
    assert np.allclose(chi, chi.conj().T)
    assert np.min(np.linalg.eigvalsh(chi)) > -1e-12
    # expansion reconstructs the operator
    _, mats = pauli_products(n)
    assert np.allclose(np.einsum("m,mab->ab", pauli_coefficients(u, n), mats), u)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_chi_distance_tracks_fidelity(seed):
    r = np.random.default_rng(seed)
    u, v = random_unitary(4, r), random_unitary(4, r)
    d = 4
    f_pro = process_fidelity(u, v)
    dist = np.linalg.norm(chi_matrix(u, 2) - chi_matrix(v, 2))
    assert dist == pytest.approx(np.sqrt(2 * (1 - f_pro)), abs=1e-10)
    assert fidelity(u, v) == pytest.approx((d * f_pro + 1) / (d + 1))


def test_chi_entries_layout():
    rows = chi_entries(chi_matrix(cnot_matrix(), 2), 2)
    assert len(rows) == 256
    assert set(rows[0]) == {"row", "col", "re", "im"}
    assert rows[0]["row"] == "II" and rows[0]["re"] == pytest.approx(0.25)
