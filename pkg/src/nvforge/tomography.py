"""Process (chi) matrices of unitary gates in the Pauli-product basis."""

from __future__ import annotations

import itertools
from functools import reduce

import numpy as np

from .linalg import PAULI_LABELS, PAULIS, is_unitary


def pauli_products(n_qubits):
    """Labels and matrices of all 4^n Pauli products, qubit 0 leftmost, ordered I, X, Y, Z."""
    labels, mats = [], []
    for combo in itertools.product(range(4), repeat=n_qubits):
        labels.append("".join(PAULI_LABELS[i] for i in combo))
        mats.append(reduce(np.kron, [PAULIS[i] for i in combo]))
    return labels, np.array(mats)


def pauli_coefficients(u, n_qubits):
    """c_m = tr(P_m^dag u) / 2^n, so that u = sum_m c_m P_m."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2**n_qubits, 2**n_qubits):
        raise ValueError(f"expected a {2**n_qubits}x{2**n_qubits} matrix, got {u.shape}")
    _, mats = pauli_products(n_qubits)
    return np.einsum("mba,ba->m", mats.conj(), u) / 2**n_qubits


def chi_matrix(u, n_qubits):
    """chi_mn = c_m c_n^*; rank one with unit trace for a unitary ``u``."""
    if not is_unitary(u, tol=1e-8):
        raise ValueError("chi_matrix expects a unitary")
    c = pauli_coefficients(u, n_qubits)
    return np.outer(c, c.conj())


def process_fidelity(u, target):
    """|tr(target^dag u)|^2 / d^2, the overlap of the two rank-one chi matrices."""
    d = len(u)
    return float(abs(np.trace(np.asarray(target).conj().T @ u)) ** 2 / d**2)


def chi_entries(chi, n_qubits):
    """JSON-ready list of {row, col, re, im} for every chi element."""
    labels, _ = pauli_products(n_qubits)
    return [
        {"row": labels[i], "col": labels[j], "re": float(chi[i, j].real), "im": float(chi[i, j].imag)}
        for i in range(len(labels))
        for j in range(len(labels))
    ]
