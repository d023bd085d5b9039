"""Dense complex linear algebra shared by every other module.

Hamiltonians are angular frequencies in rad/us (i.e. 2*pi*MHz) and times are
in microseconds, so ``matexp(h, t)`` is simply ``exp(-1j * h * t)``.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

UNITARY_TOL = 1e-10
HERMITIAN_TOL = 1e-12

# qubit Pauli basis, ordered I, X, Y, Z
PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_LABELS = ("I", "X", "Y", "Z")
PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)

_R2 = 1 / np.sqrt(2)
# spin-1 operators in the {|+1>, |0>, |-1>} basis
SPIN1_X = _R2 * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
SPIN1_Y = _R2 * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex)
SPIN1_Z = np.diag([1.0, 0.0, -1.0]).astype(complex)


def operator_basis(kind):
    """Return the ordered operator list for ``"spin-1"`` or ``"qubit-pauli"``."""
    if kind == "spin-1":
        return [SPIN1_X, SPIN1_Y, SPIN1_Z]
    if kind == "qubit-pauli":
        return list(PAULIS)
    raise ValueError(f"unknown operator basis {kind!r}")


def _square(a, name="matrix"):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def is_hermitian(h, tol=HERMITIAN_TOL):
    h = _square(h)
    return bool(np.max(np.abs(h - h.conj().T), initial=0.0) <= tol)


def is_unitary(u, tol=UNITARY_TOL):
    u = _square(u)
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(len(u))), initial=0.0) <= tol)


def kron(a, b, *more):
    """Kronecker product of two or more square matrices (left factor most significant)."""
    mats = [_square(m) for m in (a, b, *more)]
    return reduce(np.kron, mats)


def embed(op, qubit, n_qubits):
    """Place a single-qubit operator on ``qubit`` of an ``n_qubits`` register."""
    if not 0 <= qubit < n_qubits:
        raise IndexError(f"qubit {qubit} out of range for {n_qubits} qubits")
    factors = [PAULI_I] * n_qubits
    factors[qubit] = _square(op)
    return reduce(np.kron, factors)


def matexp(h, t):
    """Propagator ``exp(-i h t)`` of a Hermitian generator via eigendecomposition.

    Args:
        h: Hermitian matrix in rad/us.
        t: Evolution time in us.

    Raises:
        ValueError: if ``h`` is not Hermitian to 1e-12.
    """
    h = _square(h, "generator")
    if not is_hermitian(h):
        raise ValueError("matexp requires a Hermitian generator")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def global_phase(u, v):
    """Phase factor ``e^{i phi}`` aligning ``v`` onto ``u`` by the phase of tr(v^dagger u)."""
    overlap = np.trace(v.conj().T @ u)
    if abs(overlap) < 1e-300:
        return 1.0 + 0j
    return overlap / abs(overlap)


def equal_up_to_global_phase(u, v, tol=1e-9):
    u = _square(u)
    v = _square(v)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    phase = global_phase(u, v)
    return bool(np.max(np.abs(u - phase * v)) <= tol)
