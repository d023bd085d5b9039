"""Analytic gate constructions for dipolar-coupled NV electron-spin qubits.

Each NV is truncated to the qubit |0> = m_s 0, |1> = m_s -1, and Z-type
operators in gate formulas are Pauli Z with eigenvalues +-1. Qubit 0 is the
most significant factor of the register, so |10> has qubit 0 set.

A :class:`GateSequence` is written like an operator product: its first entry
is the leftmost factor, so the *last* entry acts first.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .linalg import PAULI_X, PAULI_Y, PAULI_Z, embed, is_unitary, matexp

AXES = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}


@dataclass(frozen=True)
class Rotation:
    """Single-qubit rotation exp(-i sigma_axis angle / 2)."""

    axis: str
    angle: float
    qubit: int
    kind: str = field(default="rotation", init=False)

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"rotation axis must be x, y or z, got {self.axis!r}")

    def unitary(self, n_qubits):
        return matexp(0.5 * self.angle * embed(AXES[self.axis], self.qubit, n_qubits), 1.0)

    def qubits(self):
        return (self.qubit,)


@dataclass(frozen=True)
class ZZEvolution:
    """exp(-i angle Z_a Z_b)."""

    angle: float
    pair: tuple
    kind: str = field(default="zz_evolution", init=False)

    def unitary(self, n_qubits):
        a, b = self.pair
        zz = embed(PAULI_Z, a, n_qubits) @ embed(PAULI_Z, b, n_qubits)
        return matexp(self.angle * zz, 1.0)

    def qubits(self):
        return tuple(self.pair)


@dataclass(frozen=True)
class FlipFlop:
    """Resonantly driven flip-flop exchange for ``nu_t`` = duration x nu_dip (1 gives sqrt-SWAP, 2 SWAP)."""

    nu_t: float
    pair: tuple
    kind: str = field(default="flipflop_evolution", init=False)

    def unitary(self, n_qubits):
        a, b = self.pair
        return matexp(_exchange_generator(a, b, n_qubits), self.nu_t)

    def qubits(self):
        return tuple(self.pair)


@dataclass(frozen=True)
class GlobalPhase:
    angle: float
    kind: str = field(default="global_phase", init=False)

    def unitary(self, n_qubits):
        return np.exp(1j * self.angle) * np.eye(2**n_qubits, dtype=complex)

    def qubits(self):
        return ()


Primitive = Union[Rotation, ZZEvolution, FlipFlop, GlobalPhase]


@dataclass(frozen=True)
class GateSequence:
    """Operator product of primitives and named sub-sequences ("hadamard", "cnot", ...)."""

    n_qubits: int
    primitives: tuple = ()
    name: str = ""
    kind: str = field(default="sequence", init=False)

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))

    def qubits(self):
        return tuple(sorted({q for p in self.primitives for q in p.qubits()}))

    def unitary(self, n_qubits=None):
        return compile(GateSequence(n_qubits or self.n_qubits, self.primitives))

    def flatten(self):
        for p in self.primitives:
            if isinstance(p, GateSequence):
                yield from p.flatten()
            else:
                yield p


def _exchange_generator(a, b, n_qubits):
    """Flip-flop generator per unit nu_t, normalised so a full exchange takes nu_t = 2."""
    xx = embed(PAULI_X, a, n_qubits) @ embed(PAULI_X, b, n_qubits)
    yy = embed(PAULI_Y, a, n_qubits) @ embed(PAULI_Y, b, n_qubits)
    # odd-parity matrix element 2*pi/8 per unit nu_t
    return (2 * math.pi / 16) * (xx + yy)


def compile(seq):
    """Unitary of a gate sequence: ordered product, rightmost entry applied first."""
    n = seq.n_qubits
    u = np.eye(2**n, dtype=complex)
    for p in seq.primitives:
        bad = [q for q in p.qubits() if not 0 <= q < n]
        if bad:
            raise IndexError(f"qubit index {bad[0]} out of range for {n} qubits")
        u = u @ p.unitary(n)
    return u


# ------------------------------------------------------------------ couplings

# Measured secular couplings at 8 nm (kHz); 1/r^3 scaling elsewhere.
NU_DIP_PARALLEL_8NM = 101.0
NU_DIP_NONPARALLEL_8NM = 42.7


@dataclass(frozen=True)
class DipolarCoupling:
    strength: float  # kHz
    separation: float  # nm
    parallel: bool = True

    def __post_init__(self):
        if not (self.strength > 0 and self.separation > 0):
            raise ValueError("coupling strength and separation must be positive")

    @classmethod
    def at(cls, r, parallel=True):
        return cls(dipolar_strength(r, parallel), r, parallel)


def dipolar_strength(r, parallel=True):
    """ZZ coupling in kHz between two NV spins ``r`` nm apart."""
    if r <= 0:
        raise ValueError("separation must be positive")
    anchor = NU_DIP_PARALLEL_8NM if parallel else NU_DIP_NONPARALLEL_8NM
    return anchor * (8.0 / r) ** 3


# ---------------------------------------------------------------- reference gates


def cnot_matrix(control=0, target=1, n_qubits=2):
    p1 = embed(np.diag([0.0, 1.0]), control, n_qubits)
    return np.eye(2**n_qubits) - p1 + p1 @ embed(PAULI_X, target, n_qubits)


def cz_matrix():
    return np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)


def hadamard_matrix():
    return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def toffoli_matrix():
    u = np.eye(8, dtype=complex)
    u[[6, 7]] = u[[7, 6]]
    return u


def swap_matrix():
    return np.eye(4, dtype=complex)[[0, 2, 1, 3]]


# ------------------------------------------------------------------ constructions


def hadamard_sequence(qubit=0, n_qubits=1):
    h = math.pi / 2
    return GateSequence(
        n_qubits, (Rotation("z", h, qubit), Rotation("x", h, qubit), Rotation("z", h, qubit)), name="hadamard"
    )


def cz_sequence(pair=(0, 1), n_qubits=2):
    """e^{i pi/4} e^{i Z1 Z2 pi/4} e^{-i Z1 pi/4} e^{-i Z2 pi/4}, exactly diag(1, 1, 1, -1)."""
    a, b = pair
    return GateSequence(
        n_qubits,
        (
            GlobalPhase(math.pi / 4),
            ZZEvolution(-math.pi / 4, (a, b)),
            Rotation("z", math.pi / 2, a),
            Rotation("z", math.pi / 2, b),
        ),
        name="cz",
    )


def cnot_from_cz(control=0, target=1, n_qubits=2):
    """Hadamard on the target either side of a CZ."""
    h = hadamard_sequence(target, n_qubits)
    return GateSequence(n_qubits, (h, cz_sequence((control, target), n_qubits), h), name="cnot")


def flipflop_evolution(nu_dip, duration, omega1=0.0, omega2=0.0):
    """Two-qubit propagator of the driven flip-flop Hamiltonian.

    Args:
        nu_dip: Dipolar coupling in kHz.
        duration: Evolution time in us.
        omega1, omega2: Rabi terms along Z on each qubit, kHz.
    """
    if duration < 0:
        raise ValueError("duration must be non-negative")
    to_rad_per_us = 2 * math.pi * 1e-3
    h = nu_dip * 1e-3 * _exchange_generator(0, 1, 2) + to_rad_per_us * (
        omega1 * embed(PAULI_Z, 0, 2) + omega2 * embed(PAULI_Z, 1, 2)
    )
    return matexp(h, duration)


def cnot_from_sqrtswap(control=0, target=1, n_qubits=2):
    """CNOT from two sqrt-SWAP flip-flops and seven pi/2 and pi rotations.

    With F the half exchange, F X_c F = X_c exp(-i pi/4 X_c X_t); conjugating
    the control by Ry(pi/2) turns this into exp(i pi/4 Z_c X_t), which with
    Rz_c(pi/2) and Rx_t(-pi/2) (absorbing one X_t) is a CNOT.
    """
    c, t = control, target
    pi = math.pi
    ff = FlipFlop(1.0, (c, t))
    return GateSequence(
        n_qubits,
        (
            Rotation("x", pi, t),
            Rotation("y", pi / 2, c),
            Rotation("x", pi, c),
            ff,
            Rotation("x", pi, c),
            ff,
            Rotation("y", -pi / 2, c),
            Rotation("z", pi / 2, c),
            Rotation("x", -pi / 2, t),
        ),
        name="cnot",
    )


def swap_sequence(pair=(0, 1), n_qubits=2):
    return GateSequence(n_qubits, (FlipFlop(2.0, tuple(pair)),), name="swap")


def sqrtswap_sequence(pair=(0, 1), n_qubits=2):
    return GateSequence(n_qubits, (FlipFlop(1.0, tuple(pair)),), name="sqrt_swap")


def toffoli_sequence(cnot=cnot_from_cz):
    """Toffoli on qubits (0, 1 -> 2) from six CNOTs, two Hadamards and eight Z rotations."""
    pi = math.pi
    n = 3

    def rz(angle, q):
        return Rotation("z", angle, q)

    h2 = hadamard_sequence(2, n)
    return GateSequence(
        n,
        (
            h2,
            cnot(1, 2, n),
            rz(-pi / 4, 2),
            cnot(0, 2, n),
            rz(pi / 4, 2),
            cnot(1, 2, n),
            rz(-pi / 4, 2),
            cnot(0, 2, n),
            rz(pi / 4, 2),
            rz(-pi / 4, 1),
            h2,
            cnot(0, 1, n),
            rz(-pi / 4, 1),
            cnot(0, 1, n),
            rz(pi / 2, 1),
            rz(pi / 4, 0),
        ),
        name="toffoli",
    )


def census(seq):
    """Count top-level gates as {"cnot": ..., "single": ..., ...}.

    Rotations and Hadamard blocks count as single-qubit gates; other named
    blocks count under their name; bare two-qubit primitives under their kind.
    """
    counts = Counter()
    for p in seq.primitives:
        if isinstance(p, Rotation) or (isinstance(p, GateSequence) and p.name == "hadamard"):
            counts["single"] += 1
        elif isinstance(p, GateSequence):
            counts[p.name or "sequence"] += 1
        elif not isinstance(p, GlobalPhase):
            counts[p.kind] += 1
    return dict(counts)


def total_gate_time(seq, nu_dip, rabi):
    """Duration in us.

    Rotations take |angle| / (2 pi rabi) with ``rabi`` in MHz (``math.inf``
    makes them free); flip-flops take nu_t / nu_dip; a ZZ phase accumulates
    under the secular coupling nu_dip/4 Z Z. ``nu_dip`` is in kHz.
    """
    if nu_dip <= 0 or rabi <= 0:
        raise ValueError("rates must be positive")
    nu_mhz = nu_dip * 1e-3
    total = 0.0
    for p in seq.flatten():
        if isinstance(p, Rotation):
            total += abs(p.angle) / (2 * math.pi * rabi)
        elif isinstance(p, FlipFlop):
            total += p.nu_t / nu_mhz
        elif isinstance(p, ZZEvolution):
            total += abs(p.angle) / (2 * math.pi * nu_mhz / 4)
    return total


def check_unitary(seq):
    u = compile(seq)
    if not is_unitary(u):
        raise ArithmeticError(f"compiled sequence {seq.name!r} is not unitary")
    return u


# ------------------------------------------------------------------ serialisation


def to_dict(item):
    if isinstance(item, GateSequence):
        return {
            "kind": "sequence",
            "name": item.name,
            "n_qubits": item.n_qubits,
            "primitives": [to_dict(p) for p in item.primitives],
        }
    if isinstance(item, Rotation):
        return {"kind": item.kind, "axis": item.axis, "angle": item.angle, "qubit": item.qubit}
    if isinstance(item, ZZEvolution):
        return {"kind": item.kind, "angle": item.angle, "pair": list(item.pair)}
    if isinstance(item, FlipFlop):
        return {"kind": item.kind, "nu_t": item.nu_t, "pair": list(item.pair)}
    if isinstance(item, GlobalPhase):
        return {"kind": item.kind, "angle": item.angle}
    raise TypeError(f"cannot serialise {item!r}")


def from_dict(d):
    kind = d["kind"]
    if kind == "sequence":
        return GateSequence(d["n_qubits"], tuple(from_dict(p) for p in d["primitives"]), d.get("name", ""))
    if kind == "rotation":
        return Rotation(d["axis"], float(d["angle"]), int(d["qubit"]))
    if kind == "zz_evolution":
        return ZZEvolution(float(d["angle"]), tuple(d["pair"]))
    if kind == "flipflop_evolution":
        return FlipFlop(float(d["nu_t"]), tuple(d["pair"]))
    if kind == "global_phase":
        return GlobalPhase(float(d["angle"]))
    raise ValueError(f"unknown primitive kind {kind!r}")
