"""GRAPE synthesis of multi-qubit gates for dipolar-coupled NV spins.

Each NV is a qubit in the frame rotating at its own |0> <-> |-1> carrier, so
the static splittings drop out. What remains is a secular ZZ network

    H_drift = 2 pi sum_pairs zz_factor * nu_dip * Z_a Z_b

and two controls per qubit, pi * sigma_x and pi * sigma_y, whose amplitudes
are Rabi frequencies in MHz (a constant amplitude u flips the qubit in 1/(2u) us).
Angular frequencies are rad/us throughout.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .linalg import PAULI_X, PAULI_Y, PAULI_Z, embed, is_hermitian, is_unitary

log = logging.getLogger(__name__)

KHZ = 1e-3  # in MHz
DEFAULT_ZZ_FACTOR = 0.25


def drift_hamiltonian(n_qubits, couplings_khz, zz_factor=DEFAULT_ZZ_FACTOR):
    """ZZ network; ``couplings_khz`` maps (a, b) pairs to nu_dip, or is one value for every pair."""
    if np.isscalar(couplings_khz):
        couplings_khz = {pair: couplings_khz for pair in itertools.combinations(range(n_qubits), 2)}
    d = 2**n_qubits
    h = np.zeros((d, d), dtype=complex)
    for (a, b), nu in couplings_khz.items():
        h += 2 * np.pi * zz_factor * nu * KHZ * embed(PAULI_Z, a, n_qubits) @ embed(PAULI_Z, b, n_qubits)
    return h


def control_operators(n_qubits):
    """[x_1, y_1, x_2, y_2, ...], each pi * sigma so an amplitude in MHz is a Rabi frequency."""
    ops, names = [], []
    for q in range(n_qubits):
        for axis, pauli in (("x", PAULI_X), ("y", PAULI_Y)):
            ops.append(np.pi * embed(pauli, q, n_qubits))
            names.append(f"u{q + 1}{axis}")
    return ops, names


@dataclass
class ControlProblem:
    n_qubits: int
    drift: np.ndarray
    controls: list
    n_slices: int
    slice_duration: float  # us
    target: np.ndarray
    amplitude_bound: float = 10.0  # MHz
    control_names: list = field(default_factory=list)

    def __post_init__(self):
        self.drift = np.asarray(self.drift, dtype=complex)
        self.controls = np.asarray(self.controls, dtype=complex)
        self.target = np.asarray(self.target, dtype=complex)
        d = 2**self.n_qubits
        if self.drift.shape != (d, d) or self.target.shape != (d, d) or self.controls.shape[1:] != (d, d):
            raise ValueError("drift, controls and target must all be 2^n x 2^n")
        if not is_hermitian(self.drift) or not all(is_hermitian(c) for c in self.controls):
            raise ValueError("drift and controls must be Hermitian")
        if not is_unitary(self.target):
            raise ValueError("target must be unitary")
        if not self.control_names:
            self.control_names = [f"c{j}" for j in range(len(self.controls))]

    @property
    def dim(self):
        return 2**self.n_qubits

    @property
    def n_controls(self):
        return len(self.controls)

    @property
    def duration(self):
        return self.n_slices * self.slice_duration

    @classmethod
    def for_target(cls, target, n_qubits, couplings_khz=100.0, n_slices=40, slice_duration=1.0,
                   amplitude_bound=10.0, zz_factor=DEFAULT_ZZ_FACTOR):
        ops, names = control_operators(n_qubits)
        return cls(n_qubits, drift_hamiltonian(n_qubits, couplings_khz, zz_factor), ops, n_slices,
                   slice_duration, target, amplitude_bound, names)


@dataclass
class PulseSequence:
    amplitudes: np.ndarray  # (n_slices, n_controls), MHz
    slice_duration: float  # us

    def __post_init__(self):
        self.amplitudes = np.array(self.amplitudes, dtype=float, ndmin=2)

    @classmethod
    def zeros(cls, prob):
        return cls(np.zeros((prob.n_slices, prob.n_controls)), prob.slice_duration)

    @classmethod
    def random(cls, prob, seed, scale=0.1):
        rng = np.random.default_rng(seed)
        amps = np.clip(rng.normal(0.0, scale, (prob.n_slices, prob.n_controls)), -prob.amplitude_bound, prob.amplitude_bound)
        return cls(amps, prob.slice_duration)


def _check(prob, pulses):
    if pulses.amplitudes.shape != (prob.n_slices, prob.n_controls):
        raise ValueError(
            f"pulse array {pulses.amplitudes.shape} does not match {prob.n_slices} slices x {prob.n_controls} controls"
        )


def _slice_eigen(prob, amps, dt):
    hams = prob.drift[None] + np.einsum("kj,jab->kab", amps, prob.controls)
    w, v = np.linalg.eigh(hams)
    phases = np.exp(-1j * w * dt)
    props = (v * phases[:, None, :]) @ v.conj().transpose(0, 2, 1)
    return w, v, phases, props


def _chain(props):
    """Forward products U_k...U_1 (index k+1) and backward U_N...U_{k+1} (index k)."""
    n, d = len(props), props.shape[-1]
    fwd = np.empty((n + 1, d, d), dtype=complex)
    bwd = np.empty((n + 1, d, d), dtype=complex)
    fwd[0] = bwd[n] = np.eye(d)
    for k in range(n):
        fwd[k + 1] = props[k] @ fwd[k]
    for k in range(n - 1, -1, -1):
        bwd[k] = bwd[k + 1] @ props[k]
    return fwd, bwd


def propagate(prob, pulses):
    """Total propagator U_N ... U_1 of the piecewise-constant controls."""
    _check(prob, pulses)
    if prob.n_slices == 0:
        return np.eye(prob.dim, dtype=complex)
    *_, props = _slice_eigen(prob, pulses.amplitudes, pulses.slice_duration)
    u = np.eye(prob.dim, dtype=complex)
    for p in props:
        u = p @ u
    return u


def fidelity(u, target):
    """Average gate fidelity (tr(M M^dag) + |tr M|^2) / (d (d + 1)) with M = target^dag u."""
    u = np.asarray(u, dtype=complex)
    target = np.asarray(target, dtype=complex)
    if u.shape != target.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {target.shape}")
    d = len(u)
    m = target.conj().T @ u
    return float((np.real(np.trace(m @ m.conj().T)) + abs(np.trace(m)) ** 2) / (d * (d + 1)))


def _divided_differences(mu):
    """(e^{mu_a} - e^{mu_b}) / (mu_a - mu_b), with e^{mu_a} on the diagonal and at degeneracies."""
    diff = mu[..., :, None] - mu[..., None, :]
    safe = np.where(diff == 0, 1.0, diff)
    ratio = np.where(diff == 0, 1.0, np.expm1(safe) / safe)
    return np.exp(mu)[..., None, :] * ratio


def fidelity_and_gradient(prob, pulses):
    """Fidelity and its exact gradient with respect to every amplitude (n_slices x n_controls)."""
    _check(prob, pulses)
    d = prob.dim
    if prob.n_slices == 0:
        return fidelity(np.eye(d), prob.target), np.zeros((0, prob.n_controls))
    dt = pulses.slice_duration
    w, v, _, props = _slice_eigen(prob, pulses.amplitudes, dt)
    fwd, bwd = _chain(props)
    target_dag = prob.target.conj().T
    overlap = np.trace(target_dag @ fwd[-1])
    f = fidelity(fwd[-1], prob.target)

    # d tr(T^dag U) / d u_kj = tr(B_k dU_k), B_k = fwd[k] T^dag bwd[k+1];
    # dU_k = V ((V^dag (-i dt C_j) V) o G) V^dag in the slice eigenbasis.
    g = _divided_differences(-1j * dt * w)
    b = fwd[:-1] @ target_dag[None] @ bwd[1:]
    vh = v.conj().transpose(0, 2, 1)
    b_eig = vh @ b @ v
    c_eig = np.einsum("kia,jab,kbc->kjic", vh, -1j * dt * prob.controls, v)
    d_overlap = np.einsum("kba,kjab,kab->kj", b_eig, c_eig, g)
    grad = 2.0 / (d * (d + 1)) * np.real(np.conj(overlap) * d_overlap)
    return f, grad


def gradient(prob, pulses):
    return fidelity_and_gradient(prob, pulses)[1]


@dataclass
class OptimizeResult:
    pulses: PulseSequence
    fidelity_trace: list
    converged: bool
    iterations: int

    @property
    def fidelity(self):
        return self.fidelity_trace[-1]


def optimize(prob, init=None, max_iters=2000, step_rule="armijo", target_fidelity=0.99, seed=0,
             step=1.0, armijo=1e-4, min_step=1e-12):
    """Projected gradient ascent on the gate fidelity.

    ``step_rule="armijo"`` backtracks (halving) until the sufficient-increase
    condition holds and doubles the trial step after each accepted move, so the
    fidelity trace never decreases. ``"fixed"`` takes clipped steps of size
    ``step`` unconditionally. Non-convergence is reported, not raised; the best
    pulses found are returned.
    """
    if step_rule not in ("armijo", "fixed"):
        raise ValueError(f"unknown step rule {step_rule!r}")
    bound = prob.amplitude_bound
    pulses = init if init is not None else PulseSequence.random(prob, seed)
    if np.any(np.abs(pulses.amplitudes) > bound):
        raise ValueError("initial pulses exceed the amplitude bound")
    amps = pulses.amplitudes.copy()
    dt = pulses.slice_duration

    f, grad = fidelity_and_gradient(prob, PulseSequence(amps, dt))
    trace = [f]
    best = (f, amps.copy())
    it = 0
    while it < max_iters and f < target_fidelity:
        if step_rule == "fixed":
            amps = np.clip(amps + step * grad, -bound, bound)
        else:
            while True:
                trial = np.clip(amps + step * grad, -bound, bound)
                f_trial = fidelity(propagate(prob, PulseSequence(trial, dt)), prob.target)
                if f_trial >= f + armijo * float(np.sum(grad * (trial - amps))):
                    break
                step *= 0.5
                if step < min_step:
                    trial = amps
                    break
            if trial is amps:
                log.info("line search stalled at iteration %d, F=%.6f", it, f)
                break
            amps = trial
            step *= 2.0
        f, grad = fidelity_and_gradient(prob, PulseSequence(amps, dt))
        trace.append(f)
        it += 1
        if f > best[0]:
            best = (f, amps.copy())
    converged = best[0] >= target_fidelity
    return OptimizeResult(PulseSequence(best[1], dt), trace, converged, it)
