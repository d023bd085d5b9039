import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nvforge.gates import cnot_matrix, cz_matrix, toffoli_matrix
from nvforge.grape import (
    ControlProblem,
    PulseSequence,
    control_operators,
    drift_hamiltonian,
    fidelity,
    fidelity_and_gradient,
    gradient,
    optimize,
    propagate,
)
from nvforge.linalg import PAULI_I, PAULI_X, PAULI_Z, equal_up_to_global_phase, is_unitary

from conftest import random_unitary


def problem(target, n=2, slices=10, dt=1.0, nu=100.0, bound=10.0):
    return ControlProblem.for_target(target, n, couplings_khz=nu, n_slices=slices, slice_duration=dt, amplitude_bound=bound)


def haar_states(d, n, rng):
    psi = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    return psi / np.linalg.norm(psi, axis=1, keepdims=True)


def test_control_names_and_shapes():
    ops, names = control_operators(3)
    assert names == ["u1x", "u1y", "u2x", "u2y", "u3x", "u3y"]
    assert np.allclose(ops[0], np.pi * np.kron(PAULI_X, np.eye(4)))


def test_drift_forms():
    h = drift_hamiltonian(2, 100.0)
    assert np.allclose(h, 2 * np.pi * 0.25 * 0.1 * np.kron(PAULI_Z, PAULI_Z))
    h3 = drift_hamiltonian(3, {(0, 2): 50.0}, zz_factor=1.0)
    zz = np.kron(np.kron(PAULI_Z, PAULI_I), PAULI_Z)
    assert np.allclose(h3, 2 * np.pi * 0.05 * zz)


def test_problem_validation():
    with pytest.raises(ValueError):
        problem(np.eye(8), n=2)
    with pytest.raises(ValueError):
        problem(2 * np.eye(4))
    prob = problem(np.eye(4))
    with pytest.raises(ValueError):
        propagate(prob, PulseSequence(np.zeros((3, 4)), 1.0))


def test_propagate_trivial_cases():
    prob = problem(np.eye(4), nu=0.0)
    assert np.allclose(propagate(prob, PulseSequence.zeros(prob)), np.eye(4))


def test_drift_only_closed_form():
    nu, slices = 100.0, 7
    prob = problem(np.eye(4), slices=slices, dt=0.9, nu=nu)
    u = propagate(prob, PulseSequence.zeros(prob))
    phase = 2 * np.pi * (nu * 1e-3 / 4) * slices * 0.9
    assert np.allclose(u, np.diag(np.exp(-1j * phase * np.array([1, -1, -1, 1]))), atol=1e-12)


def test_single_qubit_pi_pulse():
    prob = ControlProblem(1, np.zeros((2, 2)), control_operators(1)[0], 1, 1.0, PAULI_X)
    u = propagate(prob, PulseSequence([[0.5, 0.0]], 1.0))
    assert equal_up_to_global_phase(u, PAULI_X)
    assert fidelity(u, PAULI_X) == pytest.approx(1.0)


def test_fidelity_examples():
    u = random_unitary(4, np.random.default_rng(3))
    assert fidelity(u, u) == pytest.approx(1.0)
    assert fidelity(np.kron(PAULI_X, PAULI_I), np.eye(4)) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        fidelity(np.eye(2), np.eye(4))


def test_fidelity_matches_state_average(rng):
    u, v = cnot_matrix(), cz_matrix()
    psi = haar_states(4, 100_000, rng)
    overlaps = np.abs(np.einsum("ni,ij,nj->n", psi.conj(), v.conj().T @ u, psi)) ** 2
    assert fidelity(u, v) == pytest.approx(overlaps.mean(), abs=1e-3)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_fidelity_bounds_and_phase_invariance(n, seed):
    r = np.random.default_rng(seed)
    u, v = random_unitary(2**n, r), random_unitary(2**n, r)
    f = fidelity(u, v)
    # tr(M M^dag) = d for unitaries, so F >= 1/(d+1)
    assert 1 / (2**n + 1) - 1e-12 <= f <= 1 + 1e-12
    assert fidelity(np.exp(0.7j) * u, v) == pytest.approx(f)


def central_difference(prob, amps, h=1e-6):
    fd = np.zeros_like(amps)
    for idx in np.ndindex(amps.shape):
        plus, minus = amps.copy(), amps.copy()
        plus[idx] += h
        minus[idx] -= h
        fp = fidelity(propagate(prob, PulseSequence(plus, prob.slice_duration)), prob.target)
        fm = fidelity(propagate(prob, PulseSequence(minus, prob.slice_duration)), prob.target)
        fd[idx] = (fp - fm) / (2 * h)
    return fd


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_finite_differences(seed):
    r = np.random.default_rng(seed)
    prob = problem(random_unitary(4, r), slices=6, dt=0.5)
    amps = r.uniform(-2, 2, (6, 4))
    g = gradient(prob, PulseSequence(amps, 0.5))
    assert np.allclose(g, central_difference(prob, amps), rtol=1e-5, atol=0)


def test_gradient_vanishes_at_exact_solution():
    r = np.random.default_rng(8)
    prob = problem(np.eye(4), slices=5)
    pulses = PulseSequence(r.uniform(-1, 1, (5, 4)), 1.0)
    prob.target = propagate(prob, pulses)
    f, g = fidelity_and_gradient(prob, pulses)
    assert f == pytest.approx(1.0)
    assert np.linalg.norm(g) < 1e-8


def test_zero_duration_problem():
    prob = problem(np.eye(4), slices=0)
    f, g = fidelity_and_gradient(prob, PulseSequence.zeros(prob))
    assert f == pytest.approx(1.0)
    assert g.shape == (0, 4)


def test_identity_target_converges_immediately():
    prob = problem(np.eye(4), nu=0.0)
    res = optimize(prob, PulseSequence.zeros(prob))
    assert res.converged and res.iterations == 0
    assert res.fidelity == pytest.approx(1.0)


def test_random_init_is_seeded():
    prob = problem(np.eye(4))
    a = PulseSequence.random(prob, 5).amplitudes
    assert np.array_equal(a, PulseSequence.random(prob, 5).amplitudes)
    assert not np.array_equal(a, PulseSequence.random(prob, 6).amplitudes)


def test_cnot_optimisation():
    prob = problem(cnot_matrix(), slices=40)
    res = optimize(prob, seed=0, max_iters=2000)
    assert res.converged and res.fidelity >= 0.99
    assert np.all(np.diff(res.fidelity_trace) >= 0)
    assert np.max(np.abs(res.pulses.amplitudes)) <= prob.amplitude_bound
    assert fidelity(propagate(prob, res.pulses), prob.target) == pytest.approx(res.fidelity)


def test_tight_bound_is_respected_and_reported():
    prob = problem(cnot_matrix(), slices=40, bound=0.05)
    res = optimize(prob, PulseSequence.zeros(prob), max_iters=20)
    assert not res.converged
    assert np.max(np.abs(res.pulses.amplitudes)) <= 0.05
    assert np.all(np.diff(res.fidelity_trace) >= 0)


def test_fixed_step_rule_runs():
    prob = problem(cnot_matrix(), slices=40)
    res = optimize(prob, step_rule="fixed", step=0.5, max_iters=30)
    assert len(res.fidelity_trace) == res.iterations + 1
    with pytest.raises(ValueError):
        optimize(prob, step_rule="newton")


def test_init_outside_bound_rejected():
    prob = problem(cnot_matrix(), bound=1.0)
    with pytest.raises(ValueError):
        optimize(prob, PulseSequence(np.full((10, 4), 2.0), 1.0))


@pytest.mark.slow
def test_toffoli_optimisation():
    prob = ControlProblem.for_target(toffoli_matrix(), 3, n_slices=50)
    res = optimize(prob, seed=0, max_iters=5000)
    assert res.fidelity >= 0.99
    assert is_unitary(propagate(prob, res.pulses))
