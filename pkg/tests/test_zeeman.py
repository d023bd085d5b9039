import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nvforge.linalg import SPIN1_X, SPIN1_Y, SPIN1_Z, is_hermitian
from nvforge.orientations import ALIGNED, TILTED, angle_to_field
from nvforge.zeeman import (
    NVConfiguration,
    ZeemanParameters,
    addressable_count,
    cross_relaxation_windows,
    hamiltonian_matrix,
    nv_hamiltonian,
    p1_transition,
    scan_rows,
    tracked_levels,
    transition_frequencies,
)

P = ZeemanParameters()
TILTED_CFG = NVConfiguration(TILTED[0])


def oracle_levels(b, theta_deg, phi_deg=0.0, D=2880.0, gamma=2.8):
    """Sorted eigenvalues of D Sz^2 + gamma B (cos t Sz - sin t (cos p Sx + sin p Sy))."""
    t, ph = np.radians(theta_deg), np.radians(phi_deg)
    h = D * SPIN1_Z @ SPIN1_Z + gamma * b * (
        np.cos(t) * SPIN1_Z - np.sin(t) * (np.cos(ph) * SPIN1_X + np.sin(ph) * SPIN1_Y)
    )
    return np.linalg.eigvalsh(h)


def oracle_gaps(b, theta_deg):
    e = oracle_levels(b, theta_deg)
    return sorted(abs(a - c) for a, c in itertools.combinations(e, 2))


def test_hamiltonian_examples():
    assert np.allclose(nv_hamiltonian(0.0), np.diag([2880, 0, 2880]))
    assert np.allclose(nv_hamiltonian(100.0), np.diag([2880 + 280, 0, 2880 - 280]))
    assert is_hermitian(nv_hamiltonian(300.0, TILTED_CFG))
    with pytest.raises(ValueError):
        nv_hamiltonian(-1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2000), st.floats(0, 180), st.floats(0, 360))
def test_hamiltonian_spectrum_matches_spin_operator_oracle(b, theta, phi):
    w = np.linalg.eigvalsh(hamiltonian_matrix(b, theta, phi))
    assert np.allclose(w, oracle_levels(b, theta, phi), atol=1e-8)


def test_transition_examples():
    assert transition_frequencies(0.0) == (2880.0, 2880.0, 0.0)
    assert np.allclose(transition_frequencies(200.0), (3440.0, 2320.0, 1120.0), rtol=0, atol=1e-9)


def test_tilted_transitions_match_oracle_and_bend():
    tr = transition_frequencies(200.0, TILTED_CFG)
    assert np.allclose(sorted(tr), oracle_gaps(200.0, angle_to_field(TILTED[0])), atol=1e-8)
    # state mixing pushes the lines off the linear D +- delta law
    assert abs(tr.zero_minus - (2880 - 560)) > 1.0
    assert abs(tr.zero_plus - (2880 + 560)) > 1.0


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1000))
def test_aligned_lines_are_linear(b):
    zp, zm, pm = transition_frequencies(b)
    assert zp == pytest.approx(2880 + 2.8 * b, rel=1e-12)
    assert zm == pytest.approx(abs(2880 - 2.8 * b), rel=1e-12, abs=1e-9)
    assert pm == pytest.approx(2 * 2.8 * b, rel=1e-12, abs=1e-9)


def test_tracking_keeps_labels_through_crossing():
    # aligned |0>-|-1> passes through zero at D / gamma; labels must follow it
    b = np.linspace(0, 1500, 1501)
    levels, _ = tracked_levels(b, 0.0)
    assert np.allclose(levels[:, 2], 2880 - 2.8 * b)
    assert np.allclose(levels[:, 1], 0.0)


def test_tracking_from_nonzero_start_matches_full_ramp():
    full, _ = tracked_levels(np.arange(0, 401.0), angle_to_field(TILTED[0]))
    part, _ = tracked_levels(np.arange(100, 401.0), angle_to_field(TILTED[0]))
    assert np.allclose(full[100:], part)


def test_p1_line():
    assert p1_transition(0.0) == 0.0
    assert p1_transition(100.0) == pytest.approx(280.0)
    assert p1_transition(1000.0) == pytest.approx(2800.0)


def test_addressable_count_examples():
    assert addressable_count(800.0, 0.2) == 4000
    assert addressable_count(0.0, 0.2) == 0
    assert addressable_count(10.0, 0.1) == 100
    with pytest.raises(ValueError):
        addressable_count(10.0, 0.0)


def test_scan_rows_cover_all_orientations_and_p1():
    rows = scan_rows([0.0, 100.0])
    assert len(rows) == 2 * (4 * 3 + 1)
    orientations = {r[1] for r in rows}
    assert orientations == {ALIGNED, *TILTED, "P1"}
    # tilted orientations are degenerate in a field along the aligned axis
    at100 = {(r[1], r[2]): r[3] for r in rows if r[0] == 100.0}
    for label in ("0->+1", "0->-1", "+1->-1"):
        vals = [at100[(o, label)] for o in TILTED]
        assert np.ptp(vals) < 1e-9


def test_window_100_400():
    windows = cross_relaxation_windows((100, 400), 1.0, 10.0)
    assert len(windows) == 1
    w = windows[0]
    assert w.b_min == pytest.approx(100) and w.b_max == pytest.approx(400)
    assert w.span_mhz == pytest.approx(840.0, rel=1e-9)


def test_window_near_zero_field():
    # only the b=0 degeneracy sits nearby; a fine guard leaves one window
    windows = cross_relaxation_windows((0, 5), 0.1, 1.0)
    assert len(windows) == 1
    assert windows[0].b_max == pytest.approx(5)
    assert 0 < windows[0].b_min < 1.5


def test_huge_guard_gives_no_windows():
    assert cross_relaxation_windows((0, 1000), 5.0, 1e6) == []


@pytest.mark.parametrize("bad", [((400, 100), 1.0, 10.0), ((-1, 10), 1.0, 10.0), ((0, 10), 0.0, 10.0), ((0, 10), 1.0, -1.0)])
def test_window_argument_validation(bad):
    with pytest.raises(ValueError):
        cross_relaxation_windows(*bad)


def _min_separation(b):
    """Label-free oracle: every aligned/tilted line plus P1, without the aligned +1<->-1 line."""
    delta = 2.8 * b
    lines = [2880 + delta, abs(2880 - delta), *oracle_gaps(b, angle_to_field(TILTED[0])), delta]
    return min(abs(x - y) for x, y in itertools.combinations(lines, 2))


def test_windows_agree_with_brute_force_scan():
    guard = 10.0
    windows = cross_relaxation_windows((0, 1500), 1.0, guard)
    assert len(windows) >= 2
    for w in windows:
        for b in np.linspace(w.b_min + 0.05, w.b_max - 0.05, 25):
            assert _min_separation(b) >= guard - 1e-6
    gaps = [(a.b_max, b.b_min) for a, b in zip(windows[:-1], windows[1:]) if b.b_min - a.b_max > 0.1]
    assert gaps
    for lo, hi in gaps:
        assert _min_separation(0.5 * (lo + hi)) < guard
    # gap edges are refined to the 0.01 G bisection tolerance
    for lo, hi in gaps:
        assert _min_separation(lo - 0.02) >= guard > _min_separation(lo + 0.02)
        assert _min_separation(hi - 0.02) < guard <= _min_separation(hi + 0.02)
