"""Ground-state NV spin in a static field: ODMR lines and cross-relaxation windows.

Frequencies in this module are plain MHz (not angular) and fields are in gauss.
Energy levels are labelled by their zero-field ancestry ``+1, 0, -1`` and the
labels are carried continuously along the field axis by eigenvector overlap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .orientations import ALIGNED, ORIENTATIONS, TILTED, angle_to_field, check_orientation

TRACK_STEP_G = 1.0
BISECT_TOL_G = 0.01

LABELS = ("0->+1", "0->-1", "+1->-1")
P1_LABEL = "-1/2->+1/2"


@dataclass(frozen=True)
class ZeemanParameters:
    D: float = 2880.0  # MHz
    gyromagnetic: float = 2.8  # |gamma_e|, MHz/G

    def __post_init__(self):
        if not (self.D > 0 and self.gyromagnetic > 0):
            raise ValueError("D and gyromagnetic ratio must be positive")


@dataclass(frozen=True)
class NVConfiguration:
    orientation: str = ALIGNED
    phi: float = 0.0  # degrees
    position: float = 0.0  # um along the cantilever

    def __post_init__(self):
        check_orientation(self.orientation)

    @property
    def theta(self):
        return angle_to_field(self.orientation)


class Transitions(NamedTuple):
    zero_plus: float
    zero_minus: float
    plus_minus: float


@dataclass(frozen=True)
class Window:
    b_min: float
    b_max: float
    span_mhz: float

    def as_dict(self):
        return {"b_min": self.b_min, "b_max": self.b_max, "span_mhz": self.span_mhz}


def hamiltonian_matrix(b, theta, phi=0.0, p=ZeemanParameters()):
    """Single-NV Hamiltonian (MHz) in the {|+1>, |0>, |-1>} basis for polar/azimuthal angles in degrees."""
    if b < 0:
        raise ValueError("field magnitude must be non-negative")
    delta = p.gyromagnetic * b
    th = math.radians(theta)
    cos = 1.0 if theta == 0 else math.cos(th)
    sin = 0.0 if theta == 0 else math.sin(th)
    off = -delta * sin / math.sqrt(2)
    e = complex(math.cos(math.radians(phi)), math.sin(math.radians(phi)))
    return np.array(
        [
            [p.D + delta * cos, off * e.conjugate(), 0],
            [off * e, 0, off * e.conjugate()],
            [0, off * e, p.D - delta * cos],
        ],
        dtype=complex,
    )


def nv_hamiltonian(b, cfg=NVConfiguration(), p=ZeemanParameters()):
    return hamiltonian_matrix(b, cfg.theta, cfg.phi, p)


def _best_permutation(prev, vecs):
    overlap = np.abs(prev.conj().T @ vecs) ** 2
    return max(itertools.permutations(range(3)), key=lambda perm: sum(overlap[i, perm[i]] for i in range(3)))


def _track_from(start_vecs, b_values, theta, phi, p):
    """Follow labelled levels along ``b_values`` starting from eigenvectors ``start_vecs``."""
    mats = np.array([hamiltonian_matrix(b, theta, phi, p) for b in b_values])
    w, v = np.linalg.eigh(mats)
    energies = np.empty((len(b_values), 3))
    vectors = np.empty((len(b_values), 3, 3), dtype=complex)
    prev = start_vecs
    for k in range(len(b_values)):
        perm = _best_permutation(prev, v[k])
        energies[k] = w[k, list(perm)]
        vectors[k] = v[k][:, list(perm)]
        prev = vectors[k]
    return energies, vectors


def tracked_levels(b_values, theta, phi=0.0, p=ZeemanParameters()):
    """Energies (n, 3) ordered (+1, 0, -1) along an increasing field grid.

    Tracking starts from the zero-field basis; a ramp from 0 G is prepended
    internally when the grid does not start at zero.

    Returns:
        (energies, eigenvectors) on ``b_values``.
    """
    b_values = np.asarray(b_values, dtype=float)
    if np.any(np.diff(b_values) < 0):
        raise ValueError("field grid must be non-decreasing")
    n_ramp = int(math.ceil(b_values[0] / TRACK_STEP_G)) if len(b_values) else 0
    ramp = np.linspace(0.0, b_values[0], n_ramp, endpoint=False)[1:] if n_ramp > 1 else np.empty(0)
    path = np.concatenate([ramp, b_values])
    energies, vectors = _track_from(np.eye(3, dtype=complex), path, theta, phi, p)
    return energies[len(ramp):], vectors[len(ramp):]


def _transitions(levels):
    plus, zero, minus = levels[..., 0], levels[..., 1], levels[..., 2]
    return np.abs(plus - zero), np.abs(minus - zero), np.abs(plus - minus)


def transition_frequencies(b, cfg=NVConfiguration(), p=ZeemanParameters()):
    """|0>-|+1>, |0>-|-1> and |+1>-|-1> transition frequencies (MHz) at field ``b``."""
    if b < 0:
        raise ValueError("field magnitude must be non-negative")
    if b == 0:
        return Transitions(p.D, p.D, 0.0)
    levels, _ = tracked_levels([b], cfg.theta, cfg.phi, p)
    return Transitions(*(float(f[0]) for f in _transitions(levels)))


def p1_transition(b, p=ZeemanParameters()):
    """Spin-1/2 Zeeman line of substitutional nitrogen (MHz)."""
    if b < 0:
        raise ValueError("field magnitude must be non-negative")
    return p.gyromagnetic * b


def addressable_count(frequency_span, linewidth):
    if linewidth <= 0:
        raise ValueError("linewidth must be positive")
    return max(0, math.floor(abs(frequency_span) / linewidth + 1e-9))


def scan_rows(b_values, p=ZeemanParameters()):
    """Rows (b_gauss, orientation, transition_label, frequency_mhz) for every orientation plus P1."""
    b_values = np.asarray(b_values, dtype=float)
    rows = []
    per_orientation = {}
    for name in ORIENTATIONS:
        levels, _ = tracked_levels(b_values, angle_to_field(name), 0.0, p)
        per_orientation[name] = _transitions(levels)
    for k, b in enumerate(b_values):
        for name in ORIENTATIONS:
            for label, curve in zip(LABELS, per_orientation[name]):
                rows.append((float(b), name, label, float(curve[k])))
        rows.append((float(b), "P1", P1_LABEL, p1_transition(float(b), p)))
    return rows


class _CurveSet:
    """Labelled transition curves relevant to cross relaxation, evaluable between grid points.

    Curves: aligned |0>-|+-1> (the spin-forbidden aligned |+1>-|-1> line is
    left out), the three tilted transitions and the P1 line.
    """

    def __init__(self, grid, p):
        self.p = p
        self.grid = grid
        self.theta_tilted = angle_to_field(TILTED[0])
        self.levels_tilted, self.vecs_tilted = tracked_levels(grid, self.theta_tilted, 0.0, p)
        self.names = [
            (ALIGNED, "0->+1"),
            (ALIGNED, "0->-1"),
            ("tilted", "0->+1"),
            ("tilted", "0->-1"),
            ("tilted", "+1->-1"),
            ("P1", P1_LABEL),
        ]
        self.values = np.array([self._from_levels(b, lv) for b, lv in zip(grid, self.levels_tilted)])

    def _from_levels(self, b, tilted_levels):
        delta = self.p.gyromagnetic * b
        zp, zm, pm = _transitions(tilted_levels)
        return np.array([self.p.D + delta, abs(self.p.D - delta), zp, zm, pm, delta])

    def at(self, b):
        k = int(np.clip(np.searchsorted(self.grid, b, side="right") - 1, 0, len(self.grid) - 1))
        levels, _ = _track_from(self.vecs_tilted[k], [b], self.theta_tilted, 0.0, self.p)
        return self._from_levels(b, levels[0])

    def margin(self, b, guard):
        vals = self.at(b)
        gaps = np.abs(vals[:, None] - vals[None, :])[np.triu_indices(len(vals), 1)]
        return float(gaps.min() - guard)


def _bisect(fn, lo, hi, tol=BISECT_TOL_G):
    """Root of ``fn`` in [lo, hi] given a sign change, to within ``tol``."""
    f_lo = fn(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if (f_mid >= 0) == (f_lo >= 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cross_relaxation_windows(b_range, step, guard, p=ZeemanParameters(), monotonic=(0, 1)):
    """Field intervals free of cross relaxation.

    A window keeps every pair of transition curves at least ``guard`` MHz apart
    and keeps the addressed curves (indices into the curve set, by default the
    aligned |0>-|+-1> lines) monotonic. Crossings and turning points are refined
    by bisection to 0.01 G.

    Returns:
        list of :class:`Window`, empty if none exists.
    """
    b_lo, b_hi = map(float, b_range)
    if not (step > 0 and guard > 0):
        raise ValueError("step and guard must be positive")
    if b_lo < 0 or b_hi < b_lo:
        raise ValueError(f"invalid field range {b_range!r}")
    n = int(math.floor((b_hi - b_lo) / step + 1e-9)) + 1
    grid = b_lo + step * np.arange(n)
    if grid[-1] < b_hi - 1e-9:
        grid = np.append(grid, b_hi)
    curves = _CurveSet(grid, p)
    margin = lambda b: curves.margin(b, guard)

    margins = [margin(b) for b in grid]
    cuts = set()
    for k in range(len(grid) - 1):
        a, b = grid[k], grid[k + 1]
        if (margins[k] >= 0) != (margins[k + 1] >= 0):
            cuts.add(_bisect(margin, a, b))
        elif margins[k] >= 0:
            signs = np.sign(curves.values[k][:, None] - curves.values[k][None, :]) * np.sign(
                curves.values[k + 1][:, None] - curves.values[k + 1][None, :]
            )
            for i, j in zip(*np.nonzero(np.triu(signs < 0, 1))):
                cross = _bisect(lambda x: curves.at(x)[i] - curves.at(x)[j], a, b, tol=1e-6)
                cuts.add(_bisect(margin, a, cross))
                cuts.add(_bisect(margin, cross, b))

    turning = set()
    for idx in monotonic:
        d = np.diff(curves.values[:, idx])
        for k in np.nonzero(np.sign(d[1:]) * np.sign(d[:-1]) < 0)[0]:
            h = 1e-4
            slope = lambda x: curves.at(x + h)[idx] - curves.at(x - h)[idx]
            turning.add(_bisect(slope, grid[k], grid[k + 2]))

    points = sorted({b_lo, b_hi} | cuts | turning)
    windows = []
    for a, b in zip(points[:-1], points[1:]):
        if b - a <= 0 or margin(0.5 * (a + b)) < 0:
            continue
        if windows and abs(windows[-1][1] - a) < 1e-12 and a not in turning:
            windows[-1][1] = b
        else:
            windows.append([a, b])

    out = []
    for a, b in windows:
        span = abs(curves.at(b)[1] - curves.at(a)[1])
        out.append(Window(round(float(a), 6), round(float(b), 6), float(span)))
    return out
