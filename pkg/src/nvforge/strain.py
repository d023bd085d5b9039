"""Strain encoding of NV position in the optical Ex/Ey transitions.

A cantilever clamped at z=0 and loaded at its free end is modelled with
Euler-Bernoulli beam theory. The resulting strain is rotated into each NV frame
and converted into orbital shifts of the excited-state doublet.

Units: lengths in um, forces in N, Young's modulus in GPa, coupling constants
in PHz, optical shifts and detunings in GHz, linewidths in MHz.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .orientations import ALIGNED, ORIENTATIONS, check_orientation, nv_frame

PHZ_TO_GHZ = 1e6


@dataclass(frozen=True)
class StrainTensor:
    components: np.ndarray
    frame: str = "cantilever"

    def __post_init__(self):
        c = np.array(self.components, dtype=float)
        if c.shape != (3, 3):
            raise ValueError("strain tensor must be 3x3")
        if np.max(np.abs(c - c.T)) > 1e-15 * max(1.0, np.max(np.abs(c))):
            raise ValueError("strain tensor must be symmetric")
        c.setflags(write=False)
        object.__setattr__(self, "components", c)

    @classmethod
    def uniaxial(cls, strain, poisson=0.11):
        """Axial strain along the cantilever z axis with Poisson contraction in x and y."""
        return cls(np.diag([-poisson * strain, -poisson * strain, strain]))


@dataclass(frozen=True)
class StrainCouplings:
    lambda_A1: float = -1.95  # PHz
    lambda_A1p: float = 2.16
    lambda_E: float = -0.85
    lambda_Ep: float = 0.02
    df_E1: float = 6.3  # GHz, intrinsic
    df_E2: float = 0.15
    f_zpl: float = 470.6  # THz

    def __post_init__(self):
        if not all(math.isfinite(v) for v in asdict(self).values()):
            raise ValueError("strain couplings must be finite")


@dataclass(frozen=True)
class CantileverGeometry:
    length: float = 5.0  # um
    width: float = 0.5
    height: float = 0.25
    force: float = 5e-4  # N
    youngs_modulus: float = 1100.0  # GPa
    poisson: float = 0.11

    def __post_init__(self):
        if min(self.length, self.width, self.height, self.youngs_modulus, self.poisson) <= 0:
            raise ValueError("cantilever parameters must be positive")

    @property
    def second_moment(self):
        """Area moment of inertia w h^3 / 12 in m^4."""
        return (self.width * 1e-6) * (self.height * 1e-6) ** 3 / 12

    def peak_strain(self):
        return axial_strain(self, 0.0, self.height / 2)

    def with_peak_strain(self, target):
        """Copy of the geometry with the end load that gives ``target`` strain at the clamp surface."""
        unit = axial_strain(CantileverGeometry(**{**asdict(self), "force": 1.0}), 0.0, self.height / 2)
        return CantileverGeometry(**{**asdict(self), "force": target / unit})


def axial_strain(geom, z, x):
    """Bending strain F (L - z) x / (E I) at distance ``z`` from the clamp, ``x`` from the neutral axis."""
    if not (0 <= z <= geom.length) or abs(x) > geom.height / 2:
        raise ValueError(f"point (z={z}, x={x}) lies outside the beam")
    moment = geom.force * (geom.length - z) * 1e-6
    return moment * (x * 1e-6) / (geom.youngs_modulus * 1e9 * geom.second_moment)


def cantilever_strain(geom, z, x):
    return StrainTensor.uniaxial(axial_strain(geom, z, x), geom.poisson)


def strain_profile(geom, n_z=51, n_x=11):
    """Axial strain sampled on a (z, x) grid; returns (z_um, x_um, strain[n_z, n_x])."""
    zs = np.linspace(0.0, geom.length, n_z)
    xs = np.linspace(-geom.height / 2, geom.height / 2, n_x)
    return zs, xs, np.array([[axial_strain(geom, z, x) for x in xs] for z in zs])


def rotation_to_nv(orientation):
    """Rotation R with e_nv = R e_cantilever R^T; rows are NV axes in cantilever coordinates."""
    if check_orientation(orientation) == ALIGNED:
        return np.eye(3)
    return nv_frame(orientation) @ nv_frame(ALIGNED).T


def transform_to_nv_frame(e, orientation):
    if e.frame != "cantilever":
        raise ValueError(f"expected a cantilever-frame tensor, got frame {e.frame!r}")
    r = rotation_to_nv(orientation)
    out = r @ e.components @ r.T
    return StrainTensor(0.5 * (out + out.T), frame=f"nv({orientation})")


def coupling_shifts(e, c=StrainCouplings()):
    """(g_A1, g_E1, g_E2) in GHz for an NV-frame strain tensor."""
    s = e.components
    g_a1 = c.lambda_A1 * s[2, 2] + c.lambda_A1p * (s[0, 0] + s[1, 1])
    g_e1 = c.lambda_E * (s[1, 1] - s[0, 0]) + c.lambda_Ep * (s[0, 2] + s[2, 0])
    g_e2 = c.lambda_E * (s[0, 1] + s[1, 0]) + c.lambda_Ep * (s[1, 2] + s[2, 1])
    return g_a1 * PHZ_TO_GHZ, g_e1 * PHZ_TO_GHZ, g_e2 * PHZ_TO_GHZ


def optical_transitions(g, c=StrainCouplings()):
    """Ex and Ey detunings from the zero-phonon line, in GHz."""
    g_a1, g_e1, g_e2 = g
    split = math.hypot(g_e1 + c.df_E1, g_e2 + c.df_E2)
    return g_a1 + split, g_a1 - split


def absolute_frequency_thz(detuning_ghz, c=StrainCouplings()):
    return c.f_zpl + detuning_ghz * 1e-3


def detunings(strain, orientation, c=StrainCouplings(), poisson=0.11):
    """Ex/Ey detunings of an NV under uniaxial cantilever strain ``strain``."""
    e = transform_to_nv_frame(StrainTensor.uniaxial(strain, poisson), orientation)
    return optical_transitions(coupling_shifts(e, c), c)


def strain_addressable_count(strain_max, linewidth=13.0, c=StrainCouplings(), orientation=ALIGNED, poisson=0.11):
    """Number of linewidth-wide optical slots spanned by the Ex shift up to ``strain_max``."""
    if strain_max < 0 or linewidth <= 0:
        raise ValueError("strain_max must be non-negative and linewidth positive")
    shift_mhz = abs(detunings(strain_max, orientation, c, poisson)[0] - detunings(0.0, orientation, c, poisson)[0]) * 1e3
    return math.floor(shift_mhz / linewidth + 1e-9)


def scan_rows(strains, c=StrainCouplings(), poisson=0.11, orientations=tuple(ORIENTATIONS)):
    """Rows (strain, orientation, branch, detuning_ghz) over a strain grid."""
    rows = []
    for s in strains:
        for name in orientations:
            ex, ey = detunings(float(s), name, c, poisson)
            rows.append((float(s), name, "Ex", ex))
            rows.append((float(s), name, "Ey", ey))
    return rows
