"""NV axis orientations in a diamond cantilever whose long axis is [-1-1-1].

Orientation names are Miller indices with explicit minus signs, e.g. ``"-111"``.
"""

import numpy as np

ORIENTATIONS = {
    "-1-1-1": np.array([-1.0, -1.0, -1.0]),
    "-111": np.array([-1.0, 1.0, 1.0]),
    "1-11": np.array([1.0, -1.0, 1.0]),
    "11-1": np.array([1.0, 1.0, -1.0]),
}
ALIGNED = "-1-1-1"
TILTED = ("-111", "1-11", "11-1")

# field and cantilever long axis
FIELD_AXIS = ORIENTATIONS[ALIGNED] / np.sqrt(3)

# Carbon bond whose projection perpendicular to the NV axis defines x'.
# The [-111] entry fixes the convention for its strain matrix; the other
# tilted entries are its images under the C3 rotation about [-1-1-1].
X_BOND = {
    "-1-1-1": np.array([-1.0, 1.0, 1.0]),
    "-111": np.array([1.0, -1.0, 1.0]),
    "11-1": np.array([-1.0, 1.0, 1.0]),
    "1-11": np.array([1.0, 1.0, -1.0]),
}


def check_orientation(name):
    if name not in ORIENTATIONS:
        raise ValueError(f"unknown NV orientation {name!r}; expected one of {sorted(ORIENTATIONS)}")
    return name


def angle_to_field(name):
    """Polar angle in degrees between the NV axis and the field: 0 or arccos(-1/3)."""
    axis = ORIENTATIONS[check_orientation(name)]
    cos = float(axis @ FIELD_AXIS / np.linalg.norm(axis))
    if abs(cos - 1.0) < 1e-12:
        return 0.0
    return float(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))


def nv_frame(name):
    """Rows are the NV x', y', z' axes expressed in crystal coordinates (right-handed)."""
    z = ORIENTATIONS[check_orientation(name)]
    z = z / np.linalg.norm(z)
    bond = X_BOND[name] / np.linalg.norm(X_BOND[name])
    x = bond - (bond @ z) * z
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    return np.array([x, y, z])
