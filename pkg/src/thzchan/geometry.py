"""Antenna-array geometry: element layout, angle conventions, rotations,
motion, wavelengths, and the Rayleigh-distance sub-array partition.

Conventions used throughout the package:

* 3D vectors are plain ``numpy`` arrays of shape (3,), in meters.
* Azimuth angles live in (-pi, pi], elevations in [-pi/2, pi/2]; a direction
  with azimuth ``a`` and elevation ``e`` is
  ``(cos e cos a, cos e sin a, sin e)``.
* The global frame has its x axis pointing from the first Tx element toward
  the first Rx element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s


def wrap_azimuth(angle):
    """Wrap an angle (scalar or array) to (-pi, pi]."""
    wrapped = np.mod(np.asarray(angle, dtype=np.float64) + np.pi, 2.0 * np.pi) - np.pi
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    return float(wrapped) if np.ndim(angle) == 0 else wrapped


def direction_from_angles(azimuth, elevation):
    """Unit direction vector(s) for azimuth/elevation in the global frame."""
    az = np.asarray(azimuth, dtype=np.float64)
    el = np.asarray(elevation, dtype=np.float64)
    return np.stack(
        [np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)], axis=-1
    )


def angles_of(vector):
    """(azimuth, elevation) of a non-zero vector, azimuth in (-pi, pi]."""
    v = np.asarray(vector, dtype=np.float64)
    norm = np.linalg.norm(v, axis=-1)
    if np.any(norm == 0.0):
        raise ValueError("cannot take angles of a zero-length vector")
    azimuth = wrap_azimuth(np.arctan2(v[..., 1], v[..., 0]))
    elevation = np.arcsin(np.clip(v[..., 2] / norm, -1.0, 1.0))
    if v.ndim == 1:
        return float(azimuth), float(elevation)
    return azimuth, elevation


def wavelength(frequency_hz: float) -> float:
    """Wavelength in meters; frequency must be positive."""
    if frequency_hz <= 0.0:
        raise ValueError(f"frequency must be positive, got {frequency_hz}")
    return SPEED_OF_LIGHT / frequency_hz


@dataclass(frozen=True)
class PanelOrientation:
    """Elevation/azimuth angles (radians) of the two panel axes.

    ``beta_v_*`` orient the column direction (vertical spacing axis),
    ``beta_h_*`` the row direction.
    """

    beta_v_e: float = 0.0
    beta_v_a: float = 0.0
    beta_h_e: float = 0.0
    beta_h_a: float = 0.0

    def __post_init__(self):
        for name in ("beta_v_e", "beta_h_e"):
            value = getattr(self, name)
            if not -math.pi / 2 <= value <= math.pi / 2:
                raise ValueError(f"{name} must lie in [-pi/2, pi/2], got {value}")
        object.__setattr__(self, "beta_v_a", wrap_azimuth(self.beta_v_a))
        object.__setattr__(self, "beta_h_a", wrap_azimuth(self.beta_h_a))

    def column_direction(self) -> np.ndarray:
        return direction_from_angles(self.beta_v_a, self.beta_v_e)

    def row_direction(self) -> np.ndarray:
        return direction_from_angles(self.beta_h_a, self.beta_h_e)


@dataclass(frozen=True)
class MotionState:
    """Constant-velocity motion: speed (m/s) plus direction angles."""

    speed: float = 0.0
    alpha_e: float = 0.0
    alpha_a: float = 0.0

    def __post_init__(self):
        if self.speed < 0.0:
            raise ValueError(f"speed must be non-negative, got {self.speed}")


def velocity_vector(motion: MotionState) -> np.ndarray:
    """Cartesian velocity ``v * (cos aE cos aA, cos aE sin aA, sin aE)``."""
    return motion.speed * direction_from_angles(motion.alpha_a, motion.alpha_e)


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar array of ``m_h`` rows by ``m_v`` columns.

    Element ``p`` (1-based) sits in row ``p_h`` and column ``p_v`` with
    ``p = (p_h - 1) * m_v + p_v``; element 1 is the reference at the local
    origin.  ``element_offsets`` overrides the grid for non-uniform arrays
    (one (x, y, z) row per element, first row zero).
    """

    m_v: int = 1
    m_h: int = 1
    delta_v: float = 0.0
    delta_h: float = 0.0
    orientation: PanelOrientation = field(default_factory=PanelOrientation)
    rotation: tuple[float, float, float] = (0.0, 0.0, 0.0)
    element_offsets: np.ndarray | None = None

    def __post_init__(self):
        if self.m_v < 1 or self.m_h < 1:
            raise ValueError("array dimensions must be positive integers")
        if self.m_v > 1 and self.delta_v <= 0.0:
            raise ValueError("delta_v must be positive for multi-column arrays")
        if self.m_h > 1 and self.delta_h <= 0.0:
            raise ValueError("delta_h must be positive for multi-row arrays")
        if self.element_offsets is not None:
            offsets = np.asarray(self.element_offsets, dtype=np.float64)
            if offsets.shape != (self.size, 3):
                raise ValueError(
                    f"element_offsets must have shape ({self.size}, 3), "
                    f"got {offsets.shape}"
                )
            if np.any(offsets[0] != 0.0):
                raise ValueError("element 1 must sit at the local origin")
            object.__setattr__(self, "element_offsets", offsets)

    @property
    def size(self) -> int:
        return self.m_v * self.m_h

    def row_col(self, p: int) -> tuple[int, int]:
        """1-based (row, column) of element ``p``."""
        if not 1 <= p <= self.size:
            raise IndexError(f"element index {p} outside 1..{self.size}")
        return (p - 1) // self.m_v + 1, (p - 1) % self.m_v + 1


def element_position(array: ArrayGeometry, p: int) -> np.ndarray:
    """Offset of element ``p`` from the reference element.

    Row/column indices count from the reference, so element 1 maps to the
    zero vector.
    """
    p_h, p_v = array.row_col(p)
    if array.element_offsets is not None:
        return array.element_offsets[p - 1].copy()
    row_vec = array.delta_h * array.orientation.row_direction()
    col_vec = array.delta_v * array.orientation.column_direction()
    return (p_h - 1) * row_vec + (p_v - 1) * col_vec


def element_positions(array: ArrayGeometry) -> np.ndarray:
    """All element offsets as an (M, 3) array, element order 1..M."""
    if array.element_offsets is not None:
        return array.element_offsets.copy()
    rows = (np.arange(array.size) // array.m_v).astype(np.float64)
    cols = (np.arange(array.size) % array.m_v).astype(np.float64)
    row_vec = array.delta_h * array.orientation.row_direction()
    col_vec = array.delta_v * array.orientation.column_direction()
    return rows[:, None] * row_vec + cols[:, None] * col_vec


def _rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _frame_rotation(rotation) -> np.ndarray:
    gamma_x, gamma_y, gamma_z = rotation
    return _rot_z(gamma_x) @ _rot_y(gamma_y) @ _rot_x(gamma_z)


def _polar_vector(azimuth: float, elevation: float) -> np.ndarray:
    # Internal spherical convention of the frame transform: azimuth plays the
    # polar role, elevation the longitude role.
    return np.array(
        [
            math.sin(azimuth) * math.cos(elevation),
            math.sin(azimuth) * math.sin(elevation),
            math.cos(azimuth),
        ]
    )


def gcs_to_lcs(angles, rotation):
    """Map global-frame (azimuth, elevation) to the rotated local frame.

    ``rotation`` is the (gamma_x, gamma_y, gamma_z) triple of axis rotations
    that orient the local frame.  The returned local azimuth comes from an
    arccos and lies in [0, pi]; the local elevation from an arg and lies in
    (-pi, pi].  Identity rotation reproduces the inputs up to those principal
    ranges, and the induced map on direction vectors is an exact rotation.
    """
    azimuth, elevation = angles
    u = _frame_rotation(rotation).T @ _polar_vector(azimuth, elevation)
    local_az = math.acos(min(1.0, max(-1.0, u[2])))
    local_el = math.atan2(u[1], u[0])
    return local_az, wrap_azimuth(local_el)


def lcs_to_gcs(angles, rotation):
    """Inverse of :func:`gcs_to_lcs` for the same rotation triple."""
    azimuth, elevation = angles
    u = _frame_rotation(rotation) @ _polar_vector(azimuth, elevation)
    global_az = math.acos(min(1.0, max(-1.0, u[2])))
    global_el = math.atan2(u[1], u[0])
    return global_az, wrap_azimuth(global_el)


def gcs_to_lcs_batch(azimuth, elevation, rotation):
    """Vectorized :func:`gcs_to_lcs` over angle arrays."""
    az = np.asarray(azimuth, dtype=np.float64)
    el = np.asarray(elevation, dtype=np.float64)
    u = np.stack(
        [np.sin(az) * np.cos(el), np.sin(az) * np.sin(el), np.cos(az)], axis=-1
    )
    rotated = u @ _frame_rotation(rotation)
    local_az = np.arccos(np.clip(rotated[..., 2], -1.0, 1.0))
    local_el = wrap_azimuth(np.arctan2(rotated[..., 1], rotated[..., 0]))
    return local_az, local_el


@dataclass(frozen=True)
class SubArrayBlock:
    """Rectangular element block: 1-based inclusive row/column ranges."""

    row_start: int
    row_stop: int
    col_start: int
    col_stop: int

    def elements(self, array: ArrayGeometry) -> list[int]:
        return [
            (r - 1) * array.m_v + c
            for r in range(self.row_start, self.row_stop + 1)
            for c in range(self.col_start, self.col_stop + 1)
        ]

    def reference_element(self, array: ArrayGeometry) -> int:
        return (self.row_start - 1) * array.m_v + self.col_start

    def aperture(self, array: ArrayGeometry) -> float:
        """Largest side extent (meters) of the block."""
        return max(
            (self.row_stop - self.row_start) * array.delta_h,
            (self.col_stop - self.col_start) * array.delta_v,
        )


def rayleigh_distance(aperture: float, frequency_hz: float) -> float:
    """Far-field onset ``2 D^2 / lambda`` for an aperture ``D``."""
    return 2.0 * aperture * aperture / wavelength(frequency_hz)


def _axis_split(count: int, spacing: float, max_extent: float) -> list[tuple[int, int]]:
    if count == 1 or spacing <= 0.0:
        return [(1, count)]
    per_block = int(math.floor(max_extent / spacing)) + 1
    per_block = max(1, min(per_block, count))
    n_blocks = math.ceil(count / per_block)
    bounds = np.linspace(0, count, n_blocks + 1).astype(int)
    return [(int(lo) + 1, int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:])]


def subarray_partition(
    array: ArrayGeometry, frequency_hz: float, min_path_distance: float
) -> list[SubArrayBlock]:
    """Tile the array into blocks whose Rayleigh distance stays below
    ``min_path_distance``.

    Within a block the wavefront is treated as planar, so evolution updates
    may share the block's reference element.  Arrays with explicit per-element
    offsets fall back to single-element blocks, which satisfy any bound.
    """
    if min_path_distance <= 0.0:
        raise ValueError("min_path_distance must be positive")
    if array.element_offsets is not None:
        return [
            SubArrayBlock(r, r, c, c)
            for r in range(1, array.m_h + 1)
            for c in range(1, array.m_v + 1)
        ]
    if math.isinf(min_path_distance):
        return [SubArrayBlock(1, array.m_h, 1, array.m_v)]
    max_extent = math.sqrt(wavelength(frequency_hz) * min_path_distance / 2.0)
    return [
        SubArrayBlock(r_lo, r_hi, c_lo, c_hi)
        for r_lo, r_hi in _axis_split(array.m_h, array.delta_h, max_extent)
        for c_lo, c_hi in _axis_split(array.m_v, array.delta_v, max_extent)
    ]
