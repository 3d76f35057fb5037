"""Assembly of LOS and NLOS channel coefficients into per-sub-band tap lists,
plus the sub-banded received-signal synthesis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, GeometryError
from .geometry import SPEED_OF_LIGHT, angles_of, gcs_to_lcs, wavelength

LOS_CLUSTER_ID = 0xFFFFFFFF  # sentinel cluster id of the direct path

Pattern = Callable[[float, float], tuple[float, float]]


@dataclass(frozen=True)
class BandPlan:
    """Partition of the band [f_start, f_stop] into ``n_sub`` sub-bands."""

    f_start: float
    f_stop: float
    n_sub: int
    f_c: float | None = None

    def __post_init__(self):
        if self.f_stop <= self.f_start:
            raise ConfigError("f_stop must exceed f_start")
        if self.n_sub < 1:
            raise ConfigError("n_sub must be at least 1")
        if self.f_c is None:
            object.__setattr__(self, "f_c", 0.5 * (self.f_start + self.f_stop))
        if not self.f_start <= self.f_c <= self.f_stop:
            raise ConfigError("f_c must lie within [f_start, f_stop]")

    @property
    def b_sub(self) -> float:
        return (self.f_stop - self.f_start) / self.n_sub

    @property
    def centers(self) -> np.ndarray:
        return self.f_start + (np.arange(self.n_sub) + 0.5) * self.b_sub

    def edges(self, i: int) -> tuple[float, float]:
        return self.f_start + i * self.b_sub, self.f_start + (i + 1) * self.b_sub

    def subband_of(self, frequencies) -> np.ndarray:
        """Index of the sub-band owning each frequency; the filters tile the
        band with no overlap and no gap (upper edge belongs to the last)."""
        f = np.asarray(frequencies, dtype=np.float64)
        if np.any(f < self.f_start) or np.any(f > self.f_stop):
            raise ConfigError("frequency outside the band plan")
        idx = np.floor((f - self.f_start) / self.b_sub).astype(np.int64)
        return np.clip(idx, 0, self.n_sub - 1)


def dipole_pattern(el_lcs: float, az_lcs: float) -> tuple[float, float]:
    """Half-wave dipole field pattern split over V/H polarizations.

    Takes local-frame angles; the pattern null along the dipole axis
    (``sin(az_lcs) == 0``) returns zero gain instead of diverging.
    """
    s = math.sin(az_lcs)
    if s == 0.0:
        return 0.0, 0.0
    g = math.sqrt(1.64) * math.cos(0.5 * math.pi * math.cos(az_lcs)) / s
    return g * math.sin(el_lcs), g * math.cos(el_lcs)


def isotropic_pattern(el_lcs: float, az_lcs: float) -> tuple[float, float]:
    """Unit-gain vertical-only pattern; F_V^2 + F_H^2 = 1 everywhere."""
    return 1.0, 0.0


PATTERNS: dict[str, Pattern] = {
    "dipole": dipole_pattern,
    "isotropic": isotropic_pattern,
}


def dipole_pattern_batch(el_lcs: np.ndarray, az_lcs: np.ndarray):
    """Vectorized :func:`dipole_pattern` over angle arrays."""
    s = np.sin(az_lcs)
    g = np.zeros_like(s)
    nonzero = s != 0.0
    g[nonzero] = (
        math.sqrt(1.64)
        * np.cos(0.5 * math.pi * np.cos(az_lcs[nonzero]))
        / s[nonzero]
    )
    return g * np.sin(el_lcs), g * np.cos(el_lcs)


def isotropic_pattern_batch(el_lcs: np.ndarray, az_lcs: np.ndarray):
    ones = np.ones_like(np.asarray(el_lcs, dtype=np.float64))
    return ones, np.zeros_like(ones)


PATTERNS_BATCH = {
    "dipole": dipole_pattern_batch,
    "isotropic": isotropic_pattern_batch,
}


def antenna_pattern(
    pattern: Pattern, rotation, az_gcs: float, el_gcs: float
) -> np.ndarray:
    """Pattern response for a global-frame direction, as a length-2 vector."""
    az_lcs, el_lcs = gcs_to_lcs((az_gcs, el_gcs), rotation)
    return np.asarray(pattern(el_lcs, az_lcs), dtype=np.float64)


@dataclass
class Tap:
    """One delay tap: 2x2 polarization amplitude plus its delay and Doppler."""

    matrix: np.ndarray
    delay: float
    doppler: float
    cluster_id: int
    ray_id: int

    @property
    def amplitude(self) -> complex:
        """Scalar gain: the pattern-sandwiched matrix summed over entries."""
        return complex(self.matrix.sum())

    def scaled(self, factor: float) -> "Tap":
        return Tap(self.matrix * factor, self.delay, self.doppler,
                   self.cluster_id, self.ray_id)


def los_tap(
    d_vector: np.ndarray,
    v_tx: np.ndarray,
    v_rx: np.ndarray,
    theta_los: float,
    f_i: float,
    t: float,
    pattern_tx: Pattern,
    pattern_rx: Pattern,
    rotation_tx=(0.0, 0.0, 0.0),
    rotation_rx=(0.0, 0.0, 0.0),
) -> Tap:
    """Direct-path tap for one element pair at one sub-band and snapshot.

    ``d_vector`` points from the Tx element to the Rx element at time ``t``
    (motion already applied); the polarization matrix flips the sign of the
    horizontal co-polar term, and the Doppler projects the velocity
    difference on the path direction.
    """
    distance = float(np.linalg.norm(d_vector))
    if distance == 0.0:
        raise GeometryError("coincident Tx/Rx elements")
    az_dep, el_dep = angles_of(d_vector)
    az_arr, el_arr = angles_of(-d_vector)
    f_t = antenna_pattern(pattern_tx, rotation_tx, az_dep, el_dep)
    f_r = antenna_pattern(pattern_rx, rotation_rx, az_arr, el_arr)
    phase = np.exp(1j * theta_los)
    pol = np.array([[phase, 0.0], [0.0, -phase]])
    doppler = float(d_vector @ (v_rx - v_tx)) / (distance * wavelength(f_i))
    matrix = np.outer(f_r, f_t) * pol * np.exp(2j * math.pi * doppler * t)
    return Tap(matrix, distance / SPEED_OF_LIGHT, doppler, LOS_CLUSTER_ID, 0)


def nlos_tap(
    tx_vector: np.ndarray,
    rx_vector: np.ndarray,
    sqrt_power: float,
    phases,
    xpr: float,
    doppler_tx: float,
    doppler_rx: float,
    t: float,
    pattern_tx: Pattern,
    pattern_rx: Pattern,
    rotation_tx=(0.0, 0.0, 0.0),
    rotation_rx=(0.0, 0.0, 0.0),
    cluster_id: int = 0,
    ray_id: int = 0,
) -> Tap:
    """Scattered-ray tap for one element pair at one sub-band and snapshot.

    ``tx_vector``/``rx_vector`` are the ray's mirror vectors at this element
    pair (equal norms); ``phases`` the (vv, vh, hv, hh) polarization phases.
    """
    distance = float(np.linalg.norm(tx_vector))
    if distance == 0.0 or not math.isclose(
        distance, float(np.linalg.norm(rx_vector)), rel_tol=1e-6
    ):
        raise GeometryError("inconsistent mirror vectors for a ray")
    az_dep, el_dep = angles_of(tx_vector)
    az_arr, el_arr = angles_of(rx_vector)
    f_t = antenna_pattern(pattern_tx, rotation_tx, az_dep, el_dep)
    f_r = antenna_pattern(pattern_rx, rotation_rx, az_arr, el_arr)
    th_vv, th_vh, th_hv, th_hh = phases
    cross = math.sqrt(1.0 / xpr) if math.isfinite(xpr) else 0.0
    pol = np.array(
        [
            [np.exp(1j * th_vv), cross * np.exp(1j * th_vh)],
            [cross * np.exp(1j * th_hv), np.exp(1j * th_hh)],
        ]
    )
    phase = np.exp(2j * math.pi * (doppler_tx + doppler_rx) * t)
    matrix = np.outer(f_r, f_t) * pol * (sqrt_power * phase)
    return Tap(matrix, distance / SPEED_OF_LIGHT, doppler_tx + doppler_rx,
               cluster_id, ray_id)


def assemble_cir(los: Tap | None, nlos_taps: list[Tap], k_factor: float) -> list[Tap]:
    """Ricean combination: LOS weighted by sqrt(K/(K+1)), the scattered taps
    by sqrt(1/(K+1)); an infinite K keeps only the direct path."""
    if k_factor < 0.0:
        raise ConfigError("k_factor must be non-negative")
    taps: list[Tap] = []
    if math.isinf(k_factor):
        return [los.scaled(1.0)] if los is not None else []
    w_los = math.sqrt(k_factor / (k_factor + 1.0))
    w_nlos = math.sqrt(1.0 / (k_factor + 1.0))
    if los is not None and w_los > 0.0:
        taps.append(los.scaled(w_los))
    taps.extend(tap.scaled(w_nlos) for tap in nlos_taps)
    return taps


class LazyChannelMatrix:
    """Complete channel matrix of one sub-band and snapshot.

    Entries are computed on demand: indexing with ``(q, p)`` (1-based Rx/Tx
    element indices) returns the tap list already scaled by the large-scale
    amplitude factor.  ``shape`` is (Rx elements, Tx elements).
    """

    def __init__(self, m_rx: int, m_tx: int, tap_fn, amplitude_scale: float = 1.0):
        self.shape = (m_rx, m_tx)
        self._tap_fn = tap_fn
        self.amplitude_scale = amplitude_scale

    def __getitem__(self, key) -> list[Tap]:
        q, p = key
        if not (1 <= q <= self.shape[0] and 1 <= p <= self.shape[1]):
            raise IndexError(f"element pair {key} outside {self.shape}")
        return [tap.scaled(self.amplitude_scale) for tap in self._tap_fn(q, p)]


@dataclass
class ReceivedSignal:
    """Time-domain synthesis result: complex envelope relative to ``f_ref``.

    ``samples[n]`` equals ``(1/N) sum_k Y_k exp(2j pi k n / N)`` where ``Y``
    is the frequency-domain product on the synthesis grid; the analytic
    passband signal is ``samples * exp(2j pi f_ref n / rate)``.
    """

    samples: np.ndarray
    sample_rate: float
    f_ref: float

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.shape[-1]) / self.sample_rate


def received_signal(
    spectrum_freqs,
    spectrum_values,
    band: BandPlan,
    transfer,
    beamforming: np.ndarray | None = None,
    noise_power: float = 0.0,
    rng: np.random.Generator | None = None,
    n_grid: int | None = None,
) -> ReceivedSignal:
    """Sub-banded synthesis of the received signal.

    The input spectrum is interpolated onto a uniform grid over the band,
    each grid point is owned by exactly one ideal band-pass filter, the
    sub-band transfer values are applied together with the beamforming
    weights, the sub-band contributions are summed, and complex white
    Gaussian noise of the given power is added to the time samples.

    ``transfer(i, f) -> (m_rx, m_tx, len(f))`` supplies the channel of
    sub-band ``i`` on the grid slice ``f``.
    """
    freqs = np.asarray(spectrum_freqs, dtype=np.float64)
    values = np.asarray(spectrum_values, dtype=np.complex128)
    if freqs.size < 2 or freqs[0] > band.f_start or freqs[-1] < band.f_stop:
        raise ConfigError("signal spectrum grid must cover the band")
    if n_grid is None:
        n_grid = 2 * band.n_sub
    grid = band.f_start + np.arange(n_grid) * (band.f_stop - band.f_start) / n_grid
    s_grid = np.interp(grid, freqs, values.real) + 1j * np.interp(
        grid, freqs, values.imag
    )
    owner = band.subband_of(grid)
    probe = np.asarray(transfer(0, grid[:1]), dtype=np.complex128)
    m_rx, m_tx = probe.shape[0], probe.shape[1]
    if beamforming is None:
        beamforming = np.ones(m_tx, dtype=np.complex128)
    w = np.asarray(beamforming, dtype=np.complex128)
    if w.shape != (m_tx,):
        raise ConfigError(f"beamforming weights must have shape ({m_tx},)")
    y = np.zeros((m_rx, n_grid), dtype=np.complex128)
    for i in range(band.n_sub):
        mask = owner == i
        if not np.any(mask):
            continue
        h = np.asarray(transfer(i, grid[mask]), dtype=np.complex128)
        y[:, mask] = np.einsum("qpf,p,f->qf", h, w, s_grid[mask])
    samples = np.fft.ifft(y, axis=-1)
    rate = band.f_stop - band.f_start
    if noise_power > 0.0:
        if rng is None:
            raise ConfigError("noise_power > 0 requires an rng")
        scale = math.sqrt(noise_power / 2.0)
        samples = samples + scale * (
            rng.standard_normal(samples.shape)
            + 1j * rng.standard_normal(samples.shape)
        )
    return ReceivedSignal(samples=samples, sample_rate=rate, f_ref=band.f_start)
