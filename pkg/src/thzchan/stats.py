"""Statistical properties estimated from realizations: transfer functions,
space-time-frequency correlations, delay/Doppler/angular power profiles,
spreads, and stationary regions, plus the conditional closed-form time
autocorrelation used as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EstimatorError
from .kernels import psd_correlation_scan


def transfer_function(taps, frequencies) -> np.ndarray:
    """Channel transfer values ``sum_m a_m exp(-2j pi f tau_m)`` over ``f``."""
    f = np.atleast_1d(np.asarray(frequencies, dtype=np.float64))
    if not taps:
        return np.zeros(f.shape, dtype=np.complex128)
    amps = np.array([tap.amplitude for tap in taps])
    delays = np.array([tap.delay for tap in taps])
    return (amps[None, :] * np.exp(-2j * math.pi * f[:, None] * delays[None, :])).sum(
        axis=1
    )


def stfcf(
    realizations,
    q: int,
    p: int,
    delta_q: int = 0,
    delta_p: int = 0,
    t: float = 0.0,
    delta_t: float = 0.0,
    f: float | None = None,
    delta_f: float = 0.0,
) -> complex:
    """Ensemble space-time-frequency correlation of the transfer function.

    Averages ``H_{q,p}(f, t) H*_{q',p'}(f + df, t + dt)`` over the given
    realizations and normalizes by the geometric mean of the two marginal
    powers.  Realizations must expose ``taps_at(q, p, f, t)``.
    """
    if len(realizations) < 2:
        raise EstimatorError("need an ensemble of at least two realizations")
    if f is None:
        f = realizations[0].band.f_c
    h1 = np.empty(len(realizations), dtype=np.complex128)
    h2 = np.empty(len(realizations), dtype=np.complex128)
    for k, realization in enumerate(realizations):
        h1[k] = transfer_function(realization.taps_at(q, p, f, t), f)[0]
        h2[k] = transfer_function(
            realization.taps_at(q + delta_q, p + delta_p, f + delta_f, t + delta_t),
            f + delta_f,
        )[0]
    cross = np.mean(h1 * np.conj(h2))
    norm = math.sqrt(float(np.mean(np.abs(h1) ** 2) * np.mean(np.abs(h2) ** 2)))
    if norm == 0.0:
        raise EstimatorError("zero marginal power in correlation estimate")
    return complex(cross / norm)


def acf(realizations, q: int, p: int, t: float, delta_t: float, f: float | None = None):
    """Temporal autocorrelation: the space/frequency lags set to zero."""
    return stfcf(realizations, q, p, t=t, delta_t=delta_t, f=f)


def sccf(realizations, q: int, p: int, delta_q: int, delta_p: int,
         t: float = 0.0, f: float | None = None):
    """Space cross-correlation: time/frequency lags set to zero."""
    return stfcf(realizations, q, p, delta_q=delta_q, delta_p=delta_p, t=t, f=f)


def fcf(realizations, q: int, p: int, delta_f: float, t: float = 0.0,
        f: float | None = None):
    """Frequency correlation: space/time lags set to zero."""
    return stfcf(realizations, q, p, t=t, f=f, delta_f=delta_f)


def ensemble_acf(realizations, q: int, p: int, times, f: float) -> np.ndarray:
    """Temporal ACF curve over a snapshot grid, one transfer evaluation per
    (realization, snapshot).

    Same estimator as :func:`acf` anchored at ``times[0]``, batched so the
    taps of each snapshot are assembled once per realization.
    """
    if len(realizations) < 2:
        raise EstimatorError("need an ensemble of at least two realizations")
    h = np.empty((len(realizations), len(times)), dtype=np.complex128)
    for r, realization in enumerate(realizations):
        for k, t in enumerate(times):
            h[r, k] = transfer_function(realization.taps_at(q, p, f, t), f)[0]
    powers = np.mean(np.abs(h) ** 2, axis=0)
    cross = np.mean(h[:, :1] * np.conj(h), axis=0)
    norm = np.sqrt(powers[0] * powers)
    if np.any(norm == 0.0):
        raise EstimatorError("zero marginal power in correlation estimate")
    return cross / norm


def conditional_acf_closed_form(
    f: float,
    t: float,
    k_factor: float,
    p_survive: float,
    ray_powers_t,
    ray_delays_t,
    ray_dopplers_t,
    ray_powers_dt,
    ray_delays_dt,
    ray_dopplers_dt,
    t_dt: float,
    los_t: tuple[float, float] | None = None,
    los_dt: tuple[float, float] | None = None,
) -> complex:
    """Temporal autocorrelation conditional on a fixed cluster set.

    Evaluates the LOS/NLOS superposition for unit-gain patterns: each ray
    contributes the geometric mean of its powers at the two instants, the
    deterministic Doppler phase rotation, and the delay phase at the carrier
    ``f``; the sum is scaled by the survival probability and normalized by
    the marginal powers.  ``los_*`` are (delay, doppler) pairs.
    """
    p1 = np.asarray(ray_powers_t, dtype=np.float64)
    p2 = np.asarray(ray_powers_dt, dtype=np.float64)
    phase = 2.0 * math.pi * (
        np.asarray(ray_dopplers_t) * t - np.asarray(ray_dopplers_dt) * t_dt
    )
    phase = phase - 2.0 * math.pi * f * (
        np.asarray(ray_delays_t) - np.asarray(ray_delays_dt)
    )
    w_nlos = 1.0 / (k_factor + 1.0)
    cross = p_survive * w_nlos * np.sum(np.sqrt(p1 * p2) * np.exp(1j * phase))
    power1 = w_nlos * p1.sum()
    power2 = w_nlos * p2.sum()
    if los_t is not None and k_factor > 0.0:
        tau1, nu1 = los_t
        tau2, nu2 = los_dt
        w_los = k_factor / (k_factor + 1.0)
        los_phase = 2.0 * math.pi * (nu1 * t - nu2 * t_dt) - 2.0 * math.pi * f * (
            tau1 - tau2
        )
        cross += w_los * np.exp(1j * los_phase)
        power1 += w_los
        power2 += w_los
    norm = math.sqrt(power1 * power2)
    if norm == 0.0:
        raise EstimatorError("zero marginal power in closed-form correlation")
    return complex(cross / norm)


@dataclass
class DelayPsd:
    """Discrete delay power profile: tap powers at their delays."""

    delays: np.ndarray
    powers: np.ndarray

    def __post_init__(self):
        self.delays = np.asarray(self.delays, dtype=np.float64)
        self.powers = np.asarray(self.powers, dtype=np.float64)
        if self.delays.shape != self.powers.shape:
            raise ValueError("delays and powers must have matching shapes")
        if np.any(self.powers < 0.0):
            raise ValueError("delay PSD powers must be non-negative")

    @property
    def total_power(self) -> float:
        return float(self.powers.sum())

    def binned(self, bin_width: float) -> dict[int, float]:
        out: dict[int, float] = {}
        for delay, power in zip(self.delays, self.powers):
            key = int(math.floor(delay / bin_width))
            out[key] = out.get(key, 0.0) + power
        return out


def delay_psd(taps) -> DelayPsd:
    """Per-tap squared magnitudes at their delays."""
    delays = np.array([tap.delay for tap in taps], dtype=np.float64)
    powers = np.array([abs(tap.amplitude) ** 2 for tap in taps], dtype=np.float64)
    return DelayPsd(delays, powers)


def rms_delay_spread(psd: DelayPsd) -> float:
    """Power-weighted standard deviation of the delays."""
    total = psd.total_power
    if total <= 0.0:
        raise EstimatorError("delay spread of a zero-power profile")
    mean = float((psd.delays * psd.powers).sum() / total)
    var = float(((psd.delays - mean) ** 2 * psd.powers).sum() / total)
    return math.sqrt(max(var, 0.0))


def doppler_psd(delta_ts, acf_values) -> tuple[np.ndarray, np.ndarray]:
    """Discrete Fourier transform of a uniformly sampled temporal ACF.

    Returns (doppler frequencies, spectral values) sorted by frequency.
    """
    dts = np.asarray(delta_ts, dtype=np.float64)
    values = np.asarray(acf_values, dtype=np.complex128)
    if dts.size < 2:
        raise EstimatorError("need at least two ACF samples")
    steps = np.diff(dts)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise EstimatorError("ACF samples must be uniformly spaced")
    dt = float(steps[0])
    spectrum = np.fft.fftshift(np.fft.fft(values)) * dt
    freqs = np.fft.fftshift(np.fft.fftfreq(values.size, dt))
    return freqs, spectrum


def angular_psd(
    azimuths,
    elevations,
    powers,
    bin_deg: float = 1.0,
    los: tuple[float, float, float] | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Power binned over (elevation, azimuth); angles in radians.

    ``los`` optionally adds a (azimuth, elevation, power) direct-path
    contribution.  Returns (histogram, azimuth edges, elevation edges).
    """
    az = list(np.atleast_1d(azimuths))
    el = list(np.atleast_1d(elevations))
    pw = list(np.atleast_1d(powers))
    if los is not None:
        az.append(los[0])
        el.append(los[1])
        pw.append(los[2])
    width = math.radians(bin_deg)
    az_edges = np.arange(-math.pi, math.pi + width, width)
    el_edges = np.arange(-math.pi / 2, math.pi / 2 + width, width)
    hist, _, _ = np.histogram2d(el, az, bins=[el_edges, az_edges], weights=pw)
    return hist, az_edges, el_edges


def cluster_angle_spread(offsets, powers) -> float:
    """Power-weighted RMS of intra-cluster angular offsets (one coordinate)."""
    off = np.asarray(offsets, dtype=np.float64)
    pw = np.asarray(powers, dtype=np.float64)
    if off.size == 0:
        raise EstimatorError("angle spread of an empty cluster")
    total = pw.sum()
    if total <= 0.0:
        raise EstimatorError("angle spread with zero total power")
    return math.sqrt(float((off**2 * pw).sum() / total))


def normalized_psd_correlation(
    psd_a: DelayPsd, psd_b: DelayPsd, bin_width: float
) -> float:
    """Delay-PSD correlation normalized by the larger self-correlation."""
    a = psd_a.binned(bin_width)
    b = psd_b.binned(bin_width)
    cross = sum(power * b.get(key, 0.0) for key, power in a.items())
    self_a = sum(power * power for power in a.values())
    self_b = sum(power * power for power in b.values())
    denom = max(self_a, self_b)
    return cross / denom if denom > 0.0 else 0.0


@dataclass
class StationaryRegionResult:
    """Region sizes along one axis, one sample per anchor/realization."""

    axis: str
    samples: list[float]
    threshold: float

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if any(s < 0.0 for s in self.samples):
            raise ValueError("region sizes must be non-negative")


def stationary_region(
    psds: list[DelayPsd],
    step: float,
    c_th: float,
    anchor: int = 0,
    direction: int = 1,
    bin_width: float = 1e-10,
) -> float:
    """Largest contiguous lag from the anchor with correlation >= ``c_th``.

    ``psds`` is the ordered PSD sequence along one axis (snapshots, element
    steps, or sub-bands) with uniform spacing ``step``; the returned region
    size is the lag count times ``step``.
    """
    if len(psds) < 2:
        raise EstimatorError("stationary region needs at least two profiles")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    max_lags = len(psds) - anchor - 1 if direction == 1 else anchor
    region = 0
    for lag in range(1, max_lags + 1):
        other = psds[anchor + direction * lag]
        if normalized_psd_correlation(psds[anchor], other, bin_width) < c_th:
            break
        region = lag
    return region * step


def stationary_region_from_powers(
    powers: np.ndarray, step: float, c_th: float, anchor: int = 0, direction: int = 1
) -> float:
    """Stationary region over a dense (series, delay-bin) power matrix.

    Fast path for sequences that share their delay support exactly, as the
    frequency axis does; equivalent to :func:`stationary_region` with bins
    fine enough to separate every tap.
    """
    scan = psd_correlation_scan(powers, anchor, direction)
    below = np.nonzero(scan[1:] < c_th)[0]
    region = below[0] if below.size else scan.size - 1
    return float(region) * step
