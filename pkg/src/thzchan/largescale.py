"""Large-scale gain: close-in path loss, lognormal shadowing, blockage, and
molecular absorption, composed into a linear power gain per sub-band.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import wavelength


def friis_reference_loss_db(frequency_hz: float, ref_distance_m: float) -> float:
    """Free-space loss at the reference distance, ``20 log10(4 pi d / lambda)``."""
    return 20.0 * math.log10(4.0 * math.pi * ref_distance_m / wavelength(frequency_hz))


@dataclass(frozen=True)
class AbsorptionTable:
    """Attenuation in dB/m tabulated over frequency; linear interpolation,
    no extrapolation outside the tabulated range."""

    frequencies_hz: np.ndarray
    attenuation_db_per_m: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.frequencies_hz, dtype=np.float64)
        attn = np.asarray(self.attenuation_db_per_m, dtype=np.float64)
        if freqs.ndim != 1 or freqs.shape != attn.shape or freqs.size == 0:
            raise ValueError("absorption table needs matching 1-D columns")
        if np.any(np.diff(freqs) <= 0.0):
            raise ValueError("absorption table frequencies must be increasing")
        if np.any(attn < 0.0):
            raise ValueError("absorption attenuations must be non-negative")
        object.__setattr__(self, "frequencies_hz", freqs)
        object.__setattr__(self, "attenuation_db_per_m", attn)

    def db_per_m(self, frequency_hz: float) -> float:
        lo, hi = self.frequencies_hz[0], self.frequencies_hz[-1]
        if not lo <= frequency_hz <= hi:
            raise ValueError(
                f"frequency {frequency_hz} Hz outside absorption table "
                f"range [{lo}, {hi}]"
            )
        return float(
            np.interp(frequency_hz, self.frequencies_hz, self.attenuation_db_per_m)
        )

    @classmethod
    def flat(cls, db_per_m: float, f_lo_hz: float = 1e9, f_hi_hz: float = 2e13):
        return cls(np.array([f_lo_hz, f_hi_hz]), np.array([db_per_m, db_per_m]))


def load_absorption_csv(path) -> AbsorptionTable:
    """Read a two-column (frequency_hz, attenuation_db_per_m) CSV.

    A header row is required; rows must be sorted by frequency.
    """
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty absorption table") from None
        try:
            float(header[0])
        except (ValueError, IndexError):
            pass
        else:
            raise ValueError(f"{path}: absorption table must start with a header row")
        rows = [(float(row[0]), float(row[1])) for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: absorption table has no data rows")
    freqs, attn = zip(*rows)
    return AbsorptionTable(np.array(freqs), np.array(attn))


@dataclass(frozen=True)
class LargeScaleParams:
    """Inputs of the composed large-scale gain.

    ``pl0_db`` of ``None`` selects the Friis free-space value at the
    reference distance, recomputed for each sub-band frequency.
    """

    pl0_db: float | None = None
    gamma: float = 2.0
    ref_distance_m: float = 1.0
    sh_sigma_db: float = 0.0
    blockage_db: float = 0.0
    absorption: AbsorptionTable = field(default_factory=lambda: AbsorptionTable.flat(0.0))

    def __post_init__(self):
        if self.ref_distance_m <= 0.0:
            raise ValueError("ref_distance_m must be positive")
        if self.sh_sigma_db < 0.0:
            raise ValueError("sh_sigma_db must be non-negative")

    def reference_loss_db(self, frequency_hz: float) -> float:
        if self.pl0_db is not None:
            return self.pl0_db
        return friis_reference_loss_db(frequency_hz, self.ref_distance_m)


def path_loss_db(params: LargeScaleParams, distance_m: float, frequency_hz: float) -> float:
    """Close-in reference-distance path loss in dB."""
    if distance_m <= 0.0:
        raise ValueError(f"distance must be positive, got {distance_m}")
    return params.reference_loss_db(frequency_hz) + 10.0 * params.gamma * math.log10(
        distance_m / params.ref_distance_m
    )


def shadowing_db(rng: np.random.Generator, sigma_db: float) -> float:
    """One zero-mean Gaussian shadowing draw in dB (lognormal in power)."""
    if sigma_db < 0.0:
        raise ValueError("sigma_db must be non-negative")
    if sigma_db == 0.0:
        return 0.0
    return float(rng.normal(0.0, sigma_db))


def molecular_absorption_db(
    params: LargeScaleParams, frequency_hz: float, distance_m: float
) -> float:
    """Absorption loss over the path, interpolated dB/m times distance."""
    if distance_m < 0.0:
        raise ValueError("distance must be non-negative")
    if distance_m == 0.0:
        return 0.0
    return params.absorption.db_per_m(frequency_hz) * distance_m


def compose_large_scale(
    params: LargeScaleParams,
    distance_m: float,
    frequency_hz: float,
    shadowing_db_value: float = 0.0,
    blockage_db_value: float | None = None,
) -> float:
    """Linear power gain ``10^-(PL + SH + BL + MA)/10``.

    Evaluated per sub-band: the reference loss and the absorption term depend
    on the frequency, so the result must never be reused across sub-bands.
    """
    blockage = params.blockage_db if blockage_db_value is None else blockage_db_value
    total_db = (
        path_loss_db(params, distance_m, frequency_hz)
        + shadowing_db_value
        + blockage
        + molecular_absorption_db(params, frequency_hz, distance_m)
    )
    return 10.0 ** (-total_db / 10.0)
