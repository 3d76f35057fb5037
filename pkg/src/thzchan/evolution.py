"""Space-time-frequency non-stationarity: birth-death survival over the time
and array axes, mirror-point geometry updates, frequency-axis ray survival,
and the space-time-frequency-variant ray power model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChannelError, GeometryError
from .geometry import MotionState, velocity_vector, wavelength
from .kernels import mirror_step, stf_power_profile

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class BirthDeathParams:
    """Birth/death rates plus the scenario correlation factors.

    ``lambda_g``/``lambda_r`` are the cluster generation and recombination
    rates; ``d_c_a``/``d_c_s`` the array- and time-domain correlation factors
    (meters), ``b_c_f`` the frequency-domain correlation factor (Hz) and
    ``rho_s`` the reflection-surface coefficient.
    """

    lambda_g: float = 0.8
    lambda_r: float = 0.04
    d_c_a: float = 10.0
    d_c_s: float = 30.0
    b_c_f: float = 10e9
    rho_s: float = 1.0

    def __post_init__(self):
        for name in ("lambda_g", "lambda_r", "d_c_a", "d_c_s", "b_c_f", "rho_s"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def mean_cluster_count(self) -> float:
        return self.lambda_g / self.lambda_r


def survival_probability_side(
    params: BirthDeathParams,
    delta_t: float,
    delta_tilde: float,
    beta_e_tilde: float,
    alpha_a: float,
    beta_a_tilde: float,
    speed: float,
) -> float:
    """Probability that a cluster survives one combined time/array step on
    one link end.

    ``delta_tilde`` is the element spacing traversed (use ``sqrt(2) * delta``
    with the averaged panel elevation for diagonal steps), ``beta_*_tilde``
    the panel axis angles and ``alpha_a`` the motion azimuth.
    """
    if delta_t < 0.0 or delta_tilde < 0.0:
        raise ValueError("delta_t and delta_tilde must be non-negative")
    eps1 = delta_tilde * math.cos(beta_e_tilde) / params.d_c_a
    eps2 = speed * delta_t / params.d_c_s
    bracket = eps1 * eps1 + eps2 * eps2
    bracket -= 2.0 * eps1 * eps2 * math.cos(alpha_a - beta_a_tilde)
    return math.exp(-params.lambda_r * math.sqrt(max(bracket, 0.0)))


def joint_survival(p_tx: float, p_rx: float) -> float:
    """Joint remain probability of one cluster over both link ends."""
    for p in (p_tx, p_rx):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"survival probability {p} outside [0, 1]")
    return p_tx * p_rx


def expected_new_clusters(params: BirthDeathParams, p_remain: float) -> float:
    """Mean number of newly generated clusters for a given remain probability."""
    if not 0.0 <= p_remain <= 1.0:
        raise ValueError(f"p_remain {p_remain} outside [0, 1]")
    return params.mean_cluster_count * (1.0 - p_remain)


def frequency_survival(params: BirthDeathParams, b_sub_hz: float) -> float:
    """Probability that a ray survives between two adjacent sub-bands."""
    if b_sub_hz < 0.0:
        raise ValueError("b_sub_hz must be non-negative")
    return math.exp(-params.lambda_r * params.rho_s * b_sub_hz / params.b_c_f)


def expected_new_rays(params: BirthDeathParams, p_remain: float) -> float:
    """Mean number of rays born per cluster between adjacent sub-bands."""
    return expected_new_clusters(params, p_remain)


@dataclass
class MirrorState:
    """Mirror-point vectors for a batch of rays.

    ``tx_vectors[m]`` points from the Tx reference position to the mirror
    image of the Rx end for ray m, ``rx_vectors[m]`` from the Rx reference to
    the Tx-side image; both have the ray's total path length as norm.
    """

    tx_vectors: np.ndarray
    rx_vectors: np.ndarray

    def __post_init__(self):
        self.tx_vectors = np.atleast_2d(np.asarray(self.tx_vectors, dtype=np.float64))
        self.rx_vectors = np.atleast_2d(np.asarray(self.rx_vectors, dtype=np.float64))
        if self.tx_vectors.shape != self.rx_vectors.shape:
            raise ValueError("mirror vector arrays must have matching shapes")
        if not np.allclose(
            np.linalg.norm(self.tx_vectors, axis=1),
            np.linalg.norm(self.rx_vectors, axis=1),
            rtol=1e-9,
            atol=0.0,
        ):
            raise ValueError("mirror vectors of a ray must share one path length")

    @property
    def distances(self) -> np.ndarray:
        return np.linalg.norm(self.tx_vectors, axis=1)


def displacement(geometry_offset, motion: MotionState, delta_t: float) -> np.ndarray:
    """Combined array/time displacement of one link end."""
    return np.asarray(geometry_offset, dtype=np.float64) + velocity_vector(
        motion
    ) * delta_t


def evolve_space_time(
    state: MirrorState, disp_tx, disp_rx
) -> tuple[MirrorState, np.ndarray]:
    """Two-step mirror update for displacements of the two ends.

    First the Rx end moves against the frozen Tx-side mirror, giving a
    temporary path length; then the Tx end moves against the Rx-side mirror.
    Angles follow from the updated vectors; the two vector norms agree with
    the returned distances by construction.
    """
    if np.any(np.linalg.norm(state.tx_vectors, axis=1) == 0.0):
        raise GeometryError("mirror update on a zero-length path")
    new_tx, new_rx, dist = mirror_step(
        state.tx_vectors, state.rx_vectors, disp_tx, disp_rx
    )
    return MirrorState(new_tx, new_rx), dist


def doppler_nlos(
    tx_vectors, rx_vectors, motion_tx: MotionState, motion_rx: MotionState, f_i: float
) -> tuple[np.ndarray, np.ndarray]:
    """Per-ray Doppler shifts (Hz) contributed by the two link ends."""
    lam = wavelength(f_i)
    v_tx = velocity_vector(motion_tx)
    v_rx = velocity_vector(motion_rx)
    tx = np.atleast_2d(np.asarray(tx_vectors, dtype=np.float64))
    rx = np.atleast_2d(np.asarray(rx_vectors, dtype=np.float64))
    norm_tx = np.linalg.norm(tx, axis=1)
    norm_rx = np.linalg.norm(rx, axis=1)
    if np.any(norm_tx == 0.0) or np.any(norm_rx == 0.0):
        raise GeometryError("Doppler of a zero-length path vector")
    nu_tx = (tx @ v_tx) / (lam * norm_tx)
    nu_rx = (rx @ v_rx) / (lam * norm_rx)
    return nu_tx, nu_rx


@dataclass(frozen=True)
class PowerLaw:
    """Parameters of the pre-normalization ray power model.

    ``ds`` is the delay-scaling constant (seconds) and ``r_tau`` the delay
    proportionality factor (> 1); ``xi_sigma`` scales the spatial lognormal
    power modulation over the arrays, realized as ``n_sinusoids`` random
    sinusoids with spatial frequencies up to ``spatial_freq_max`` (rad/m).
    """

    ds: float = 10e-9
    r_tau: float = 2.3
    xi_sigma: float = 0.0
    xi_mu: float = 0.0
    n_sinusoids: int = 10
    spatial_freq_max: float = 100.0

    def __post_init__(self):
        if self.ds <= 0.0:
            raise ValueError("ds must be positive")
        if self.r_tau <= 1.0:
            raise ValueError("r_tau must exceed 1")
        if self.n_sinusoids < 1:
            raise ValueError("n_sinusoids must be at least 1")


@dataclass(frozen=True)
class SpatialLognormal:
    """Sum-of-sinusoids 2D lognormal power modulation over the element grid."""

    sigma: float
    mu: float
    amplitudes: np.ndarray
    freq_p: np.ndarray
    freq_q: np.ndarray
    thetas: np.ndarray

    def gaussian_field(self, delta_p: float, delta_q: float) -> float:
        """Underlying Gaussian process at scalar element offsets (meters)."""
        return float(
            np.sum(
                self.amplitudes
                * np.cos(self.freq_q * delta_q + self.freq_p * delta_p + self.thetas)
            )
        )

    def xi(self, delta_p: float, delta_q: float) -> float:
        return 10.0 ** (self.mu + self.sigma * self.gaussian_field(delta_p, delta_q))


def draw_spatial_lognormal(
    rng: np.random.Generator, law: PowerLaw
) -> SpatialLognormal:
    """Fresh sinusoid bank; amplitudes normalize the field to unit variance."""
    k = law.n_sinusoids
    return SpatialLognormal(
        sigma=law.xi_sigma,
        mu=law.xi_mu,
        amplitudes=np.full(k, math.sqrt(2.0 / k)),
        freq_p=rng.uniform(0.0, law.spatial_freq_max, k),
        freq_q=rng.uniform(0.0, law.spatial_freq_max, k),
        thetas=TWO_PI * (1.0 - rng.random(k)),
    )


def ray_power(
    law: PowerLaw,
    tau: float,
    z_db: float,
    xi: float,
    freq_exponent: float,
    f_i: float,
    f_c: float,
) -> float:
    """Pre-normalization power of one ray at one sub-band."""
    return (
        math.exp(-tau * (law.r_tau - 1.0) / (law.r_tau * law.ds))
        * 10.0 ** (-z_db / 10.0)
        * xi
        * (f_i / f_c) ** freq_exponent
    )


def power_profile(
    law: PowerLaw,
    tau: np.ndarray,
    z_db: np.ndarray,
    xi: np.ndarray,
    freq_exponent: np.ndarray,
    alive: np.ndarray,
    freqs: np.ndarray,
    f_c: float,
) -> np.ndarray:
    """Normalized (sub-band, ray) power matrix; rows sum to one."""
    alive8 = np.ascontiguousarray(np.atleast_2d(alive), dtype=np.uint8)
    return stf_power_profile(tau, z_db, xi, freq_exponent, alive8, freqs, f_c, law.ds, law.r_tau)


def normalize_powers(pre_powers: np.ndarray) -> np.ndarray:
    """Scale non-negative pre-powers to unit sum."""
    pre = np.asarray(pre_powers, dtype=np.float64)
    total = pre.sum()
    if total <= 0.0:
        raise DegenerateChannelError("all ray powers vanished")
    return pre / total
