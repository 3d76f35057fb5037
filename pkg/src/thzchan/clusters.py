"""Initial cluster-set generation at the reference element pair, first
snapshot, and first sub-band: distances, angles, ray offsets, and ray counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GeometryError
from .geometry import wrap_azimuth
from .kernels import ray_path_distance

TWO_PI = 2.0 * math.pi


def _uniform_phase(rng: np.random.Generator, size=None):
    """Uniform draw on (0, 2*pi]."""
    return TWO_PI * (1.0 - rng.random(size))


def fold_elevation(angle):
    """Fold an elevation angle into [-pi/2, pi/2] by reflection at the poles."""
    return np.arcsin(np.sin(np.asarray(angle, dtype=np.float64)))


@dataclass
class Ray:
    """One diffusely scattered component of a cluster.

    ``offsets`` is (d_az_tx, d_el_tx, d_az_rx, d_el_rx) relative to the
    specular center; ``total_distance`` the end-to-end path length at the
    reference element pair; ``phases`` the (vv, vh, hv, hh) polarization
    phases in (0, 2*pi]; ``xpr`` the cross-polarization power ratio and
    ``freq_exponent`` the per-ray frequency-scaling exponent of its power.
    """

    offsets: tuple[float, float, float, float]
    total_distance: float
    phases: tuple[float, float, float, float]
    xpr: float
    freq_exponent: float
    power: float = 0.0


@dataclass
class Cluster:
    """A specular-center path with its diffuse rays.

    ``center_angles`` is (az_tx, el_tx, az_rx, el_rx); ``angle_sigmas`` the
    intra-cluster offset standard deviations in the same order.  ``r_c_tx``
    and ``r_c_rx`` are the hop-length ratios; they sum to one for single
    bounce and to less than one for multi-bounce paths.
    """

    center_distance: float
    center_angles: tuple[float, float, float, float]
    r_c_tx: float
    r_c_rx: float
    angle_sigmas: tuple[float, float, float, float]
    shadowing_z_db: float
    rays: list[Ray] = field(default_factory=list)


@dataclass
class ClusterSet:
    clusters: list[Cluster]
    los_distance: float

    def __post_init__(self):
        distances = [c.center_distance for c in self.clusters]
        if any(b < a for a, b in zip(distances, distances[1:])):
            raise ValueError("cluster center distances must be non-decreasing")
        if any(d < self.los_distance for d in distances):
            raise ValueError("cluster center distances cannot undercut the direct path")


@dataclass(frozen=True)
class AngleSector:
    lo: float
    hi: float

    def draw(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.lo, self.hi))


@dataclass(frozen=True)
class ClusterLaw:
    """Distribution parameters of the initial cluster set.

    Angle sigmas and sectors are in radians.  ``ray_count`` fixes the number
    of rays per cluster when set; otherwise counts are Poisson draws with
    mean ``ray_lambda`` clamped to at least one ray.
    """

    d_bar_n: float = 1.5
    center_std_az_tx: float = 0.0
    center_std_el_tx: float = 0.0
    center_std_az_rx: float = 0.0
    center_std_el_rx: float = 0.0
    sector_az_tx: AngleSector = AngleSector(-math.pi, math.pi)
    sector_el_tx: AngleSector = AngleSector(-math.pi / 4, math.pi / 4)
    sector_az_rx: AngleSector = AngleSector(-math.pi, math.pi)
    sector_el_rx: AngleSector = AngleSector(-math.pi / 4, math.pi / 4)
    sigma_az_tx: float = math.radians(2.8)
    sigma_el_tx: float = math.radians(1.4)
    sigma_az_rx: float = math.radians(1.7)
    sigma_el_rx: float = math.radians(1.2)
    shadow_sigma_db: float = 3.0
    ray_count: int | None = None
    ray_lambda: float = 20.0
    single_bounce_prob: float = 1.0
    r_c_lo: float = 0.2
    r_c_hi: float = 0.8
    xpr_mean_db: float = 9.0
    xpr_std_db: float = 3.0
    freq_exp_mean: float = 0.0
    freq_exp_std: float = 0.0


def draw_cluster_distances(
    rng: np.random.Generator, n_clusters: int, los_distance: float, d_bar_n: float
) -> list[float]:
    """Total path distances of ``n_clusters`` clusters.

    Distances grow from the direct distance by independent exponential
    increments with mean ``d_bar_n``; the first increment is the excess of
    the first cluster over the direct path.
    """
    if n_clusters < 1:
        raise ValueError("need at least one cluster")
    if d_bar_n <= 0.0:
        raise ValueError("d_bar_n must be positive")
    increments = rng.exponential(d_bar_n, size=n_clusters)
    return list(los_distance + np.cumsum(increments))


def draw_cluster_angles(
    rng: np.random.Generator,
    std_el: float,
    std_az: float,
    mean_el: float,
    mean_az: float,
) -> tuple[float, float]:
    """Wrapped-Gaussian (elevation, azimuth) draw around the given means."""
    if std_el < 0.0 or std_az < 0.0:
        raise ValueError("angle standard deviations must be non-negative")
    elevation = std_el * rng.standard_normal() + mean_el
    azimuth = std_az * rng.standard_normal() + mean_az
    return float(fold_elevation(elevation)), wrap_azimuth(azimuth)


def draw_ray_count(
    rng: np.random.Generator, ray_lambda: float, fixed: int | None = None
) -> int:
    """Number of rays in a cluster: fixed, or Poisson clamped to >= 1."""
    if fixed is not None:
        if fixed < 1:
            raise ValueError("fixed ray count must be at least 1")
        return fixed
    if ray_lambda <= 0.0:
        raise ValueError("ray_lambda must be positive")
    return max(1, int(rng.poisson(ray_lambda)))


def draw_ray_offsets(
    rng: np.random.Generator, sigmas, n_rays: int, limit: float = math.pi / 2
) -> np.ndarray:
    """(n_rays, 4) zero-mean Gaussian angular offsets, one column per sigma.

    Draws with magnitude at or beyond ``limit`` are resampled so the path
    geometry (positive offset cosines) stays valid.
    """
    sigmas = np.asarray(sigmas, dtype=np.float64)
    offsets = rng.standard_normal((n_rays, 4)) * sigmas[None, :]
    bad = np.abs(offsets) >= limit
    while np.any(bad):
        offsets[bad] = rng.standard_normal(int(bad.sum())) * np.broadcast_to(
            sigmas, offsets.shape
        )[bad]
        bad = np.abs(offsets) >= limit
    return offsets


def ray_total_distance(cluster: Cluster, ray: Ray) -> float:
    """Path length of a ray from the cluster geometry and its offsets.

    Combines the vertical/horizontal path components built from the center
    azimuths, hop ratios, and offset cosines.  Zero offsets give the specular
    path of this construction.
    """
    return float(_offset_distances(cluster, np.asarray(ray.offsets)[None, :])[0])


def _offset_distances(cluster: Cluster, offsets: np.ndarray) -> np.ndarray:
    if np.any(np.abs(offsets) >= math.pi / 2):
        raise GeometryError("ray angular offsets must satisfy |offset| < pi/2")
    az_tx, _, az_rx, _ = cluster.center_angles
    return ray_path_distance(
        cluster.center_distance,
        az_tx,
        az_rx,
        cluster.r_c_tx,
        cluster.r_c_rx,
        np.ascontiguousarray(offsets[:, 0]),
        np.ascontiguousarray(offsets[:, 1]),
        np.ascontiguousarray(offsets[:, 2]),
        np.ascontiguousarray(offsets[:, 3]),
    )


def ray_excess_distances(cluster: Cluster, offsets: np.ndarray) -> np.ndarray:
    """Per-ray excess path length relative to the zero-offset specular path.

    Floored at zero so ray delays never undercut the cluster (and hence the
    direct path).
    """
    specular = _offset_distances(cluster, np.zeros((1, 4)))[0]
    return np.maximum(_offset_distances(cluster, offsets) - specular, 0.0)


def _draw_hop_ratios(rng: np.random.Generator, law: ClusterLaw) -> tuple[float, float]:
    if rng.random() < law.single_bounce_prob:
        r_tx = float(rng.uniform(law.r_c_lo, law.r_c_hi))
        return r_tx, 1.0 - r_tx
    while True:
        r_tx = float(rng.uniform(law.r_c_lo, law.r_c_hi))
        r_rx = float(rng.uniform(law.r_c_lo, law.r_c_hi))
        if r_tx + r_rx < 1.0:
            return r_tx, r_rx


def make_rays(
    rng: np.random.Generator, cluster: Cluster, n_rays: int, law: ClusterLaw
) -> list[Ray]:
    """Draw ``n_rays`` fresh rays for ``cluster`` under ``law``."""
    offsets = draw_ray_offsets(rng, cluster.angle_sigmas, n_rays)
    distances = cluster.center_distance + ray_excess_distances(cluster, offsets)
    phases = _uniform_phase(rng, (n_rays, 4))
    xpr = 10.0 ** (rng.normal(law.xpr_mean_db, law.xpr_std_db, n_rays) / 10.0)
    freq_exp = rng.normal(law.freq_exp_mean, law.freq_exp_std, n_rays)
    return [
        Ray(
            offsets=tuple(offsets[m]),
            total_distance=float(distances[m]),
            phases=tuple(phases[m]),
            xpr=float(xpr[m]),
            freq_exponent=float(freq_exp[m]),
        )
        for m in range(n_rays)
    ]


def make_cluster(
    rng: np.random.Generator, law: ClusterLaw, center_distance: float
) -> Cluster:
    """Generate one cluster (center geometry plus rays) at the given distance."""
    el_tx, az_tx = draw_cluster_angles(
        rng,
        law.center_std_el_tx,
        law.center_std_az_tx,
        law.sector_el_tx.draw(rng),
        law.sector_az_tx.draw(rng),
    )
    el_rx, az_rx = draw_cluster_angles(
        rng,
        law.center_std_el_rx,
        law.center_std_az_rx,
        law.sector_el_rx.draw(rng),
        law.sector_az_rx.draw(rng),
    )
    r_tx, r_rx = _draw_hop_ratios(rng, law)
    cluster = Cluster(
        center_distance=center_distance,
        center_angles=(az_tx, el_tx, az_rx, el_rx),
        r_c_tx=r_tx,
        r_c_rx=r_rx,
        angle_sigmas=(
            law.sigma_az_tx,
            law.sigma_el_tx,
            law.sigma_az_rx,
            law.sigma_el_rx,
        ),
        shadowing_z_db=float(rng.normal(0.0, law.shadow_sigma_db)),
    )
    n_rays = draw_ray_count(rng, law.ray_lambda, law.ray_count)
    cluster.rays = make_rays(rng, cluster, n_rays, law)
    return cluster


def generate_cluster_set(
    rng: np.random.Generator, law: ClusterLaw, los_distance: float, n_clusters: int
) -> ClusterSet:
    """Initial set of ``n_clusters`` clusters for one realization."""
    distances = draw_cluster_distances(rng, n_clusters, los_distance, law.d_bar_n)
    return ClusterSet(
        clusters=[make_cluster(rng, law, d) for d in distances],
        los_distance=los_distance,
    )


def with_fresh_phases(cluster: Cluster, rng: np.random.Generator) -> Cluster:
    """Copy of ``cluster`` with redrawn polarization phases, geometry shared."""
    rays = [
        replace(ray, phases=tuple(_uniform_phase(rng, 4))) for ray in cluster.rays
    ]
    return replace(cluster, rays=rays)
