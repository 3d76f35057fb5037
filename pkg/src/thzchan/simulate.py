"""Seeded generation and space-time-frequency evolution of channel
realizations, plus the queryable realization object used by the estimators.

Randomness contract: one realization consumes a single ``numpy`` generator in
a fixed order (direct-path phase, shadowing, blockage, initial cluster count,
cluster parameters with their spatial power fields and frequency-axis ray
chains, then per snapshot: cluster survival, births, array-axis visibility
walks).  Realization ``r`` of a run is seeded with
``SeedSequence([master_seed, r])``, so results are independent of scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import clusters as cl
from .cir import PATTERNS, PATTERNS_BATCH, BandPlan, Tap, assemble_cir, los_tap, nlos_tap
from .config import SimulationConfig
from .evolution import (
    BirthDeathParams,
    MirrorState,
    PowerLaw,
    draw_spatial_lognormal,
    evolve_space_time,
    expected_new_clusters,
    frequency_survival,
    joint_survival,
    survival_probability_side,
)
from .geometry import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    MotionState,
    direction_from_angles,
    element_positions,
    gcs_to_lcs_batch,
    subarray_partition,
    velocity_vector,
    wavelength,
    wrap_azimuth,
)
from .kernels import stf_power_profile
from .largescale import LargeScaleParams, compose_large_scale


@dataclass(frozen=True)
class _BlockGrid:
    """Sub-array blocks of one side arranged on their (row, column) grid."""

    n_row: int
    n_col: int
    row_ranges: tuple[tuple[int, int], ...]
    col_ranges: tuple[tuple[int, int], ...]
    # per element (0-based): linear block index, row-major
    element_block: np.ndarray
    # per block: 1-based reference element
    reference_elements: tuple[int, ...]
    # walk steps: per non-origin block, (parent, delta_tilde, beta_e, beta_a)
    steps: tuple[tuple[int, float, float, float], ...]

    @property
    def n_blocks(self) -> int:
        return self.n_row * self.n_col


def _build_block_grid(array: ArrayGeometry, blocks) -> _BlockGrid:
    row_ranges = sorted({(b.row_start, b.row_stop) for b in blocks})
    col_ranges = sorted({(b.col_start, b.col_stop) for b in blocks})
    n_row, n_col = len(row_ranges), len(col_ranges)
    row_of = np.zeros(array.m_h + 1, dtype=np.int64)
    for i, (lo, hi) in enumerate(row_ranges):
        row_of[lo : hi + 1] = i
    col_of = np.zeros(array.m_v + 1, dtype=np.int64)
    for j, (lo, hi) in enumerate(col_ranges):
        col_of[lo : hi + 1] = j
    rows = np.arange(array.size) // array.m_v + 1
    cols = np.arange(array.size) % array.m_v + 1
    element_block = row_of[rows] * n_col + col_of[cols]
    references = tuple(
        (row_ranges[i][0] - 1) * array.m_v + col_ranges[j][0]
        for i in range(n_row)
        for j in range(n_col)
    )
    beta = array.orientation
    steps = []
    for i in range(n_row):
        for j in range(n_col):
            if i == 0 and j == 0:
                continue
            row_step = (
                (row_ranges[i][0] - row_ranges[i - 1][0]) * array.delta_h
                if i > 0
                else 0.0
            )
            col_step = (
                (col_ranges[j][0] - col_ranges[j - 1][0]) * array.delta_v
                if j > 0
                else 0.0
            )
            if i > 0 and j > 0:
                parent = (i - 1) * n_col + (j - 1)
                delta = math.hypot(row_step, col_step)
                beta_e = 0.5 * (beta.beta_h_e + beta.beta_v_e)
                beta_a = 0.5 * (beta.beta_h_a + beta.beta_v_a)
            elif i > 0:
                parent = (i - 1) * n_col + j
                delta, beta_e, beta_a = row_step, beta.beta_h_e, beta.beta_h_a
            else:
                parent = i * n_col + (j - 1)
                delta, beta_e, beta_a = col_step, beta.beta_v_e, beta.beta_v_a
            steps.append((parent, delta, beta_e, beta_a))
    return _BlockGrid(
        n_row=n_row,
        n_col=n_col,
        row_ranges=tuple(row_ranges),
        col_ranges=tuple(col_ranges),
        element_block=element_block,
        reference_elements=references,
        steps=tuple(steps),
    )


@dataclass(frozen=True)
class Scene:
    """Immutable per-run bundle of all derived scenario objects."""

    band: BandPlan
    tx_array: ArrayGeometry
    rx_array: ArrayGeometry
    tx_motion: MotionState
    rx_motion: MotionState
    distance: float
    k_factor: float
    los_phase_mode: str
    pattern_name: str
    law: cl.ClusterLaw
    bd: BirthDeathParams
    power_law: PowerLaw
    ls_params: LargeScaleParams
    sh_per_subband: bool
    blockage_mode: str
    blockage_prob: float
    blockage_db: float
    n_snapshots: int
    delta_t: float
    share_within_block: bool
    initial_count: int | None
    tx_grid: _BlockGrid = field(repr=False)
    rx_grid: _BlockGrid = field(repr=False)
    tx_positions: np.ndarray = field(repr=False)
    rx_positions: np.ndarray = field(repr=False)

    @property
    def d_vector0(self) -> np.ndarray:
        # global x axis points at the first Rx element
        return np.array([self.distance, 0.0, 0.0])

    @property
    def v_tx(self) -> np.ndarray:
        return velocity_vector(self.tx_motion)

    @property
    def v_rx(self) -> np.ndarray:
        return velocity_vector(self.rx_motion)

    @property
    def pattern(self):
        return PATTERNS[self.pattern_name]

    def los_vector(self, t: float) -> np.ndarray:
        return self.d_vector0 + (self.v_rx - self.v_tx) * t

    def tx_offset(self, p: int) -> np.ndarray:
        if self.share_within_block:
            ref = self.tx_grid.reference_elements[self.tx_grid.element_block[p - 1]]
            return self.tx_positions[ref - 1]
        return self.tx_positions[p - 1]

    def rx_offset(self, q: int) -> np.ndarray:
        if self.share_within_block:
            ref = self.rx_grid.reference_elements[self.rx_grid.element_block[q - 1]]
            return self.rx_positions[ref - 1]
        return self.rx_positions[q - 1]


def build_scene(config: SimulationConfig, share_within_block: bool | None = None) -> Scene:
    band = config.band_plan()
    tx_array = config.tx_array()
    rx_array = config.rx_array()
    min_dist = config.subarray.min_path_distance_m
    if share_within_block is None:
        share_within_block = config.subarray.share_within_block
    tx_blocks = subarray_partition(tx_array, band.f_c, min_dist)
    rx_blocks = subarray_partition(rx_array, band.f_c, min_dist)
    return Scene(
        band=band,
        tx_array=tx_array,
        rx_array=rx_array,
        tx_motion=config.tx_motion(),
        rx_motion=config.rx_motion(),
        distance=config.link.distance_m,
        k_factor=config.link.k_factor,
        los_phase_mode=config.link.los_phase,
        pattern_name=config.pattern,
        law=config.cluster_law(),
        bd=config.birth_death_params(),
        power_law=config.power_law(),
        ls_params=config.largescale_params(),
        sh_per_subband=config.largescale.sh_per_subband,
        blockage_mode=config.largescale.blockage_mode,
        blockage_prob=config.largescale.blockage_prob,
        blockage_db=config.largescale.blockage_db,
        n_snapshots=config.snapshots.count,
        delta_t=config.snapshots.delta_t_s,
        share_within_block=share_within_block,
        initial_count=config.clusters.initial_count,
        tx_grid=_build_block_grid(tx_array, tx_blocks),
        rx_grid=_build_block_grid(rx_array, rx_blocks),
        tx_positions=element_positions(tx_array),
        rx_positions=element_positions(rx_array),
    )


@dataclass
class ClusterState:
    """Static per-cluster data grown at generation time.

    Ray arrays span every ray the cluster ever owns; ``alive[i, m]`` marks
    membership of ray ``m`` in sub-band ``i`` (frequency-axis birth-death,
    frozen over time).
    """

    cid: int
    born_snapshot: int
    z_db: float
    center_angles: tuple[float, float, float, float]
    spatial: object
    offsets: np.ndarray
    phases: np.ndarray
    kappa: np.ndarray
    gamma: np.ndarray
    alive: np.ndarray

    @property
    def n_rays(self) -> int:
        return self.offsets.shape[0]


@dataclass
class ClusterSnapshot:
    """Per-snapshot kinematic and visibility record of one cluster."""

    mirror_tx: np.ndarray
    mirror_rx: np.ndarray
    distances: np.ndarray
    vis_tx: np.ndarray
    vis_rx: np.ndarray


@dataclass
class Snapshot:
    t: float
    records: dict[int, ClusterSnapshot]


@dataclass
class _PairTable:
    """Cached per-(q, p, snapshot) ray kinematics across visible clusters."""

    cids: list[int]
    slices: dict[int, slice]
    tau: np.ndarray
    z_db: np.ndarray
    xi: np.ndarray
    gamma: np.ndarray
    alive: np.ndarray
    tx_vectors: np.ndarray
    rx_vectors: np.ndarray
    proj_tx: np.ndarray
    proj_rx: np.ndarray
    cluster_ids: np.ndarray
    ray_ids: np.ndarray
    phases: np.ndarray
    kappa: np.ndarray


def _tap_entries_batch(
    scene: Scene, pattern_batch, table: _PairTable, idx, phases, sqrt_p,
    nu_tx, nu_rx, t: float,
) -> np.ndarray:
    """Vectorized (ray, 2, 2) polarization amplitudes; matches building each
    tap through :func:`thzchan.cir.nlos_tap` ray by ray."""
    tx_v = table.tx_vectors[idx]
    rx_v = table.rx_vectors[idx]
    dist = np.linalg.norm(tx_v, axis=1)
    az_dep = np.arctan2(tx_v[:, 1], tx_v[:, 0])
    el_dep = np.arcsin(np.clip(tx_v[:, 2] / dist, -1.0, 1.0))
    az_arr = np.arctan2(rx_v[:, 1], rx_v[:, 0])
    el_arr = np.arcsin(np.clip(rx_v[:, 2] / dist, -1.0, 1.0))
    az_t, el_t = gcs_to_lcs_batch(az_dep, el_dep, scene.tx_array.rotation)
    az_r, el_r = gcs_to_lcs_batch(az_arr, el_arr, scene.rx_array.rotation)
    f_tv, f_th = pattern_batch(el_t, az_t)
    f_rv, f_rh = pattern_batch(el_r, az_r)
    cross = np.where(
        np.isfinite(table.kappa[idx]), np.sqrt(1.0 / table.kappa[idx]), 0.0
    )
    common = sqrt_p * np.exp(1j * cl.TWO_PI * (nu_tx + nu_rx) * t)
    entries = np.empty((idx.size, 2, 2), dtype=np.complex128)
    entries[:, 0, 0] = f_rv * f_tv * np.exp(1j * phases[:, 0]) * common
    entries[:, 0, 1] = f_rv * f_th * cross * np.exp(1j * phases[:, 1]) * common
    entries[:, 1, 0] = f_rh * f_tv * cross * np.exp(1j * phases[:, 2]) * common
    entries[:, 1, 1] = f_rh * f_th * np.exp(1j * phases[:, 3]) * common
    return entries


def _ray_mirrors(state: ClusterState, distances: np.ndarray):
    az_tx, el_tx, az_rx, el_rx = state.center_angles
    aod_az = wrap_azimuth(az_tx + state.offsets[:, 0])
    aod_el = cl.fold_elevation(el_tx + state.offsets[:, 1])
    aoa_az = wrap_azimuth(az_rx + state.offsets[:, 2])
    aoa_el = cl.fold_elevation(el_rx + state.offsets[:, 3])
    mirror_tx = distances[:, None] * direction_from_angles(aod_az, aod_el)
    mirror_rx = distances[:, None] * direction_from_angles(aoa_az, aoa_el)
    return mirror_tx, mirror_rx


class Realization:
    """One evolved channel realization, queryable per element pair, sub-band,
    and snapshot."""

    def __init__(self, scene: Scene, rng: np.random.Generator):
        self.scene = scene
        self.band = scene.band
        self.theta_los = cl.TWO_PI * (1.0 - rng.random())
        self.shadow_db = (
            float(rng.normal(0.0, scene.ls_params.sh_sigma_db))
            if scene.ls_params.sh_sigma_db > 0.0 and not scene.sh_per_subband
            else 0.0
        )
        self._subband_shadow: dict[int, float] = {}
        if scene.sh_per_subband and scene.ls_params.sh_sigma_db > 0.0:
            draws = rng.normal(0.0, scene.ls_params.sh_sigma_db, scene.band.n_sub)
            self._subband_shadow = {i: float(draws[i]) for i in range(scene.band.n_sub)}
        if scene.blockage_mode == "two_state":
            self.blockage_db = (
                scene.blockage_db if rng.random() < scene.blockage_prob else 0.0
            )
        else:
            self.blockage_db = scene.blockage_db
        self.clusters: dict[int, ClusterState] = {}
        self.snapshots: list[Snapshot] = []
        p_tx = survival_probability_side(
            scene.bd, scene.delta_t, 0.0, 0.0,
            scene.tx_motion.alpha_a, 0.0, scene.tx_motion.speed,
        )
        p_rx = survival_probability_side(
            scene.bd, scene.delta_t, 0.0, 0.0,
            scene.rx_motion.alpha_a, 0.0, scene.rx_motion.speed,
        )
        self.survival_per_step = joint_survival(p_tx, p_rx)
        self._tables: dict = {}
        self._pre_powers: dict = {}
        self._build(rng)

    # ------------------------------------------------------------------
    # generation

    def _build(self, rng: np.random.Generator):
        scene = self.scene
        if scene.initial_count is not None:
            n0 = scene.initial_count
        else:
            n0 = max(1, int(rng.poisson(scene.bd.mean_cluster_count)))
        initial = cl.generate_cluster_set(rng, scene.law, scene.distance, n0)
        active: list[int] = []
        records: dict[int, ClusterSnapshot] = {}
        for cluster in initial.clusters:
            state, mirrors = self._make_state(rng, cluster, born_snapshot=0)
            self.clusters[state.cid] = state
            active.append(state.cid)
            records[state.cid] = ClusterSnapshot(*mirrors, None, None)
        self._apply_visibility(rng, records)
        self.snapshots.append(Snapshot(t=0.0, records=records))
        for k in range(1, scene.n_snapshots):
            t_k = k * scene.delta_t
            prev = self.snapshots[-1].records
            survivors = [
                cid for cid in active if rng.random() < self.survival_per_step
            ]
            n_new = int(rng.poisson(
                expected_new_clusters(scene.bd, self.survival_per_step)
            ))
            records = {}
            for cid in survivors:
                old = prev[cid]
                mirror, dist = evolve_space_time(
                    MirrorState(old.mirror_tx, old.mirror_rx),
                    scene.v_tx * scene.delta_t,
                    scene.v_rx * scene.delta_t,
                )
                records[cid] = ClusterSnapshot(
                    mirror.tx_vectors, mirror.rx_vectors, dist, None, None
                )
            active = survivors
            los_now = float(np.linalg.norm(scene.los_vector(t_k)))
            for _ in range(n_new):
                distance = los_now + float(rng.exponential(scene.law.d_bar_n))
                cluster = cl.make_cluster(rng, scene.law, distance)
                state, mirrors = self._make_state(rng, cluster, born_snapshot=k)
                self.clusters[state.cid] = state
                active.append(state.cid)
                records[state.cid] = ClusterSnapshot(*mirrors, None, None)
            self._apply_visibility(rng, records)
            self.snapshots.append(Snapshot(t=t_k, records=records))

    def _make_state(self, rng, cluster: cl.Cluster, born_snapshot: int):
        scene = self.scene
        n_sub = scene.band.n_sub
        spatial = draw_spatial_lognormal(rng, scene.power_law)
        rays = list(cluster.rays)
        p_f = frequency_survival(scene.bd, scene.band.b_sub)
        p_die = 1.0 - p_f

        def lifetimes(count):
            # sub-band index of the first failed survival draw
            if p_die <= 0.0:
                return np.full(count, n_sub, dtype=np.int64)
            return rng.geometric(p_die, size=count)

        born = [0] * len(rays)
        died = list(np.minimum(lifetimes(len(rays)), n_sub))
        if n_sub > 1:
            mean_births = expected_new_clusters(scene.bd, p_f)
            birth_counts = rng.poisson(mean_births, size=n_sub - 1)
            for i in np.nonzero(birth_counts)[0]:
                step = int(i) + 1
                n_new = int(birth_counts[i])
                for ray in cl.make_rays(rng, cluster, n_new, scene.law):
                    rays.append(ray)
                    born.append(step)
                    died.append(min(step + int(lifetimes(1)[0]), n_sub))
        n_rays = len(rays)
        alive = np.zeros((n_sub, n_rays), dtype=bool)
        for m in range(n_rays):
            alive[born[m]: died[m], m] = True
        state = ClusterState(
            cid=len(self.clusters),
            born_snapshot=born_snapshot,
            z_db=cluster.shadowing_z_db,
            center_angles=cluster.center_angles,
            spatial=spatial,
            offsets=np.array([r.offsets for r in rays], dtype=np.float64),
            phases=np.array([r.phases for r in rays], dtype=np.float64),
            kappa=np.array([r.xpr for r in rays], dtype=np.float64),
            gamma=np.array([r.freq_exponent for r in rays], dtype=np.float64),
            alive=alive,
        )
        distances = np.array([r.total_distance for r in rays], dtype=np.float64)
        return state, _ray_mirrors(state, distances) + (distances,)

    def _apply_visibility(self, rng, records: dict[int, ClusterSnapshot]):
        cids = sorted(records)
        n = len(cids)
        vis_tx = self._walk_visibility(rng, self.scene.tx_grid, self.scene.tx_motion, n)
        vis_rx = self._walk_visibility(rng, self.scene.rx_grid, self.scene.rx_motion, n)
        for idx, cid in enumerate(cids):
            records[cid].vis_tx = vis_tx[:, idx]
            records[cid].vis_rx = vis_rx[:, idx]

    def _walk_visibility(self, rng, grid: _BlockGrid, motion: MotionState, n: int):
        vis = np.ones((grid.n_blocks, n), dtype=bool)
        if grid.n_blocks == 1 or n == 0:
            return vis
        block_ids = [
            i * grid.n_col + j
            for i in range(grid.n_row)
            for j in range(grid.n_col)
            if not (i == 0 and j == 0)
        ]
        for block_id, (parent, delta, beta_e, beta_a) in zip(block_ids, grid.steps):
            p_step = survival_probability_side(
                self.scene.bd, 0.0, delta, beta_e, motion.alpha_a, beta_a,
                motion.speed,
            )
            vis[block_id] = vis[parent] & (rng.random(n) < p_step)
        return vis

    # ------------------------------------------------------------------
    # queries

    def snapshot_index(self, t: float) -> int:
        k = int(round(t / self.scene.delta_t)) if t != 0.0 else 0
        if k < 0 or k >= len(self.snapshots) or not math.isclose(
            self.snapshots[k].t, t, rel_tol=0.0, abs_tol=1e-9 * max(self.scene.delta_t, 1.0)
        ):
            raise ValueError(f"no snapshot at t={t}")
        return k

    def present_cids(self, q: int, p: int, k: int) -> list[int]:
        bt = int(self.scene.tx_grid.element_block[p - 1])
        br = int(self.scene.rx_grid.element_block[q - 1])
        records = self.snapshots[k].records
        return [
            cid
            for cid in sorted(records)
            if records[cid].vis_tx[bt] and records[cid].vis_rx[br]
        ]

    def _pair_table(self, q: int, p: int, k: int) -> _PairTable:
        key = (q, p, k)
        table = self._tables.get(key)
        if table is not None:
            return table
        scene = self.scene
        disp_tx = scene.tx_offset(p)
        disp_rx = scene.rx_offset(q)
        shift = bool(np.any(disp_tx) or np.any(disp_rx))
        delta_p = float(np.linalg.norm(disp_tx))
        delta_q = float(np.linalg.norm(disp_rx))
        records = self.snapshots[k].records
        cids = self.present_cids(q, p, k)
        parts = []
        slices: dict[int, slice] = {}
        start = 0
        for cid in cids:
            state = self.clusters[cid]
            rec = records[cid]
            if shift:
                mirror, dist = evolve_space_time(
                    MirrorState(rec.mirror_tx, rec.mirror_rx), disp_tx, disp_rx
                )
                tx_v, rx_v = mirror.tx_vectors, mirror.rx_vectors
            else:
                tx_v, rx_v, dist = rec.mirror_tx, rec.mirror_rx, rec.distances
            n = state.n_rays
            slices[cid] = slice(start, start + n)
            start += n
            parts.append((cid, state, tx_v, rx_v, dist))
        if start == 0:
            table = _PairTable(
                cids=[], slices={}, tau=np.zeros(0), z_db=np.zeros(0),
                xi=np.zeros(0), gamma=np.zeros(0),
                alive=np.zeros((scene.band.n_sub, 0), dtype=bool),
                tx_vectors=np.zeros((0, 3)), rx_vectors=np.zeros((0, 3)),
                proj_tx=np.zeros(0), proj_rx=np.zeros(0),
                cluster_ids=np.zeros(0, dtype=np.int64),
                ray_ids=np.zeros(0, dtype=np.int64),
                phases=np.zeros((0, 4)), kappa=np.zeros(0),
            )
            self._tables[key] = table
            return table
        v_tx, v_rx = scene.v_tx, scene.v_rx
        tx_vectors = np.vstack([p_[2] for p_ in parts])
        rx_vectors = np.vstack([p_[3] for p_ in parts])
        dists = np.concatenate([p_[4] for p_ in parts])
        table = _PairTable(
            cids=cids,
            slices=slices,
            tau=dists / SPEED_OF_LIGHT,
            z_db=np.concatenate(
                [np.full(s.n_rays, s.z_db) for _, s, *_ in parts]
            ),
            xi=np.concatenate(
                [
                    np.full(s.n_rays, s.spatial.xi(delta_p, delta_q))
                    for _, s, *_ in parts
                ]
            ),
            gamma=np.concatenate([s.gamma for _, s, *_ in parts]),
            alive=np.hstack([s.alive for _, s, *_ in parts]),
            tx_vectors=tx_vectors,
            rx_vectors=rx_vectors,
            proj_tx=(tx_vectors @ v_tx) / dists,
            proj_rx=(rx_vectors @ v_rx) / dists,
            cluster_ids=np.concatenate(
                [np.full(s.n_rays, c, dtype=np.int64) for c, s, *_ in parts]
            ),
            ray_ids=np.concatenate(
                [np.arange(s.n_rays, dtype=np.int64) for _, s, *_ in parts]
            ),
            phases=np.vstack([s.phases for _, s, *_ in parts]),
            kappa=np.concatenate([s.kappa for _, s, *_ in parts]),
        )
        self._tables[key] = table
        return table

    def _present_mask(self, table: _PairTable, presence) -> np.ndarray:
        if presence is None:
            return np.ones(table.tau.size, dtype=bool)
        mask = np.zeros(table.tau.size, dtype=bool)
        for cid in table.cids:
            if presence(cid):
                mask[table.slices[cid]] = True
        return mask

    def powers_matrix(self, q: int, p: int, k: int, presence=None) -> np.ndarray:
        """Normalized (sub-band, ray) power matrix at one element pair.

        ``presence`` optionally filters clusters (used by conditional
        ensembles); normalization runs over the present, alive rays of each
        sub-band.
        """
        table = self._pair_table(q, p, k)
        law = self.scene.power_law
        if presence is None:
            key = (q, p, k)
            cached = self._pre_powers.get(key)
            if cached is None:
                cached = stf_power_profile(
                    table.tau, table.z_db, table.xi, table.gamma,
                    np.ascontiguousarray(table.alive, dtype=np.uint8),
                    self.band.centers, self.band.f_c, law.ds, law.r_tau,
                )
                self._pre_powers[key] = cached
            return cached
        mask = self._present_mask(table, presence)
        if mask.all():
            return self.powers_matrix(q, p, k)
        if not mask.any():
            return np.zeros((self.band.n_sub, table.tau.size))
        base = np.exp(-table.tau * (law.r_tau - 1.0) / (law.r_tau * law.ds))
        base = base * 10.0 ** (-table.z_db / 10.0) * table.xi * mask
        ratio = self.band.centers[:, None] / self.band.f_c
        pre = base[None, :] * ratio ** table.gamma[None, :] * table.alive
        totals = pre.sum(axis=1)
        scale = np.where(totals > 0.0, totals, 1.0)
        return pre / scale[:, None]

    def powers_at(self, q: int, p: int, i: int, k: int, presence=None) -> np.ndarray:
        return self.powers_matrix(q, p, k, presence)[i]

    def los_geometry(self, q: int, p: int, t: float):
        """LOS vector, delay, and Doppler for an element pair at time ``t``."""
        scene = self.scene
        d = scene.los_vector(t) + scene.rx_offset(q) - scene.tx_offset(p)
        dist = float(np.linalg.norm(d))
        return d, dist / SPEED_OF_LIGHT, dist

    def los_doppler(self, q: int, p: int, t: float, f_i: float) -> float:
        d, _, dist = self.los_geometry(q, p, t)
        return float(d @ (self.scene.v_rx - self.scene.v_tx)) / (
            dist * wavelength(f_i)
        )

    def _los_tap(self, q: int, p: int, f_i: float, t: float,
                 theta_los: float | None = None) -> Tap:
        scene = self.scene
        d, _, dist = self.los_geometry(q, p, t)
        if scene.los_phase_mode == "distance_locked":
            theta = (-cl.TWO_PI * dist / wavelength(f_i)) % cl.TWO_PI
        else:
            theta = self.theta_los if theta_los is None else theta_los
        return los_tap(
            d, scene.v_tx, scene.v_rx, theta, f_i, t,
            scene.pattern, scene.pattern,
            scene.tx_array.rotation, scene.rx_array.rotation,
        )

    def taps_at(
        self,
        q: int,
        p: int,
        f: float,
        t: float,
        presence=None,
        phase_map: dict[int, np.ndarray] | None = None,
        theta_los: float | None = None,
    ) -> list[Tap]:
        """Small-scale CIR taps of the sub-band owning ``f`` at snapshot ``t``.

        ``presence``/``phase_map``/``theta_los`` support conditional
        ensembles: they filter clusters and substitute the random phases
        without touching the shared kinematics.
        """
        scene = self.scene
        k = self.snapshot_index(t)
        i = int(self.band.subband_of(f))
        f_i = float(self.band.centers[i])
        table = self._pair_table(q, p, k)
        mask = table.alive[i] & self._present_mask(table, presence)
        powers = self.powers_at(q, p, i, k, presence)
        phases = table.phases
        if phase_map:
            phases = phases.copy()
            for cid, fresh in phase_map.items():
                if cid in table.slices:
                    phases[table.slices[cid]] = fresh
        lam = wavelength(f_i)
        taps: list[Tap] = []
        idx = np.nonzero(mask)[0]
        if idx.size:
            sqrt_p = np.sqrt(powers[idx])
            nu_tx = table.proj_tx[idx] / lam
            nu_rx = table.proj_rx[idx] / lam
            batch = PATTERNS_BATCH.get(scene.pattern_name)
            if batch is not None:
                entries = _tap_entries_batch(
                    scene, batch, table, idx, phases[idx], sqrt_p, nu_tx, nu_rx, t
                )
                delays = table.tau[idx]
                dopplers = nu_tx + nu_rx
                for n, m in enumerate(idx):
                    taps.append(
                        Tap(entries[n], float(delays[n]), float(dopplers[n]),
                            int(table.cluster_ids[m]), int(table.ray_ids[m]))
                    )
            else:
                for n, m in enumerate(idx):
                    taps.append(
                        nlos_tap(
                            table.tx_vectors[m], table.rx_vectors[m],
                            float(sqrt_p[n]), phases[m], float(table.kappa[m]),
                            float(nu_tx[n]), float(nu_rx[n]), t,
                            scene.pattern, scene.pattern,
                            scene.tx_array.rotation, scene.rx_array.rotation,
                            cluster_id=int(table.cluster_ids[m]),
                            ray_id=int(table.ray_ids[m]),
                        )
                    )
        los = (
            self._los_tap(q, p, f_i, t, theta_los)
            if scene.k_factor > 0.0
            else None
        )
        return assemble_cir(los, taps, scene.k_factor)

    def large_scale_gain(self, i: int, k: int) -> float:
        """Composed linear power gain of sub-band ``i`` at snapshot ``k``."""
        f_i = float(self.band.centers[i])
        t = self.snapshots[k].t
        distance = float(np.linalg.norm(self.scene.los_vector(t)))
        shadow = self._subband_shadow.get(i, self.shadow_db)
        return compose_large_scale(
            self.scene.ls_params, distance, f_i,
            shadowing_db_value=shadow, blockage_db_value=self.blockage_db,
        )

    def channel_matrix(self, i: int, k: int):
        """Complete channel matrix of one sub-band/snapshot, lazily indexed."""
        from .cir import LazyChannelMatrix

        f_i = float(self.band.centers[i])
        t = self.snapshots[k].t
        return LazyChannelMatrix(
            self.scene.rx_array.size,
            self.scene.tx_array.size,
            lambda q, p: self.taps_at(q, p, f_i, t),
            amplitude_scale=math.sqrt(self.large_scale_gain(i, k)),
        )


def build_realization(config_or_scene, rng: np.random.Generator) -> Realization:
    scene = (
        config_or_scene
        if isinstance(config_or_scene, Scene)
        else build_scene(config_or_scene)
    )
    return Realization(scene, rng)


class ConditionalVariant:
    """Phase-refreshed sibling of a base realization.

    Shares the base geometry, powers, and frequency-axis ray membership;
    redraws the polarization phases, the direct-path phase, and the cluster
    time-survival chain (no births).  Only clusters born at the first
    snapshot participate.  Intended for ensemble estimates conditioned on a
    fixed cluster set, e.g. the closed-form correlation cross-checks.
    """

    def __init__(self, base: Realization, rng: np.random.Generator):
        self.base = base
        self.band = base.band
        self.scene = base.scene
        self.theta_los = cl.TWO_PI * (1.0 - rng.random())
        self._phases: dict[int, np.ndarray] = {}
        initial = sorted(
            cid for cid, s in base.clusters.items() if s.born_snapshot == 0
        )
        for cid in initial:
            state = base.clusters[cid]
            self._phases[cid] = cl.TWO_PI * (1.0 - rng.random(state.phases.shape))
        self._alive_chain: dict[int, np.ndarray] = {}
        n_k = len(base.snapshots)
        for cid in initial:
            chain = np.ones(n_k, dtype=bool)
            for k in range(1, n_k):
                chain[k] = chain[k - 1] and (
                    rng.random() < base.survival_per_step
                )
            self._alive_chain[cid] = chain

    def _presence(self, k: int):
        return lambda cid: cid in self._alive_chain and bool(
            self._alive_chain[cid][k]
        )

    def taps_at(self, q: int, p: int, f: float, t: float) -> list[Tap]:
        k = self.base.snapshot_index(t)
        return self.base.taps_at(
            q, p, f, t,
            presence=self._presence(k),
            phase_map=self._phases,
            theta_los=self.theta_los,
        )


def conditional_ensemble(
    base: Realization, n_variants: int, rng: np.random.Generator
) -> list[ConditionalVariant]:
    return [ConditionalVariant(base, rng) for _ in range(n_variants)]
