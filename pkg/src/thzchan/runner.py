"""Experiment orchestration: seeded realization sweeps, the estimator
drivers behind the statistics report, and the fitting harness entry points.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import stats
from .clusters import generate_cluster_set
from .config import SimulationConfig, config_to_dict, save_config
from .exporters import StatisticsReport, StatsTable, cdf_table, export_cir, export_stats
from .fitting import ReferenceCdf
from .simulate import Realization, build_scene
from .stats import (
    delay_psd,
    rms_delay_spread,
    stationary_region,
    stationary_region_from_powers,
    transfer_function,
)


def realization_rng(master_seed: int, index: int) -> np.random.Generator:
    """Stream of realization ``index``: spawned as SeedSequence([seed, index])."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, index]))


def _anchor_info(band, anchors_hz):
    """(anchor frequency, sub-band index, scan direction) per anchor.

    Anchors in the lower half of the band scan upward, upper-half anchors
    scan downward, so edge anchors always have lags available.
    """
    out = []
    for f in anchors_hz:
        i = int(band.subband_of(f))
        direction = 1 if i < band.n_sub / 2 else -1
        out.append((float(f), i, direction))
    return out


@dataclass
class _Partial:
    """Per-realization estimator contributions (picklable)."""

    h_acf: dict = field(default_factory=dict)
    h_fcf: dict = field(default_factory=dict)
    h_sccf: dict = field(default_factory=dict)
    stationary_bandwidth: dict = field(default_factory=dict)
    stationary_interval: list = field(default_factory=list)
    stationary_distance: list = field(default_factory=list)
    delay_spread: list = field(default_factory=list)
    angle_spread: list = field(default_factory=list)


def _default_anchors(config: SimulationConfig) -> tuple[float, ...]:
    if config.stats.anchors_hz:
        return config.stats.anchors_hz
    band = config.band_plan()
    return (float(band.centers[0]),)


def _collect_partial(config: SimulationConfig, realization: Realization) -> _Partial:
    scene = realization.scene
    band = realization.band
    c_th = config.stats.c_th
    bin_s = config.stats.delay_bin_s
    anchors = _anchor_info(band, _default_anchors(config))
    times = [snap.t for snap in realization.snapshots]
    partial = _Partial()
    estimators = set(config.stats.estimators)

    if "stationary_bandwidth" in estimators:
        fast = scene.pattern_name == "isotropic" and scene.k_factor == 0.0
        if fast:
            powers = realization.powers_matrix(1, 1, 0)
            for f, i, direction in anchors:
                partial.stationary_bandwidth.setdefault(f, []).append(
                    stationary_region_from_powers(powers, band.b_sub, c_th, i, direction)
                )
        else:
            psds = [
                delay_psd(realization.taps_at(1, 1, float(band.centers[i]), times[0]))
                for i in range(band.n_sub)
            ]
            for f, i, direction in anchors:
                partial.stationary_bandwidth.setdefault(f, []).append(
                    stationary_region(psds, band.b_sub, c_th, i, direction, bin_s)
                )

    if "acf" in estimators:
        for f, i, _ in anchors:
            values = [
                complex(transfer_function(realization.taps_at(1, 1, f, t), f)[0])
                for t in times
            ]
            partial.h_acf[f] = np.array(values)

    if "fcf" in estimators:
        for f, i, direction in anchors:
            row = [
                complex(
                    transfer_function(
                        realization.taps_at(1, 1, float(band.centers[j]), times[0]),
                        float(band.centers[j]),
                    )[0]
                )
                for j in range(band.n_sub)
            ]
            partial.h_fcf[f] = np.array(row)

    if "sccf" in estimators:
        max_off = min(config.stats.max_element_offset, scene.tx_array.m_v - 1)
        f0 = anchors[0][0]
        row = [
            complex(
                transfer_function(
                    realization.taps_at(1, 1 + dp, f0, times[0]), f0
                )[0]
            )
            for dp in range(max_off + 1)
        ]
        partial.h_sccf[f0] = np.array(row)

    if "delay_spread" in estimators:
        f0 = anchors[0][0]
        psd = delay_psd(realization.taps_at(1, 1, f0, times[0]))
        if psd.total_power > 0.0:
            partial.delay_spread.append(rms_delay_spread(psd))

    if "angle_spread" in estimators:
        f0, i0, _ = anchors[0]
        table = realization._pair_table(1, 1, 0)
        powers = realization.powers_at(1, 1, i0, 0)
        for cid in table.cids:
            rays = table.slices[cid]
            alive = table.alive[i0, rays]
            if not np.any(alive):
                continue
            offsets = realization.clusters[cid].offsets[alive, 2]
            partial.angle_spread.append(
                stats.cluster_angle_spread(offsets, powers[rays][alive])
            )

    if "stationary_interval" in estimators and len(times) > 1:
        f0 = anchors[0][0]
        psds = [delay_psd(realization.taps_at(1, 1, f0, t)) for t in times]
        partial.stationary_interval.append(
            stationary_region(psds, scene.delta_t, c_th, 0, 1, bin_s)
        )

    if "stationary_distance" in estimators and scene.tx_array.m_v > 1:
        f0 = anchors[0][0]
        n_el = min(config.stats.max_element_offset + 1, scene.tx_array.m_v)
        psds = [
            delay_psd(realization.taps_at(1, 1 + dp, f0, times[0]))
            for dp in range(n_el)
        ]
        partial.stationary_distance.append(
            stationary_region(psds, scene.tx_array.delta_v, c_th, 0, 1, bin_s)
        )

    return partial


def _worker(args):
    config_dict, master_seed, index = args
    from .config import config_from_dict

    config = config_from_dict(config_dict)
    scene = build_scene(config)
    realization = Realization(scene, realization_rng(master_seed, index))
    return _collect_partial(config, realization)


def _normalized_corr(h_ref: np.ndarray, h_other: np.ndarray) -> complex:
    cross = np.mean(h_ref * np.conj(h_other))
    norm = math.sqrt(
        float(np.mean(np.abs(h_ref) ** 2) * np.mean(np.abs(h_other) ** 2))
    )
    return complex(cross / norm) if norm > 0.0 else 0.0j


@dataclass
class RunResult:
    report: StatisticsReport
    files: list[Path]
    realizations: int


def _build_report(config: SimulationConfig, partials: list[_Partial]) -> StatisticsReport:
    report = StatisticsReport()
    band = config.band_plan()
    estimators = set(config.stats.estimators)
    times = [k * config.snapshots.delta_t_s for k in range(config.snapshots.count)]

    if "acf" in estimators:
        rows = []
        anchors = sorted({f for p in partials for f in p.h_acf})
        for f in anchors:
            h = np.vstack([p.h_acf[f] for p in partials])
            for k, t in enumerate(times):
                value = _normalized_corr(h[:, 0], h[:, k])
                rows.append([f, t, value.real, value.imag, abs(value)])
        report.add(StatsTable("acf", ["anchor_hz", "delta_t_s", "re", "im", "abs"], rows))

    if "fcf" in estimators:
        rows = []
        anchors = sorted({f for p in partials for f in p.h_fcf})
        for f in anchors:
            h = np.vstack([p.h_fcf[f] for p in partials])
            i0 = int(band.subband_of(f))
            for j in range(band.n_sub):
                value = _normalized_corr(h[:, i0], h[:, j])
                delta_f = float(band.centers[j] - band.centers[i0])
                rows.append([f, delta_f, value.real, value.imag, abs(value)])
        report.add(StatsTable("fcf", ["anchor_hz", "delta_f_hz", "re", "im", "abs"], rows))

    if "sccf" in estimators:
        rows = []
        anchors = sorted({f for p in partials for f in p.h_sccf})
        for f in anchors:
            h = np.vstack([p.h_sccf[f] for p in partials])
            for dp in range(h.shape[1]):
                value = _normalized_corr(h[:, 0], h[:, dp])
                rows.append([f, dp, 0, value.real, value.imag, abs(value)])
        report.add(
            StatsTable(
                "sccf",
                ["anchor_hz", "delta_p", "delta_q", "re", "im", "abs"],
                rows,
            )
        )

    if "stationary_bandwidth" in estimators:
        anchors: dict[float, list] = {}
        for partial in partials:
            for f, samples in partial.stationary_bandwidth.items():
                anchors.setdefault(f, []).extend(samples)
        for f, samples in sorted(anchors.items()):
            name = f"stationary_bandwidth_cdf_{int(round(f / 1e9))}ghz"
            report.add(cdf_table(name, samples, "bandwidth_hz"))

    for attr, name, column in (
        ("stationary_interval", "stationary_interval_cdf", "interval_s"),
        ("stationary_distance", "stationary_distance_cdf", "distance_m"),
        ("delay_spread", "delay_spread_cdf", "delay_spread_s"),
        ("angle_spread", "angle_spread_cdf", "angle_spread_rad"),
    ):
        if attr in estimators:
            samples = [s for p in partials for s in getattr(p, attr)]
            if samples:
                report.add(cdf_table(name, samples, column))

    return report


def run(
    config: SimulationConfig,
    out_dir,
    seed: int | None = None,
    realizations: int | None = None,
    threads: int = 1,
) -> RunResult:
    """Generate the configured realizations, estimate the requested
    statistics, and write the output files.

    Identical (config, seed) pairs produce bit-identical outputs; threading
    only distributes realizations, whose streams are index-seeded.
    """
    master_seed = config.seed if seed is None else seed
    n_real = config.realizations if realizations is None else realizations
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_config(config, out / "config.yaml")
    if n_real == 0:
        warnings.warn("realization count is 0; no statistics produced")
        return RunResult(StatisticsReport(), [out / "config.yaml"], 0)
    jobs = [(config_to_dict(config), master_seed, r) for r in range(n_real)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(_worker, jobs))
    else:
        partials = [_worker(job) for job in jobs]
    report = _build_report(config, partials)
    files = export_stats(report, out)
    files.append(out / "config.yaml")
    if config.export.cir:
        scene = build_scene(config)
        realization = Realization(scene, realization_rng(master_seed, 0))
        suffix = "bin" if config.export.cir_format == "bin" else "csv"
        cir_path = out / f"cir_realization0.{suffix}"
        export_cir(realization, cir_path, config.export.cir_format)
        files.append(cir_path)
    return RunResult(report, files, n_real)


_SIGMA_FIELDS = {
    "sigma_az_tx": "sigma_az_tx_rad",
    "sigma_el_tx": "sigma_el_tx_rad",
    "sigma_az_rx": "sigma_az_rx_rad",
    "sigma_el_rx": "sigma_el_rx_rad",
}
_OFFSET_COLUMN = {
    "sigma_az_tx": 0,
    "sigma_el_tx": 1,
    "sigma_az_rx": 2,
    "sigma_el_rx": 3,
}


def relative_angle_closure(config: SimulationConfig, parameter: str, n_clusters: int = 200):
    """Simulator closure for fitting one intra-cluster angle sigma.

    Produces the CDF of the signed intra-cluster angular offsets pooled over
    freshly generated clusters, with the chosen sigma overridden.
    """
    if parameter not in _SIGMA_FIELDS:
        raise ValueError(f"unknown fit parameter '{parameter}'")
    column = _OFFSET_COLUMN[parameter]
    base_law = config.cluster_law()

    def closure(value_rad: float, rng: np.random.Generator, n_realizations: int):
        from dataclasses import replace

        law = replace(base_law, **{parameter: value_rad})
        samples = []
        for _ in range(max(1, n_realizations)):
            cluster_set = generate_cluster_set(
                rng, law, config.link.distance_m, n_clusters
            )
            for cluster in cluster_set.clusters:
                samples.extend(ray.offsets[column] for ray in cluster.rays)
        return ReferenceCdf.from_samples(samples)

    return closure
