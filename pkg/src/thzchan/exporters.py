"""File exchange: the binary CIR tensor format, CSV tap lists, and the
plot-ready statistics tables.

Binary tensor layout (all little-endian):

* header: magic ``b"STFG"``, version ``u32`` (currently 1), dims ``u32 x 4``
  as (rx elements, tx elements, sub-bands, snapshots), record size ``u32``
  in bytes.
* body: for each cell in row-major (rx, tx, sub-band, snapshot) order, a
  ``u32`` tap count followed by that many records.
* record (88 bytes): cluster ``u32`` (``0xFFFFFFFF`` marks the direct path),
  ray ``u32``, delay ``f64`` seconds, Doppler ``f64`` Hz, then the four
  complex ``f64`` polarization entries in row-major (vv, vh, hv, hh) order.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cir import Tap

MAGIC = b"STFG"
VERSION = 1
_RECORD = struct.Struct("<IIdd" + "dd" * 4)
_HEADER = struct.Struct("<4sIIIIII")


def _cells(m_rx: int, m_tx: int, n_sub: int, n_t: int):
    for q in range(1, m_rx + 1):
        for p in range(1, m_tx + 1):
            for i in range(n_sub):
                for k in range(n_t):
                    yield q, p, i, k


def write_cir_tensor(path, dims: tuple[int, int, int, int], taps_fn) -> None:
    """Write the full tap tensor; ``taps_fn(q, p, i, k)`` yields the taps of
    one cell."""
    m_rx, m_tx, n_sub, n_t = dims
    with open(path, "wb") as handle:
        handle.write(
            _HEADER.pack(MAGIC, VERSION, m_rx, m_tx, n_sub, n_t, _RECORD.size)
        )
        for q, p, i, k in _cells(*dims):
            taps = taps_fn(q, p, i, k)
            handle.write(struct.pack("<I", len(taps)))
            for tap in taps:
                m = np.asarray(tap.matrix, dtype=np.complex128)
                handle.write(
                    _RECORD.pack(
                        tap.cluster_id & 0xFFFFFFFF,
                        tap.ray_id,
                        tap.delay,
                        tap.doppler,
                        m[0, 0].real, m[0, 0].imag,
                        m[0, 1].real, m[0, 1].imag,
                        m[1, 0].real, m[1, 0].imag,
                        m[1, 1].real, m[1, 1].imag,
                    )
                )


@dataclass
class CirTensor:
    dims: tuple[int, int, int, int]
    cells: dict[tuple[int, int, int, int], list[Tap]] = field(default_factory=dict)

    def taps(self, q: int, p: int, i: int, k: int) -> list[Tap]:
        return self.cells.get((q, p, i, k), [])


def read_cir_tensor(path) -> CirTensor:
    with open(path, "rb") as handle:
        header = handle.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, m_rx, m_tx, n_sub, n_t, rec_size = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        if rec_size != _RECORD.size:
            raise ValueError(f"{path}: unexpected record size {rec_size}")
        tensor = CirTensor(dims=(m_rx, m_tx, n_sub, n_t))
        for cell in _cells(m_rx, m_tx, n_sub, n_t):
            raw = handle.read(4)
            if len(raw) < 4:
                if cell == (1, 1, 0, 0):
                    return tensor  # header-only file
                raise ValueError(f"{path}: truncated at cell {cell}")
            (count,) = struct.unpack("<I", raw)
            taps = []
            for _ in range(count):
                rec = _RECORD.unpack(handle.read(_RECORD.size))
                cluster, ray, delay, doppler = rec[:4]
                entries = rec[4:]
                matrix = np.array(
                    [
                        [entries[0] + 1j * entries[1], entries[2] + 1j * entries[3]],
                        [entries[4] + 1j * entries[5], entries[6] + 1j * entries[7]],
                    ]
                )
                taps.append(Tap(matrix, delay, doppler, cluster, ray))
            if taps:
                tensor.cells[cell] = taps
    return tensor


def export_cir(realization, path, fmt: str = "bin") -> None:
    """Export every (element pair, sub-band, snapshot) cell of a realization,
    taps scaled by the per-sub-band large-scale amplitude."""
    scene = realization.scene
    dims = (
        scene.rx_array.size,
        scene.tx_array.size,
        scene.band.n_sub,
        len(realization.snapshots),
    )
    centers = realization.band.centers
    times = [snap.t for snap in realization.snapshots]
    scales = {
        (i, k): float(np.sqrt(realization.large_scale_gain(i, k)))
        for i in range(dims[2])
        for k in range(dims[3])
    }

    def taps_fn(q, p, i, k):
        taps = realization.taps_at(q, p, float(centers[i]), times[k])
        return [tap.scaled(scales[(i, k)]) for tap in taps]

    if fmt == "bin":
        write_cir_tensor(path, dims, taps_fn)
    elif fmt == "csv":
        write_cir_csv(path, dims, taps_fn)
    else:
        raise ValueError(f"unknown CIR format '{fmt}'")


def write_cir_csv(path, dims, taps_fn) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            [
                "rx_element", "tx_element", "subband", "snapshot",
                "cluster", "ray", "delay_s", "doppler_hz",
                "vv_re", "vv_im", "vh_re", "vh_im",
                "hv_re", "hv_im", "hh_re", "hh_im",
            ]
        )
        for q, p, i, k in _cells(*dims):
            for tap in taps_fn(q, p, i, k):
                m = np.asarray(tap.matrix)
                writer.writerow(
                    [q, p, i, k, tap.cluster_id, tap.ray_id,
                     repr(tap.delay), repr(tap.doppler)]
                    + [repr(float(v)) for entry in m.ravel()
                       for v in (entry.real, entry.imag)]
                )


@dataclass
class StatsTable:
    """One plot-ready table: column names plus rows of plain values."""

    name: str
    columns: list[str]
    rows: list[list]


@dataclass
class StatisticsReport:
    tables: list[StatsTable] = field(default_factory=list)

    def add(self, table: StatsTable) -> None:
        self.tables.append(table)


def export_stats(report: StatisticsReport, out_dir) -> list[Path]:
    """Write one CSV per table; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for table in report.tables:
        path = out / f"{table.name}.csv"
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow(
                    [repr(v) if isinstance(v, float) else v for v in row]
                )
        written.append(path)
    return written


def cdf_table(name: str, samples, value_column: str) -> StatsTable:
    """Empirical CDF rows (value, cumulative probability), ending at 1.0."""
    values = np.sort(np.asarray(samples, dtype=np.float64))
    rows = [
        [float(v), (i + 1) / values.size] for i, v in enumerate(values)
    ]
    return StatsTable(name, [value_column, "cdf"], rows)
