import hashlib

import numpy as np
import pytest

from thzchan.cir import Tap
from thzchan.exporters import (
    StatisticsReport,
    StatsTable,
    cdf_table,
    export_cir,
    export_stats,
    read_cir_tensor,
    write_cir_tensor,
)
from thzchan.runner import realization_rng
from thzchan.simulate import Realization, build_scene


def _random_taps(rng, count):
    taps = []
    for m in range(count):
        matrix = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        taps.append(
            Tap(matrix, float(rng.uniform(1e-9, 5e-8)),
                float(rng.normal(0.0, 500.0)), int(rng.integers(0, 9)), m)
        )
    return taps


class TestBinaryTensor:
    def test_round_trip_bit_exact(self, tmp_path, rng):
        dims = (2, 3, 2, 2)
        cells = {}

        def taps_fn(q, p, i, k):
            key = (q, p, i, k)
            if key not in cells:
                cells[key] = _random_taps(rng, int(rng.integers(0, 5)))
            return cells[key]

        path = tmp_path / "tensor.bin"
        write_cir_tensor(path, dims, taps_fn)
        tensor = read_cir_tensor(path)
        assert tensor.dims == dims
        for key, taps in cells.items():
            loaded = tensor.taps(*key)
            assert len(loaded) == len(taps)
            for a, b in zip(taps, loaded):
                np.testing.assert_array_equal(a.matrix, b.matrix)
                assert a.delay == b.delay
                assert a.doppler == b.doppler
                assert a.cluster_id == b.cluster_id
                assert a.ray_id == b.ray_id

    def test_header_dims_match_arrays(self, tmp_path, small_config):
        scene = build_scene(small_config)
        realization = Realization(scene, realization_rng(5, 0))
        path = tmp_path / "cir.bin"
        export_cir(realization, path, "bin")
        tensor = read_cir_tensor(path)
        assert tensor.dims == (4, 16, 10, 3)

    def test_header_only_file_reads_empty(self, tmp_path):
        path = tmp_path / "empty.bin"
        write_cir_tensor(path, (0, 0, 0, 0), lambda q, p, i, k: [])
        tensor = read_cir_tensor(path)
        assert tensor.dims == (0, 0, 0, 0)
        assert tensor.cells == {}

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"NOPE" + b"\x00" * 24)
        with pytest.raises(ValueError, match="magic"):
            read_cir_tensor(path)

    def test_csv_export(self, tmp_path, small_config):
        scene = build_scene(small_config)
        realization = Realization(scene, realization_rng(5, 0))
        path = tmp_path / "cir.csv"
        export_cir(realization, path, "csv")
        lines = path.read_text().splitlines()
        assert lines[0].startswith("rx_element,tx_element,subband")
        assert len(lines) > 1


class TestStatsExport:
    def test_tables_written_with_headers(self, tmp_path):
        report = StatisticsReport()
        report.add(StatsTable("acf", ["delta_t_s", "abs"], [[0.0, 1.0], [0.1, 0.4]]))
        report.add(cdf_table("delay_spread_cdf", [2e-9, 1e-9, 3e-9], "delay_spread_s"))
        files = export_stats(report, tmp_path)
        assert sorted(f.name for f in files) == ["acf.csv", "delay_spread_cdf.csv"]
        acf_lines = (tmp_path / "acf.csv").read_text().splitlines()
        assert acf_lines[0] == "delta_t_s,abs"
        assert float(acf_lines[1].split(",")[1]) == 1.0
        cdf_lines = (tmp_path / "delay_spread_cdf.csv").read_text().splitlines()
        assert float(cdf_lines[-1].split(",")[1]) == 1.0

    def test_rewrites_identically(self, tmp_path):
        report = StatisticsReport()
        report.add(cdf_table("angle_spread_cdf", [0.1, 0.2, 0.3], "angle_spread_rad"))
        export_stats(report, tmp_path / "a")
        export_stats(report, tmp_path / "b")
        h1 = hashlib.sha256((tmp_path / "a" / "angle_spread_cdf.csv").read_bytes())
        h2 = hashlib.sha256((tmp_path / "b" / "angle_spread_cdf.csv").read_bytes())
        assert h1.hexdigest() == h2.hexdigest()
