import math

import numpy as np
import pytest

from thzchan.largescale import (
    AbsorptionTable,
    LargeScaleParams,
    compose_large_scale,
    friis_reference_loss_db,
    load_absorption_csv,
    molecular_absorption_db,
    path_loss_db,
    shadowing_db,
)


class TestPathLoss:
    def test_reference_distance_gives_pl0(self):
        params = LargeScaleParams(pl0_db=75.0, gamma=2.0, ref_distance_m=1.0)
        assert path_loss_db(params, 1.0, 300e9) == pytest.approx(75.0)

    def test_decade_adds_ten_gamma(self):
        params = LargeScaleParams(pl0_db=75.0, gamma=2.0, ref_distance_m=1.0)
        assert path_loss_db(params, 10.0, 300e9) == pytest.approx(95.0)

    def test_friis_value_at_300ghz(self):
        assert friis_reference_loss_db(300e9, 1.0) == pytest.approx(82.0, abs=0.05)
        params = LargeScaleParams(pl0_db=None, ref_distance_m=1.0)
        assert path_loss_db(params, 1.0, 300e9) == pytest.approx(82.0, abs=0.05)

    def test_non_positive_distance_rejected(self):
        params = LargeScaleParams(pl0_db=75.0)
        with pytest.raises(ValueError):
            path_loss_db(params, 0.0, 300e9)


class TestShadowing:
    def test_zero_sigma_always_zero(self, rng):
        assert all(shadowing_db(rng, 0.0) == 0.0 for _ in range(100))

    def test_moments(self, rng):
        draws = np.array([shadowing_db(rng, 4.0) for _ in range(100_000)])
        assert abs(draws.mean()) <= 3.0 * 4.0 / math.sqrt(draws.size)
        assert draws.std() == pytest.approx(4.0, rel=0.05)

    def test_negative_sigma_rejected(self, rng):
        with pytest.raises(ValueError):
            shadowing_db(rng, -1.0)


class TestAbsorption:
    def table(self):
        return AbsorptionTable(np.array([300e9, 310e9]), np.array([0.02, 0.06]))

    def test_zero_distance(self):
        params = LargeScaleParams(absorption=self.table())
        assert molecular_absorption_db(params, 305e9, 0.0) == 0.0

    def test_exact_node(self):
        params = LargeScaleParams(absorption=self.table())
        assert molecular_absorption_db(params, 300e9, 2.0) == pytest.approx(0.04)

    def test_midpoint_interpolation(self):
        params = LargeScaleParams(absorption=self.table())
        assert molecular_absorption_db(params, 305e9, 3.0) == pytest.approx(0.12)

    def test_out_of_range_rejected(self):
        params = LargeScaleParams(absorption=self.table())
        with pytest.raises(ValueError):
            molecular_absorption_db(params, 299e9, 1.0)
        with pytest.raises(ValueError):
            molecular_absorption_db(params, 311e9, 1.0)

    def test_csv_round_trip(self, tmp_path):
        path = tmp_path / "absorption.csv"
        path.write_text("frequency_hz,attenuation_db_per_m\n3.0e11,0.02\n3.1e11,0.06\n")
        table = load_absorption_csv(path)
        assert table.db_per_m(305e9) == pytest.approx(0.04)

    def test_csv_header_required(self, tmp_path):
        path = tmp_path / "absorption.csv"
        path.write_text("3.0e11,0.02\n3.1e11,0.06\n")
        with pytest.raises(ValueError, match="header"):
            load_absorption_csv(path)

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError):
            AbsorptionTable(np.array([310e9, 300e9]), np.array([0.1, 0.1]))


class TestCompose:
    def test_unity_when_lossless(self):
        params = LargeScaleParams(pl0_db=0.0, gamma=0.0)
        assert compose_large_scale(params, 5.0, 300e9) == pytest.approx(1.0)

    def test_80db_is_1e_minus_8(self):
        params = LargeScaleParams(pl0_db=80.0, gamma=0.0)
        assert compose_large_scale(params, 5.0, 300e9) == pytest.approx(1e-8)

    def test_monotone_in_distance(self):
        params = LargeScaleParams(
            pl0_db=None, gamma=2.0,
            absorption=AbsorptionTable.flat(0.05),
        )
        distances = np.linspace(0.5, 30.0, 40)
        gains = [compose_large_scale(params, d, 300e9) for d in distances]
        assert all(b <= a for a, b in zip(gains, gains[1:]))

    def test_bounded_for_nonnegative_losses(self, rng):
        for _ in range(50):
            params = LargeScaleParams(
                pl0_db=float(rng.uniform(0.0, 120.0)),
                gamma=float(rng.uniform(0.0, 4.0)),
                blockage_db=float(rng.uniform(0.0, 30.0)),
                absorption=AbsorptionTable.flat(float(rng.uniform(0.0, 1.0))),
            )
            gain = compose_large_scale(params, float(rng.uniform(1.0, 20.0)), 300e9)
            assert 0.0 < gain <= 1.0

    def test_changes_with_subband_frequency(self):
        params = LargeScaleParams(
            pl0_db=None,
            absorption=AbsorptionTable(
                np.array([300e9, 350e9]), np.array([0.0, 0.5])
            ),
        )
        g300 = compose_large_scale(params, 3.0, 300e9)
        g350 = compose_large_scale(params, 3.0, 350e9)
        assert g350 < g300
