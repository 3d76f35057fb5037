import math

import numpy as np
import pytest

from thzchan.geometry import (
    ArrayGeometry,
    MotionState,
    PanelOrientation,
    element_position,
    element_positions,
    gcs_to_lcs,
    gcs_to_lcs_batch,
    lcs_to_gcs,
    rayleigh_distance,
    subarray_partition,
    velocity_vector,
    wavelength,
    wrap_azimuth,
)


def _polar(az, el):
    return np.array(
        [math.sin(az) * math.cos(el), math.sin(az) * math.sin(el), math.cos(az)]
    )


class TestElementPosition:
    def test_reference_element_at_origin(self):
        arr = ArrayGeometry(m_v=4, m_h=4, delta_v=5e-4, delta_h=5e-4)
        assert np.all(element_position(arr, 1) == 0.0)

    def test_second_element_along_column_axis(self):
        arr = ArrayGeometry(m_v=4, m_h=1, delta_v=5e-4, delta_h=0.0)
        np.testing.assert_allclose(
            element_position(arr, 2), [5e-4, 0.0, 0.0], atol=1e-18
        )

    def test_row_step_with_vertical_row_axis(self):
        orientation = PanelOrientation(beta_h_e=math.pi / 2)
        arr = ArrayGeometry(m_v=4, m_h=2, delta_v=5e-4, delta_h=5e-4,
                            orientation=orientation)
        np.testing.assert_allclose(
            element_position(arr, 5), [0.0, 0.0, 5e-4], atol=1e-18
        )

    def test_additive_in_row_and_column(self):
        orientation = PanelOrientation(beta_v_e=0.2, beta_v_a=0.5,
                                       beta_h_e=-0.1, beta_h_a=1.3)
        arr = ArrayGeometry(m_v=3, m_h=5, delta_v=3e-4, delta_h=7e-4,
                            orientation=orientation)
        h_vec = arr.delta_h * orientation.row_direction()
        v_vec = arr.delta_v * orientation.column_direction()
        for p in range(1, arr.size + 1):
            p_h, p_v = arr.row_col(p)
            np.testing.assert_array_equal(
                element_position(arr, p), (p_h - 1) * h_vec + (p_v - 1) * v_vec
            )

    def test_positions_table_matches_single_lookup(self):
        arr = ArrayGeometry(m_v=3, m_h=2, delta_v=3e-4, delta_h=7e-4)
        table = element_positions(arr)
        for p in range(1, arr.size + 1):
            np.testing.assert_array_equal(table[p - 1], element_position(arr, p))

    def test_out_of_range_index(self):
        arr = ArrayGeometry(m_v=2, m_h=2, delta_v=5e-4, delta_h=5e-4)
        with pytest.raises(IndexError):
            element_position(arr, 5)
        with pytest.raises(IndexError):
            element_position(arr, 0)

    def test_explicit_offsets(self):
        offsets = np.array([[0, 0, 0], [1e-3, 2e-3, 0.0]])
        arr = ArrayGeometry(m_v=2, m_h=1, delta_v=5e-4, element_offsets=offsets)
        np.testing.assert_array_equal(element_position(arr, 2), offsets[1])
        with pytest.raises(ValueError):
            ArrayGeometry(m_v=2, m_h=1, delta_v=5e-4,
                          element_offsets=np.ones((2, 3)))


class TestFrameTransform:
    def test_identity_rotation_keeps_angles(self):
        for az, el in [(0.3, 0.1), (2.0, -0.8), (1.2, 2.5)]:
            local_az, local_el = gcs_to_lcs((az, el), (0.0, 0.0, 0.0))
            assert local_az == pytest.approx(az, abs=1e-12)
            assert local_el == pytest.approx(wrap_azimuth(el), abs=1e-12)

    def test_first_axis_rotation_shifts_elevation(self):
        az, el, gx = 0.9, 0.4, 0.25
        local_az, local_el = gcs_to_lcs((az, el), (gx, 0.0, 0.0))
        assert local_az == pytest.approx(az, abs=1e-12)
        assert local_el == pytest.approx(el - gx, abs=1e-12)

    def test_round_trip_recovers_direction(self, rng):
        for _ in range(200):
            az = rng.uniform(0.0, math.pi)
            el = rng.uniform(-math.pi, math.pi)
            rot = tuple(rng.uniform(-math.pi, math.pi, 3))
            back = lcs_to_gcs(gcs_to_lcs((az, el), rot), rot)
            np.testing.assert_allclose(_polar(*back), _polar(az, el), atol=1e-12)

    def test_unit_norm_preserved(self, rng):
        for _ in range(50):
            az = rng.uniform(0.0, math.pi)
            el = rng.uniform(-math.pi, math.pi)
            rot = tuple(rng.uniform(-math.pi, math.pi, 3))
            local = gcs_to_lcs((az, el), rot)
            assert np.linalg.norm(_polar(*local)) == pytest.approx(1.0, abs=1e-12)

    def test_batch_matches_scalar(self, rng):
        az = rng.uniform(0.0, math.pi, 64)
        el = rng.uniform(-math.pi, math.pi, 64)
        rot = (0.4, -0.8, 1.1)
        b_az, b_el = gcs_to_lcs_batch(az, el, rot)
        for i in range(az.size):
            s_az, s_el = gcs_to_lcs((az[i], el[i]), rot)
            assert b_az[i] == pytest.approx(s_az, abs=1e-12)
            assert b_el[i] == pytest.approx(s_el, abs=1e-12)


class TestVelocity:
    def test_zero_speed(self):
        assert np.all(velocity_vector(MotionState()) == 0.0)

    def test_published_indoor_speed_split(self):
        v = velocity_vector(MotionState(0.6, 0.0, math.pi / 3))
        np.testing.assert_allclose(v, [0.3, 0.5196, 0.0], atol=1e-4)

    def test_vertical_motion(self):
        v = velocity_vector(MotionState(2.0, math.pi / 2, 0.0))
        np.testing.assert_allclose(v, [0.0, 0.0, 2.0], atol=1e-12)

    def test_negative_speed_rejected(self):
        with pytest.raises(ValueError):
            MotionState(speed=-1.0)


class TestWavelength:
    def test_reference_values(self):
        assert wavelength(300e9) == pytest.approx(0.999308e-3, abs=1e-9)
        assert wavelength(350e9) == pytest.approx(0.856550e-3, abs=1e-9)

    def test_monotone(self):
        assert wavelength(300e9) > wavelength(350e9)

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            wavelength(0.0)
        with pytest.raises(ValueError):
            wavelength(-1e9)


class TestSubarrayPartition:
    def _half_wave_array(self, n, f):
        delta = wavelength(f) / 2.0
        return ArrayGeometry(m_v=n, m_h=n, delta_v=delta, delta_h=delta)

    def test_60x60_block_accepted_at_4m(self):
        f = 300e9
        arr = self._half_wave_array(60, f)
        blocks = subarray_partition(arr, f, 4.0)
        assert len(blocks) == 1
        aperture = blocks[0].aperture(arr)
        assert aperture <= 30.1e-3
        assert rayleigh_distance(aperture, f) <= 4.0

    def test_infinite_distance_single_block(self):
        arr = self._half_wave_array(100, 300e9)
        blocks = subarray_partition(arr, 300e9, math.inf)
        assert len(blocks) == 1
        assert blocks[0].elements(arr)[0] == 1
        assert len(blocks[0].elements(arr)) == arr.size

    def test_single_element_array(self):
        arr = ArrayGeometry(m_v=1, m_h=1)
        blocks = subarray_partition(arr, 300e9, 0.5)
        assert len(blocks) == 1

    def test_blocks_disjoint_cover_and_satisfy_bound(self, rng):
        f = 325e9
        for _ in range(10):
            n_v = int(rng.integers(1, 40))
            n_h = int(rng.integers(1, 40))
            min_dist = float(rng.uniform(0.005, 2.0))
            arr = ArrayGeometry(m_v=n_v, m_h=n_h, delta_v=4.6e-4, delta_h=4.6e-4)
            blocks = subarray_partition(arr, f, min_dist)
            seen = []
            for block in blocks:
                members = block.elements(arr)
                seen.extend(members)
                assert rayleigh_distance(block.aperture(arr), f) <= min_dist
            assert sorted(seen) == list(range(1, arr.size + 1))

    def test_explicit_offset_arrays_use_unit_blocks(self):
        offsets = np.zeros((4, 3))
        offsets[1:, 0] = [0.001, 0.002, 0.003]
        arr = ArrayGeometry(m_v=2, m_h=2, delta_v=5e-4, delta_h=5e-4,
                            element_offsets=offsets)
        blocks = subarray_partition(arr, 300e9, 1.0)
        assert len(blocks) == 4


class TestWrapAzimuth:
    def test_range(self):
        values = wrap_azimuth(np.linspace(-10.0, 10.0, 101))
        assert np.all(values > -math.pi)
        assert np.all(values <= math.pi)

    def test_negative_pi_maps_to_pi(self):
        assert wrap_azimuth(-math.pi) == pytest.approx(math.pi)
        assert wrap_azimuth(math.pi) == pytest.approx(math.pi)
