import math

import numpy as np
import pytest

from thzchan.errors import DegenerateChannelError
from thzchan.evolution import (
    BirthDeathParams,
    MirrorState,
    PowerLaw,
    displacement,
    doppler_nlos,
    draw_spatial_lognormal,
    evolve_space_time,
    expected_new_clusters,
    expected_new_rays,
    frequency_survival,
    joint_survival,
    normalize_powers,
    power_profile,
    ray_power,
    survival_probability_side,
)
from thzchan.geometry import MotionState


PARAMS = BirthDeathParams(lambda_g=0.8, lambda_r=0.04, d_c_a=10.0, d_c_s=30.0,
                          b_c_f=10e9, rho_s=1.0)


class TestSurvival:
    def test_no_step_no_death(self):
        assert survival_probability_side(PARAMS, 0.0, 0.0, 0.1, 0.2, 0.3, 1.0) == 1.0

    def test_time_only_value(self):
        # speed * dt / d_c_s = 0.3
        p = survival_probability_side(PARAMS, 1.0, 0.0, 0.0, 0.0, 0.0, 9.0)
        assert p == pytest.approx(math.exp(-0.012), abs=1e-6)

    def test_coaligned_motion_cancels_array_step(self):
        # eps1 == eps2 and matching azimuths: the bracket vanishes
        delta = 3.0  # eps1 = 0.3
        p = survival_probability_side(PARAMS, 1.0, delta, 0.0, 0.7, 0.7, 9.0)
        assert p == pytest.approx(1.0, abs=1e-12)

    def test_monotone_in_lags(self):
        probs_t = [
            survival_probability_side(PARAMS, dt, 0.0, 0.0, 0.0, 0.0, 1.0)
            for dt in np.linspace(0.0, 5.0, 20)
        ]
        assert all(b <= a for a, b in zip(probs_t, probs_t[1:]))
        probs_d = [
            survival_probability_side(PARAMS, 0.0, d, 0.0, 0.0, 0.0, 1.0)
            for d in np.linspace(0.0, 5.0, 20)
        ]
        assert all(b <= a for a, b in zip(probs_d, probs_d[1:]))

    def test_joint(self):
        assert joint_survival(1.0, 1.0) == 1.0
        assert joint_survival(0.9, 0.8) == pytest.approx(0.72)
        assert joint_survival(0.5, 0.0) == 0.0
        with pytest.raises(ValueError):
            joint_survival(1.2, 0.5)


class TestBirths:
    def test_no_births_when_everything_survives(self):
        assert expected_new_clusters(PARAMS, 1.0) == 0.0

    def test_published_rates_give_two(self):
        assert expected_new_clusters(PARAMS, 0.9) == pytest.approx(2.0)

    def test_mean_count_is_rate_ratio(self):
        assert PARAMS.mean_cluster_count == pytest.approx(20.0)


class TestFrequencySurvival:
    def test_zero_bandwidth(self):
        assert frequency_survival(PARAMS, 0.0) == 1.0

    def test_doubling_rho_squares(self):
        p1 = frequency_survival(PARAMS, 1e9)
        p2 = frequency_survival(
            BirthDeathParams(lambda_g=0.8, lambda_r=0.04, d_c_a=10.0,
                             d_c_s=30.0, b_c_f=10e9, rho_s=2.0),
            1e9,
        )
        assert p2 == pytest.approx(p1**2, rel=1e-12)

    def test_expected_new_rays_formula(self):
        p = frequency_survival(PARAMS, 5e9)
        assert expected_new_rays(PARAMS, p) == pytest.approx(20.0 * (1.0 - p))


def _random_state(rng, n=1):
    directions_t = rng.normal(size=(n, 3))
    directions_t /= np.linalg.norm(directions_t, axis=1)[:, None]
    directions_r = rng.normal(size=(n, 3))
    directions_r /= np.linalg.norm(directions_r, axis=1)[:, None]
    d = rng.uniform(2.0, 20.0, n)
    return MirrorState(directions_t * d[:, None], directions_r * d[:, None])


class TestMirrorEvolution:
    def test_static_scene_is_fixed_point(self, rng):
        state = _random_state(rng, 20)
        new, dist = evolve_space_time(state, np.zeros(3), np.zeros(3))
        np.testing.assert_allclose(new.tx_vectors, state.tx_vectors, atol=1e-12)
        np.testing.assert_allclose(new.rx_vectors, state.rx_vectors, atol=1e-12)
        np.testing.assert_allclose(dist, state.distances, atol=1e-12)

    def test_receding_rx_shortens_by_projection(self, rng):
        state = _random_state(rng, 1)
        d0 = float(state.distances[0])
        unit_r = state.rx_vectors[0] / d0
        step = 1e-5 * d0
        new, dist = evolve_space_time(state, np.zeros(3), unit_r * step)
        assert dist[0] - d0 == pytest.approx(-step, rel=1e-4)

    def test_norms_stay_consistent(self, rng):
        state = _random_state(rng, 50)
        new, dist = evolve_space_time(
            state, np.array([1e-3, -2e-3, 0.0]), np.array([0.0, 1e-3, 2e-3])
        )
        np.testing.assert_allclose(
            np.linalg.norm(new.tx_vectors, axis=1), dist, rtol=1e-9
        )
        np.testing.assert_allclose(
            np.linalg.norm(new.rx_vectors, axis=1), dist, rtol=1e-9
        )

    def test_mismatched_norms_rejected(self):
        with pytest.raises(ValueError):
            MirrorState(np.array([[1.0, 0, 0]]), np.array([[2.0, 0, 0]]))

    def test_displacement_combines_offset_and_motion(self):
        motion = MotionState(2.0, 0.0, 0.0)
        disp = displacement(np.array([0.1, 0.0, 0.0]), motion, 0.5)
        np.testing.assert_allclose(disp, [1.1, 0.0, 0.0])


class TestDoppler:
    def test_perpendicular_motion_zero(self):
        tx = np.array([[5.0, 0.0, 0.0]])
        rx = np.array([[0.0, 5.0, 0.0]])
        nu_t, nu_r = doppler_nlos(tx, rx, MotionState(), MotionState(3.0, 0.0, 0.0), 300e9)
        assert nu_t[0] == 0.0
        assert nu_r[0] == pytest.approx(0.0, abs=1e-9)

    def test_parallel_motion_value(self):
        rx = np.array([[4.0, 0.0, 0.0]])
        nu_t, nu_r = doppler_nlos(rx, rx, MotionState(), MotionState(0.6, 0.0, 0.0), 300e9)
        assert nu_r[0] == pytest.approx(600.4, abs=0.1)

    def test_linearity_in_speed(self):
        rx = np.array([[4.0, 1.0, 0.5]])
        _, nu1 = doppler_nlos(rx, rx, MotionState(), MotionState(1.0, 0.1, 0.7), 310e9)
        _, nu2 = doppler_nlos(rx, rx, MotionState(), MotionState(2.0, 0.1, 0.7), 310e9)
        assert nu2[0] == pytest.approx(2.0 * nu1[0], rel=1e-12)


class TestRayPower:
    def test_reference_point_is_unity(self):
        law = PowerLaw(ds=10e-9, r_tau=2.3)
        assert ray_power(law, 0.0, 0.0, 1.0, 1.3, 325e9, 325e9) == pytest.approx(1.0)

    def test_decreasing_in_delay(self):
        law = PowerLaw(ds=10e-9, r_tau=2.3)
        taus = np.linspace(0.0, 100e-9, 30)
        powers = [ray_power(law, t, 0.0, 1.0, 0.0, 325e9, 325e9) for t in taus]
        assert all(b < a for a, b in zip(powers, powers[1:]))

    def test_r_tau_must_exceed_one(self):
        with pytest.raises(ValueError):
            PowerLaw(ds=10e-9, r_tau=1.0)

    def test_spatial_field_bounded(self, rng):
        law = PowerLaw(xi_sigma=0.5, n_sinusoids=10)
        spatial = draw_spatial_lognormal(rng, law)
        bound = np.sum(np.abs(spatial.amplitudes))
        for dp in np.linspace(0.0, 0.1, 17):
            for dq in np.linspace(0.0, 0.1, 17):
                assert abs(spatial.gaussian_field(dp, dq)) <= bound + 1e-12

    def test_spatial_field_unit_variance_normalization(self, rng):
        law = PowerLaw(xi_sigma=1.0, n_sinusoids=10)
        spatial = draw_spatial_lognormal(rng, law)
        assert np.sum(spatial.amplitudes**2) / 2.0 == pytest.approx(1.0)


class TestNormalizePowers:
    def test_single_ray(self):
        np.testing.assert_allclose(normalize_powers(np.array([0.3])), [1.0])

    def test_three_to_one_split(self):
        np.testing.assert_allclose(normalize_powers(np.array([3.0, 1.0])), [0.75, 0.25])

    def test_random_inputs_sum_to_one(self, rng):
        for _ in range(100):
            pre = rng.uniform(0.0, 5.0, int(rng.integers(1, 400)))
            pre[0] += 1e-6
            assert normalize_powers(pre).sum() == pytest.approx(1.0, abs=1e-12)

    def test_all_zero_rejected(self):
        with pytest.raises(DegenerateChannelError):
            normalize_powers(np.zeros(5))

    def test_profile_rows_sum_to_one(self, rng):
        law = PowerLaw(ds=10e-9, r_tau=2.3)
        n = 40
        alive = rng.random((8, n)) < 0.8
        alive[:, 0] = True
        powers = power_profile(
            law,
            rng.uniform(1e-8, 5e-8, n),
            rng.normal(0.0, 3.0, n),
            np.ones(n),
            rng.normal(0.0, 2.0, n),
            alive,
            np.linspace(300e9, 301e9, 8),
            300.5e9,
        )
        np.testing.assert_allclose(powers.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(powers[~alive] == 0.0)
