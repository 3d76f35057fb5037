import numpy as np
import pytest

from thzchan import kernels
from thzchan.kernels import _numpy as reference


@pytest.fixture(scope="module")
def compiled():
    try:
        from thzchan.kernels import _core
    except ImportError:
        pytest.skip("compiled kernels not built")
    return _core


class TestBackendEquivalence:
    def test_ray_path_distance(self, compiled, rng):
        offsets = rng.normal(0.0, 0.03, (4, 257))
        args = (8.0, 0.4, -0.9, 0.4, 0.6, *offsets)
        np.testing.assert_allclose(
            compiled.ray_path_distance(*args),
            reference.ray_path_distance(*args),
            rtol=1e-12,
        )

    def test_mirror_step(self, compiled, rng):
        d_tx = rng.normal(size=(100, 3))
        d_tx *= (rng.uniform(2.0, 10.0, 100) / np.linalg.norm(d_tx, axis=1))[:, None]
        d_rx = rng.normal(size=(100, 3))
        d_rx *= (np.linalg.norm(d_tx, axis=1) / np.linalg.norm(d_rx, axis=1))[:, None]
        disp_tx = np.array([1e-3, -2e-3, 5e-4])
        disp_rx = np.array([0.0, 1e-3, -1e-3])
        out_c = compiled.mirror_step(d_tx, d_rx, disp_tx, disp_rx)
        out_py = reference.mirror_step(d_tx, d_rx, disp_tx, disp_rx)
        for a, b in zip(out_c, out_py):
            np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_stf_power_profile(self, compiled, rng):
        n_sub, n_ray = 32, 120
        args = (
            rng.uniform(1e-8, 6e-8, n_ray),
            rng.normal(0.0, 3.0, n_ray),
            rng.uniform(0.5, 2.0, n_ray),
            rng.normal(0.0, 4.0, n_ray),
            (rng.random((n_sub, n_ray)) < 0.8).astype(np.uint8),
            np.linspace(300e9, 305e9, n_sub),
            302e9,
            1e-8,
            2.3,
        )
        np.testing.assert_allclose(
            compiled.stf_power_profile(*args),
            reference.stf_power_profile(*args),
            rtol=1e-12,
            atol=1e-300,
        )

    def test_psd_correlation_scan(self, compiled, rng):
        powers = rng.uniform(0.0, 1.0, (40, 90))
        for anchor, step in [(0, 1), (39, -1), (20, 1), (20, -1)]:
            np.testing.assert_allclose(
                compiled.psd_correlation_scan(powers, anchor, step),
                reference.psd_correlation_scan(powers, anchor, step),
                rtol=1e-12,
            )


class TestDispatch:
    def test_backend_exposed(self):
        assert kernels.BACKEND in ("compiled", "python")

    def test_functions_callable(self):
        scan = kernels.psd_correlation_scan(np.ones((3, 4)), 0, 1)
        np.testing.assert_allclose(scan, 1.0)
