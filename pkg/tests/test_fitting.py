import numpy as np
import pytest

from thzchan.errors import ConfigError
from thzchan.fitting import (
    ReferenceCdf,
    cdf_distance,
    load_reference_cdf_csv,
    mmse_fit,
)


def _gaussian_cdf(scale, n=400):
    rng = np.random.default_rng(99)
    return ReferenceCdf.from_samples(scale * rng.standard_normal(n))


class TestReferenceCdf:
    def test_from_samples_sorted_and_normalized(self):
        cdf = ReferenceCdf.from_samples([3.0, 1.0, 2.0])
        np.testing.assert_allclose(cdf.values, [1.0, 2.0, 3.0])
        np.testing.assert_allclose(cdf.probabilities, [1 / 3, 2 / 3, 1.0])

    def test_validation(self):
        with pytest.raises(ValueError):
            ReferenceCdf(np.array([2.0, 1.0]), np.array([0.5, 1.0]))
        with pytest.raises(ValueError):
            ReferenceCdf(np.array([1.0, 2.0]), np.array([0.9, 0.5]))

    def test_csv_loader(self, tmp_path):
        path = tmp_path / "ref.csv"
        path.write_text("value,cdf\n0.5,0.25\n1.0,1.0\n")
        cdf = load_reference_cdf_csv(path)
        assert cdf.evaluate(0.75) == pytest.approx(0.625)

    def test_csv_header_required(self, tmp_path):
        path = tmp_path / "ref.csv"
        path.write_text("0.5,0.25\n1.0,1.0\n")
        with pytest.raises(ValueError, match="header"):
            load_reference_cdf_csv(path)


class TestCdfDistance:
    def test_identical_is_zero(self):
        cdf = _gaussian_cdf(1.0)
        result = cdf_distance(cdf, cdf)
        assert result.mse == 0.0
        assert result.ks == 0.0

    def test_shifted_is_positive(self):
        cdf = _gaussian_cdf(1.0)
        shifted = ReferenceCdf(cdf.values + 0.5, cdf.probabilities)
        result = cdf_distance(cdf, shifted)
        assert result.mse > 0.0
        assert result.ks > 0.0

    def test_symmetric(self):
        a = _gaussian_cdf(1.0)
        b = _gaussian_cdf(2.0)
        assert cdf_distance(a, b) == cdf_distance(b, a)


class TestMmseFit:
    def _closure(self):
        def closure(value, rng, n_realizations):
            samples = value * np.abs(rng.standard_normal(2000 * n_realizations))
            return ReferenceCdf.from_samples(samples)

        return closure

    def test_single_point_grid(self):
        reference = _gaussian_cdf(1.0)
        best, distance = mmse_fit([0.7], self._closure(), reference)
        assert best == 0.7
        assert distance >= 0.0

    def test_empty_grid_rejected(self):
        with pytest.raises(ConfigError):
            mmse_fit([], self._closure(), _gaussian_cdf(1.0))

    def test_closed_loop_recovery(self):
        closure = self._closure()
        rng = np.random.default_rng(1)
        reference = closure(1.4, rng, 4)
        grid = np.arange(0.2, 3.01, 0.2)
        best, _ = mmse_fit(grid, closure, reference, n_realizations=4, seed=5)
        assert abs(best - 1.4) <= 0.2 + 1e-12

    def test_refinement_never_worse(self):
        closure = self._closure()
        reference = closure(1.3, np.random.default_rng(2), 2)
        grid = list(np.arange(0.5, 2.51, 0.5))
        coarse_best, coarse_distance = mmse_fit(
            grid, closure, reference, n_realizations=2, seed=7, refine=False
        )
        _, refined_distance = mmse_fit(
            grid, closure, reference, n_realizations=2, seed=7, refine=True
        )
        assert refined_distance <= coarse_distance

    def test_deterministic(self):
        closure = self._closure()
        reference = closure(0.9, np.random.default_rng(3), 2)
        grid = list(np.arange(0.3, 2.01, 0.1))
        first = mmse_fit(grid, closure, reference, n_realizations=2, seed=11)
        second = mmse_fit(grid, closure, reference, n_realizations=2, seed=11)
        assert first == second
