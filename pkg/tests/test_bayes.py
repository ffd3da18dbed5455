import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from sqzphase import bayes
from sqzphase.bayes import PosteriorGrid, map_estimate, posterior, posterior_variance, prior_grid, update
from sqzphase.bounds import fisher_information
from sqzphase.errors import UninformativePosterior
from sqzphase.measurement import SampleSet, sample_homodyne
from sqzphase.state import VACUUM, SqueezedThermalState

from oracles import posterior_linear

PURE = SqueezedThermalState(0.37)


def synthetic(center, sigma, points=2048):
    t = bayes.theta_grid(points)
    return PosteriorGrid.from_log_density(t, -0.5 * ((t - center) / sigma) ** 2)


class TestGrid:
    def test_endpoints_and_order(self):
        t = bayes.theta_grid(64)
        assert t[0] == 0.0 and t[-1] == math.pi / 2
        assert np.all(np.diff(t) > 0)

    @pytest.mark.parametrize("n", [63, 0, 100.5])
    def test_too_coarse(self, n):
        with pytest.raises(ValueError):
            bayes.theta_grid(n)

    def test_prior_is_flat(self):
        p = prior_grid()
        np.testing.assert_allclose(p.density, 2 / math.pi, rtol=1e-13)
        assert posterior_variance(p) == pytest.approx((math.pi / 2) ** 2 / 12, rel=1e-6)

    def test_arrays_frozen(self):
        with pytest.raises(ValueError):
            prior_grid().density[0] = 0.0


class TestPosterior:
    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_normalised_and_nonnegative(self, seed):
        s = sample_homodyne(SqueezedThermalState(0.69, 0.5), 0.7, 1000, seed=seed)
        post = posterior(s)
        assert trapezoid(post.density, post.thetas) == pytest.approx(1.0, abs=1e-9)
        assert np.all(post.density >= 0)

    def test_log_density_is_sum_of_log_likelihoods(self):
        from sqzphase.measurement import log_likelihood

        s = sample_homodyne(PURE, 0.4, 200, seed=4)
        post = posterior(s, 128)
        direct = math.log(2 / math.pi) + sum(log_likelihood(x, post.thetas, PURE) for x in s.samples)
        np.testing.assert_allclose(post.log_density, direct, rtol=1e-12)

    def test_single_zero_sample_peaks_at_zero(self):
        post = posterior(SampleSet(np.array([0.0]), PURE, 0.0, 0))
        assert np.argmax(post.density) == 0
        assert map_estimate(post) == 0.0

    @pytest.mark.parametrize("n", [1, 10, 50])
    def test_matches_linear_product(self, n):
        s = sample_homodyne(PURE, 0.4, n, seed=n)
        post = posterior(s, 512)
        np.testing.assert_allclose(post.density, posterior_linear(s.samples, PURE, post.thetas), rtol=1e-9)

    def test_permutation_invariant(self):
        s = sample_homodyne(PURE, 0.4, 1000, seed=8)
        shuffled = SampleSet(np.random.default_rng(0).permutation(s.samples), PURE, 0.4, 8)
        np.testing.assert_allclose(posterior(s).density, posterior(shuffled).density, rtol=1e-12, atol=0)

    def test_sequential_equals_batch(self):
        s = sample_homodyne(SqueezedThermalState(0.5, 0.2), 0.6, 300, seed=3)
        post = prior_grid(512)
        for x in s.samples:
            post = update(post, x, s.state)
        batch = posterior(s, 512)
        np.testing.assert_allclose(post.density, batch.density, rtol=1e-10, atol=1e-10 * batch.density.max())

    def test_seeded_run_is_near_truth(self):
        s = sample_homodyne(PURE, 0.4, 1000, seed=12345)
        sigma = math.sqrt(1 / (1000 * fisher_information(PURE, 0.4)))
        post = posterior(s)
        assert abs(map_estimate(post) - 0.4) < 3 * sigma
        assert 0.5 <= posterior_variance(post) / sigma**2 <= 2.0

    @pytest.mark.parametrize("seed", [11, 12, 13])
    def test_grid_refinement_stable(self, seed):
        s = sample_homodyne(SqueezedThermalState(0.5, 0.1), 0.5, 1000, seed=seed)
        assert abs(map_estimate(posterior(s, 2048)) - map_estimate(posterior(s, 4096))) < 1e-4

    def test_concentrates_with_more_data(self):
        means = []
        for n in (100, 300, 500, 1000):
            means.append(np.mean([posterior_variance(posterior(sample_homodyne(PURE, 0.4, n, seed=k))) for k in range(10)]))
        assert np.all(np.diff(means) < 0)


class TestSummaries:
    def test_flat_posterior_has_no_mode(self):
        with pytest.raises(UninformativePosterior):
            map_estimate(prior_grid())

    def test_vacuum_data_is_uninformative(self):
        with pytest.raises(UninformativePosterior):
            map_estimate(posterior(sample_homodyne(VACUUM, 0.4, 100, seed=1)))

    def test_symmetric_peak(self):
        post = synthetic(0.4, 0.05)
        assert map_estimate(post) == pytest.approx(0.4, abs=post.step / 2)

    def test_parabolic_refinement_beats_grid(self):
        post = synthetic(0.4123456, 0.03, points=256)
        assert abs(map_estimate(post) - 0.4123456) < 1e-9
        assert abs(post.thetas[np.argmax(post.density)] - 0.4123456) > 1e-4

    def test_mode_at_boundary(self):
        post = synthetic(-0.1, 0.05)
        assert map_estimate(post) == 0.0

    def test_narrow_gaussian_variance(self):
        assert posterior_variance(synthetic(0.4, 0.01)) == pytest.approx(1e-4, rel=0.02)

    def test_mean(self):
        assert bayes.posterior_mean(synthetic(0.7, 0.02)) == pytest.approx(0.7, abs=1e-9)
