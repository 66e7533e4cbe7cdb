import numpy as np
import pytest

from framealias.errors import InvalidArgumentError, UnsupportedSpecError
from framealias.randstats import (RandomKernelSpec, agreement, aliasing_from_kernels,
                                  closed_form_moments, expected_aliasing, fejer_ratio,
                                  monte_carlo_frame_operator, monte_carlo_moments,
                                  variance_aliasing, variance_bounds, variance_peaks)
from framealias.walnut import aliasing_from_responses


class TestClosedForm:
    def test_parseval_at_expectation(self):
        spec = RandomKernelSpec.parseval_at_expectation(12, 8, 4)
        E = expected_aliasing(spec)
        np.testing.assert_allclose(E[0], 1, atol=1e-14)
        assert np.all(E[1:] == 0)

    @pytest.mark.parametrize("d", [1, 2, 3, 5])
    def test_zero_band_sum(self, d):
        spec = RandomKernelSpec(3, 7, d, 210, variance=0.5)
        assert expected_aliasing(spec)[0, 0] == pytest.approx(0.5 * 3 * 7 / d)

    def test_k_independent(self):
        E = expected_aliasing(RandomKernelSpec(4, 5, 3, 15))
        assert np.all(E == E[:, :1])

    def test_non_divisible_means(self):
        # L_K = 4, d = 3: sum_l e^{2 pi i l n / 3} = e^{2 pi i n / 3} ... nonzero
        E = expected_aliasing(RandomKernelSpec(2, 4, 3, 12, variance=1.0))
        ref = 2 / 3 * np.exp(2j * np.pi * np.arange(4) * 1 / 3).sum()
        assert E[1, 0] == pytest.approx(ref)
        assert abs(E[1, 0]) == pytest.approx(2 / 3)

    def test_nonzero_mean_rejected(self):
        with pytest.raises(UnsupportedSpecError):
            expected_aliasing(RandomKernelSpec(2, 2, 1, mean=0.1))

    def test_uniform(self):
        spec = RandomKernelSpec(3, 4, 2, distribution="uniform", low=-1, high=1)
        assert expected_aliasing(spec)[0, 0] == pytest.approx(3 * 4 / 2 / 3)
        with pytest.raises(UnsupportedSpecError):
            variance_aliasing(spec)
        with pytest.raises(UnsupportedSpecError):
            expected_aliasing(RandomKernelSpec(3, 4, 2, distribution="uniform", low=0, high=1))

    def test_fejer(self):
        t = np.array([0.0, 1.0, 0.5, 0.25])
        np.testing.assert_allclose(fejer_ratio(t, 4), [16, 16, 0, 0], atol=1e-12)
        assert fejer_ratio(np.array([1 / 8]), 4)[0] == pytest.approx(1 / np.sin(np.pi / 8) ** 2)

    def test_peak_value(self):
        spec = RandomKernelSpec(5, 6, 2, 24, variance=0.3)
        V = variance_aliasing(spec)
        assert V.max() == pytest.approx(0.3**2 * 5 / 4 * 2 * 36)

    @pytest.mark.parametrize("M,LK,d,L", [(40, 16, 4, 400), (3, 5, 3, 27), (8, 8, 2, 16)])
    def test_within_bounds(self, M, LK, d, L):
        spec = RandomKernelSpec(M, LK, d, L, variance=0.7)
        lo, hi = variance_bounds(spec)
        V = variance_aliasing(spec)
        assert V.min() >= lo * (1 - 1e-12) and V.max() <= hi * (1 + 1e-12)

    def test_peaks_exact(self):
        spec = RandomKernelSpec(40, 16, 4, 400)
        for n, peaks in enumerate(variance_peaks(spec)):
            assert peaks == {n * 400 // 8, n * 400 // 8 + 200}

    @pytest.mark.parametrize("M,lo,hi", [(8, 0.125, 0.25), (256, 0.00390625, 0.0078125)])
    def test_parseval_variance_range(self, M, lo, hi):
        lims = variance_bounds(RandomKernelSpec.parseval_at_expectation(M, 8, 2))
        assert lims == pytest.approx((lo, hi))
        assert lims == pytest.approx((1 / M, 2 / M))

    def test_invalid_spec(self):
        with pytest.raises(InvalidArgumentError):
            RandomKernelSpec(2, 2, 3, 8)
        with pytest.raises(InvalidArgumentError):
            RandomKernelSpec(2, 2, 1, variance=0)


def test_gram_route_matches_responses():
    rng = np.random.default_rng(0)
    k = rng.standard_normal((6, 3, 5)) + 1j * rng.standard_normal((6, 3, 5))
    for d, L in [(1, 9), (3, 12), (2, 6)]:
        ref = aliasing_from_responses(np.fft.fft(k, n=L, axis=-1), d)
        assert np.abs(aliasing_from_kernels(k, d, L) - ref).max() <= 1e-12
    with pytest.raises(InvalidArgumentError):
        aliasing_from_kernels(k, 2, 4)


class TestMonteCarlo:
    def test_matches_closed_form(self):
        spec = RandomKernelSpec(40, 16, 4, 40, variance=1 / 640)
        emp = monte_carlo_moments(spec, 20000, seed=1)
        assert min(agreement(emp, closed_form_moments(spec))) >= 0.97

    def test_non_divisible_mean(self):
        spec = RandomKernelSpec(6, 5, 3, 15, variance=0.2)
        emp = monte_carlo_moments(spec, 20000, seed=2)
        E = expected_aliasing(spec)
        z = np.abs(emp.expected - E) / emp.se_mean
        assert np.mean(z <= 3) >= 0.95

    def test_uniform_mean(self):
        spec = RandomKernelSpec(6, 5, 2, 10, distribution="uniform", low=-0.5, high=0.5)
        emp = monte_carlo_moments(spec, 20000, seed=3)
        assert emp.bounds is None
        assert np.mean(np.abs(emp.expected - expected_aliasing(spec)) <= 3 * emp.se_mean) >= 0.95

    def test_deterministic(self):
        spec = RandomKernelSpec(4, 3, 2, 6)
        a = monte_carlo_moments(spec, 700, seed=9)
        b = monte_carlo_moments(spec, 700, seed=9)
        np.testing.assert_array_equal(a.expected, b.expected)
        np.testing.assert_array_equal(a.variance, b.variance)
        np.testing.assert_array_equal(a.se_variance, b.se_variance)

    def test_parallel_matches_serial(self):
        spec = RandomKernelSpec(4, 3, 2, 6)
        a = monte_carlo_moments(spec, 1100, seed=4)
        b = monte_carlo_moments(spec, 1100, seed=4, n_jobs=2)
        np.testing.assert_array_equal(a.expected, b.expected)
        np.testing.assert_array_equal(a.variance, b.variance)

    def test_merge_matches_direct(self):
        # the chunked, merged estimates equal one-shot numpy moments on the same draws
        spec = RandomKernelSpec(3, 4, 2, 8, variance=0.4)
        emp = monte_carlo_moments(spec, 600, seed=5)
        seqs = np.random.SeedSequence(5).spawn(3)
        G = np.concatenate([
            aliasing_from_kernels(spec.sample(np.random.default_rng(s), n), 2, 8)
            for s, n in zip(seqs, (250, 250, 100))])
        np.testing.assert_allclose(emp.expected, G.mean(0), atol=1e-14)
        np.testing.assert_allclose(emp.variance, (np.abs(G - G.mean(0)) ** 2).sum(0) / 599, rtol=1e-10)

    def test_draws_validated(self):
        with pytest.raises(InvalidArgumentError):
            monte_carlo_moments(RandomKernelSpec(1, 1, 1), 1)

    def test_error_shrinks_like_root_n(self):
        spec = RandomKernelSpec.parseval_at_expectation(4, 2, 2, 4)
        E = expected_aliasing(spec)
        Ns = [10000, 20000, 40000]
        dev = [np.mean([np.abs(monte_carlo_moments(spec, N, 1000 * i + r).expected - E).max()
                        for r in range(64)]) for i, N in enumerate(Ns)]
        slope = np.polyfit(np.log(Ns), np.log(dev), 1)[0]
        assert -0.6 <= slope <= -0.4

    def test_expected_frame_operator(self):
        spec = RandomKernelSpec.parseval_at_expectation(8, 4, 2, 8)
        S = monte_carlo_frame_operator(spec, 4000, seed=0)
        assert np.abs(S - np.eye(8)).max() <= 0.03
