# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT

import numpy as np
import pytest

from esfstl.coalescent import exact, stats
from esfstl.coalescent.stats import FrequencySpectrum
from esfstl.core.errors import BoundaryError, ParameterError, UndefinedStatisticError

from conftest import HAMMER


def test_spectrum_from_counts():
    spectrum = FrequencySpectrum.from_counts(HAMMER)
    assert spectrum.n == 1544
    assert spectrum.k == 10
    assert spectrum.count(853) == 1
    assert spectrum.count(2) == 0
    assert sorted(HAMMER) == spectrum.counts()


def test_tbl1y_spectrum():
    spectrum = FrequencySpectrum.tbl1y()
    assert (spectrum.n, spectrum.k) == (334, 134)
    array = spectrum.as_array()
    assert array.shape == (334,)
    assert np.dot(np.arange(1, 335), array) == 334
    assert array[0] == 107


def test_spectrum_validation():
    with pytest.raises(ParameterError):
        FrequencySpectrum({1: 2}, 3)
    with pytest.raises(ParameterError):
        FrequencySpectrum.from_counts([2, 0])
    assert FrequencySpectrum.from_alpha({1: 2, 3: 0}).alpha == {1: 2}


def test_harmonic():
    assert stats.harmonic(1) == 1.0
    assert stats.harmonic(4) == pytest.approx(25 / 12)


def test_watterson():
    assert round(stats.watterson_theta(278, 334)) == 44
    assert stats.watterson_theta(0, 10) == 0.0
    with pytest.raises(ParameterError):
        stats.watterson_theta(3, 1)


def test_expected_alleles_matches_exact_law():
    n, theta = 6, 1.3
    mean = sum(k * exact.num_alleles_pmf(n, theta, k) for k in range(1, n + 1))
    assert stats.esf_expected_alleles(n, theta) == pytest.approx(mean, rel=1e-12)
    assert stats.esf_expected_alleles(n, 0.0) == 1.0


def test_ewens_estimate():
    theta = stats.ewens_mle_theta(134, 334)
    assert 82 < theta < 83
    assert theta == pytest.approx(82.5285, abs=1e-3)
    assert stats.esf_expected_alleles(334, theta) == pytest.approx(134, rel=1e-9)
    small = stats.ewens_mle_theta(2, 1000)
    assert 0 < small < 1
    assert stats.esf_expected_alleles(1000, small) == pytest.approx(2, rel=1e-9)


@pytest.mark.parametrize("k, n", [(1, 10), (10, 10)])
def test_ewens_boundaries(k, n):
    with pytest.raises(BoundaryError):
        stats.ewens_mle_theta(k, n)


def test_expected_singletons():
    assert 65.9 <= stats.expected_singletons(334, 82) <= 66.1
    assert stats.expected_singletons(5, 2.0) == pytest.approx(10 / 6)


def test_pairwise_diversity():
    assert stats.pairwise_diversity([2, 0, 1], 4) == pytest.approx(1.5)
    with pytest.raises(ParameterError):
        stats.pairwise_diversity([1, 2], 4)


def test_tajimas_d():
    assert stats.tajimas_d(6.49, 278, 334) == pytest.approx(-2.6, abs=0.05)
    with pytest.raises(UndefinedStatisticError):
        stats.tajimas_d(1.0, 0, 10)
    with pytest.raises(ParameterError):
        stats.tajimas_d(1.0, 2, 3)


def test_tajimas_d_is_zero_when_estimators_agree():
    n, s = 20, 12
    pi = s / stats.harmonic(n - 1)
    assert stats.tajimas_d(pi, s, n) == pytest.approx(0.0, abs=1e-12)


def test_poisson_spectrum_approximation():
    assert stats.poisson_spectrum_approx(334, 82, 1) == pytest.approx(82 * 334 / 416)
    assert stats.poisson_spectrum_approx(334, 82, 1) == pytest.approx(65.84, abs=0.005)
    doubletons = stats.poisson_spectrum_approx(334, 82, 2)
    assert 65.84 + doubletons == pytest.approx(92.27, abs=0.01)
    assert stats.poisson_tail_test(107, 65.84) == pytest.approx(1.92e-6, rel=0.05)
    assert stats.poisson_tail_test(119, 92.27) == pytest.approx(0.0043, rel=0.05)
    assert stats.poisson_tail_test(0, 3.0) == 1.0
    assert stats.poisson_tail_test(1, 2.0) == pytest.approx(1 - np.exp(-2.0))


def test_poisson_spectrum_test():
    spectrum = FrequencySpectrum.tbl1y()
    observed, mean, tail = stats.poisson_spectrum_test(spectrum, 82, (1, 2))
    assert observed == 119
    assert mean == pytest.approx(92.27, abs=0.01)
    assert tail == pytest.approx(0.0043, rel=0.05)
    observed, mean, tail = stats.poisson_spectrum_test(spectrum, 82)
    assert (observed, round(mean, 2)) == (107, 65.84)
    assert tail == pytest.approx(1.92e-6, rel=0.05)


def test_factorial_moments():
    n, theta = 50, 2.0
    exact_moment, limit = stats.factorial_moment_check(n, theta, [1])
    assert exact_moment == pytest.approx(stats.expected_singletons(n, theta))
    assert limit == pytest.approx(theta * n / (n + theta))
    large, large_limit = stats.factorial_moment_check(100000, theta, [2, 1, 0, 1])
    assert large == pytest.approx(large_limit, rel=1e-3)
    assert stats.factorial_moment_check(3, theta, [0, 2])[0] == 0.0


def test_summarize_tbl1y():
    summary = stats.summarize(FrequencySpectrum.tbl1y(), 278, pi=6.49, theta=82)
    assert (summary.n, summary.k, summary.s) == (334, 134, 278)
    assert round(summary.watterson) == 44
    assert int(summary.ewens) == 82
    assert summary.theta == 82
    assert 65.9 <= summary.expected_singletons <= 66.1
    assert summary.singleton_test[0] == 107
    assert summary.singleton_test[1] == pytest.approx(65.84, abs=0.005)
    assert summary.singleton_test[2] == pytest.approx(1.92e-6, rel=0.05)
    assert summary.low_frequency_test[1] == pytest.approx(92.27, abs=0.01)
    assert summary.tajimas_d == pytest.approx(-2.6, abs=0.05)
    assert stats.summarize(FrequencySpectrum.tbl1y(), 278).tajimas_d is None


def test_summarize_defaults_to_ewens_theta():
    spectrum = FrequencySpectrum.tbl1y()
    summary = stats.summarize(spectrum, 278)
    assert summary.theta == summary.ewens
    assert summary.singleton_test[1] == pytest.approx(stats.poisson_spectrum_approx(334, summary.ewens, 1))
    with pytest.raises(ParameterError):
        stats.summarize(spectrum, 278, theta=0.0)
