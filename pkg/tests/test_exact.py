# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT

import math

import numpy as np
import pytest
from scipy import integrate, special

from esfstl.coalescent import exact
from esfstl.coalescent.exact import INFINITE, LineageLawParams
from esfstl.core import numerics
from esfstl.core.errors import NegligibleProbabilityError, ParameterError, PrecisionLossError

from conftest import HAMMER


def test_params_validation():
    with pytest.raises(ParameterError):
        LineageLawParams(0, 1.0, 0.5)
    with pytest.raises(ParameterError):
        LineageLawParams(3, -1.0, 0.5)
    with pytest.raises(ParameterError):
        LineageLawParams(INFINITE, 1.0, 0.0)
    assert LineageLawParams(4.0, 1.0, 0.5).n == 4


def test_ancestors_at_time_zero():
    params = LineageLawParams(5, 1.0, 0.0)
    assert exact.ancestors_pmf(params, 5) == 1.0
    assert exact.ancestors_pmf(params, 3) == 0.0


def test_ancestors_single_line_survival():
    params = LineageLawParams(1, 2.0, 0.3)
    assert exact.ancestors_pmf(params, 1) == pytest.approx(math.exp(-0.3))
    assert exact.ancestors_pmf(params, 0) == pytest.approx(1 - math.exp(-0.3))


def test_two_lines_without_mutation():
    params = LineageLawParams(2, 0.0, 0.7)
    assert exact.ancestors_pmf(params, 2) == pytest.approx(math.exp(-0.7), rel=1e-12)
    assert exact.ancestors_pmf(params, 1) == pytest.approx(1 - math.exp(-0.7), rel=1e-12)
    assert exact.ancestors_pmf(params, 0) == 0.0


@pytest.mark.parametrize("n, theta, t", [(6, 1.5, 0.4), (10, 0.0, 0.2), (8, 2.5, 1.0), (20, 0.5, 0.3)])
def test_series_matches_matrix_exponential(n, theta, t):
    series = exact.ancestors_pmf_vector(LineageLawParams(n, theta, t))
    assert series == pytest.approx(exact.ancestors_pmf_expm(n, theta, t), abs=1e-9)
    assert series.sum() == pytest.approx(1.0, abs=1e-9)


def test_infinite_population_law_is_normalised():
    params = LineageLawParams(INFINITE, 0.0, 0.5)
    total = sum(exact.ancestors_pmf(params, k) for k in range(1, 60))
    assert total == pytest.approx(1.0, abs=1e-9)


def test_large_samples_approach_the_population_law():
    population = [exact.ancestors_pmf(LineageLawParams(INFINITE, 0.0, 1.0), k) for k in range(1, 12)]
    gaps = []
    for n in (60, 2000):
        finite = [exact.ancestors_pmf(LineageLawParams(n, 0.0, 1.0), k) for k in range(1, 12)]
        gaps.append(max(abs(a - b) for a, b in zip(finite, population)))
    assert gaps[1] < gaps[0]
    assert gaps[1] < 5e-3


def test_line_count_decreases_stochastically_in_time():
    n = 7
    previous = None
    for t in (0.05, 0.1, 0.3, 0.6, 1.0, 2.0):
        cdf = np.cumsum(exact.ancestors_pmf_vector(LineageLawParams(n, 0.0, t)))
        if previous is not None:
            assert np.all(cdf >= previous - 1e-12)
        previous = cdf


def test_falling_moments():
    params = LineageLawParams(6, 0.0, 0.5)
    k = np.arange(7)
    pmf = exact.ancestors_pmf_vector(params)
    assert exact.ancestors_falling_moment(params, 1) == pytest.approx(np.dot(k, pmf), rel=1e-9)
    assert exact.ancestors_falling_moment(params, 2) == pytest.approx(np.dot(k * (k - 1), pmf), rel=1e-9)
    assert exact.ancestors_falling_moment(LineageLawParams(6, 0.0, 0.0), 2) == pytest.approx(30.0)


def test_event_time_density_is_rate_times_probability():
    params = LineageLawParams(5, 1.0, 0.35)
    expected = 0.5 * 3 * (3 + 1.0 - 1) * exact.ancestors_pmf(params, 3)
    assert exact.event_time_density(params, 3) == expected


def test_event_time_density_hypoexponential():
    # T_4 + T_3 with rates 6 and 3
    for t in (0.05, 0.2, 0.6, 1.5):
        density = exact.event_time_density(LineageLawParams(4, 0.0, t), 3)
        assert density == pytest.approx(6 * (math.exp(-3 * t) - math.exp(-6 * t)), rel=1e-9)


def test_event_time_density_integrates_to_tree_height():
    def density(t):
        return exact.event_time_density(LineageLawParams(4, 0.0, t), 2)

    mass, _ = integrate.quad(density, 0, np.inf)
    mean, _ = integrate.quad(lambda t: t * density(t), 0, np.inf)
    assert mass == pytest.approx(1.0, abs=1e-7)
    assert mean == pytest.approx(1.5, abs=1e-6)


def test_seg_sites_trivial_sample():
    assert exact.seg_sites_pmf(1, 2.0, 0) == 1.0
    assert exact.seg_sites_pmf(1, 2.0, 3) == 0.0


@pytest.mark.parametrize("theta", [0.3, 1.0, 4.0])
def test_seg_sites_pair_is_geometric(theta):
    for s in range(8):
        expected = (1 / (1 + theta)) * (theta / (1 + theta)) ** s
        assert exact.seg_sites_pmf(2, theta, s) == pytest.approx(expected, rel=1e-12)


def test_seg_sites_matches_alternating_sum():
    probs = exact.seg_sites_pmf_vector(10, 2.5, 60)
    for s in range(61):
        assert exact.seg_sites_pmf_alternating(10, 2.5, s) == pytest.approx(probs[s], abs=1e-9)


def test_seg_sites_normalised_and_matches_generating_function():
    probs = exact.seg_sites_pmf_vector(8, 1.5, 200)
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    z = 0.6
    assert np.dot(probs, z ** np.arange(201)) == pytest.approx(exact.seg_sites_pgf(8, 1.5, z), rel=1e-12)


def test_seg_sites_mean():
    theta, n = 2.5, 10
    probs = exact.seg_sites_pmf_vector(n, theta, 400)
    assert np.dot(np.arange(401), probs) == pytest.approx(theta * sum(1 / j for j in range(1, n)), rel=1e-9)


def test_seg_sites_none_segregating():
    theta, n = 1.7, 6
    expected = math.exp(special.gammaln(n) - numerics.log_rising_factorial(1 + theta, n - 1))
    assert exact.seg_sites_pmf(n, theta, 0) == pytest.approx(expected, rel=1e-12)


def test_seg_sites_result_is_read_only():
    with pytest.raises(ValueError):
        exact.seg_sites_pmf_vector(4, 1.0, 5)[0] = 2.0


def test_num_alleles():
    theta = 1.3
    assert exact.num_alleles_pmf(2, theta, 1) == pytest.approx(1 / (1 + theta))
    assert exact.num_alleles_pmf(2, theta, 2) == pytest.approx(theta / (1 + theta))
    assert sum(exact.num_alleles_pmf(5, 2.5, k) for k in range(1, 6)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ParameterError):
        exact.num_alleles_pmf(5, 2.5, 0)


def test_mutations_while_at_least_two_lines_is_total():
    assert exact.mutations_while_at_least_pgf(7, 1.2, 2, 0.4) == pytest.approx(exact.seg_sites_pgf(7, 1.2, 0.4))
    assert exact.mutations_while_at_least_pmf(4, 1.0, 2, 3) == pytest.approx(exact.seg_sites_pmf(4, 1.0, 3), abs=1e-9)


def test_mutations_while_at_least_pmf_matches_pgf():
    n, theta, l, z = 5, 1.0, 3, 0.5
    series = sum(z ** k * exact.mutations_while_at_least_pmf(n, theta, l, k) for k in range(60))
    assert series == pytest.approx(exact.mutations_while_at_least_pgf(n, theta, l, z), abs=1e-8)


def test_joint_pgf_at_one_is_line_count_law():
    params = LineageLawParams(6, 1.5, 0.4)
    for l in range(2, 7):
        expected = exact.ancestors_pmf(LineageLawParams(6, 0.0, 0.4), l)
        assert exact.mut_anc_joint_pgf(params, l, 1.0) == pytest.approx(expected, rel=1e-12)


def test_joint_pgf_approaches_total_mutations_at_long_times():
    params = LineageLawParams(5, 1.0, 40.0)
    z = 0.3
    total = sum(exact.mut_anc_joint_pgf(params, l, z) for l in range(2, 6))
    assert total < 1e-9
    # the remaining mass sits in the single ancestor, carrying every mutation
    tail = exact.stationary_joint_pgf_prob(params, 1, z)
    assert tail == pytest.approx(exact.seg_sites_pgf(5, 1.0, z), rel=1e-9)


def test_stationary_joint_pgf_marginals():
    params = LineageLawParams(6, 1.5, 0.4)
    at_one = [exact.stationary_joint_pgf_prob(params, l, 1.0) for l in range(1, 7)]
    assert sum(at_one) == pytest.approx(1.0, abs=1e-10)
    assert at_one[2] == pytest.approx(exact.ancestors_pmf(LineageLawParams(6, 0.0, 0.4), 3), rel=1e-12)
    z = 0.5
    total = sum(exact.stationary_joint_pgf_prob(params, l, z) for l in range(1, 7))
    assert total == pytest.approx(exact.seg_sites_pgf(6, 1.5, z), abs=1e-10)


def test_joint_pgf_rejects_bad_arguments():
    params = LineageLawParams(4, 1.0, 0.4)
    with pytest.raises(ParameterError):
        exact.mut_anc_joint_pgf(params, 1, 0.5)
    with pytest.raises(ParameterError):
        exact.stationary_joint_pgf_prob(params, 2, 1.5)


def test_conditional_mean_at_time_zero_and_long_times():
    assert exact.cond_mean_ancestors(6, 1.0, 0.0, 3) == 6.0
    assert exact.cond_mean_ancestors(6, 1.0, 50.0, 3) == pytest.approx(1.0, abs=1e-6)


def test_conditional_mean_averages_to_unconditional_mean():
    n, theta, t = 3, 1.0, 0.5
    probs = exact.seg_sites_pmf_vector(n, theta, 40)
    averaged = sum(probs[r] * exact.cond_mean_ancestors(n, theta, t, r) for r in range(41))
    pmf = exact.ancestors_pmf_vector(LineageLawParams(n, 0.0, t))
    assert averaged == pytest.approx(np.dot(np.arange(n + 1), pmf), abs=1e-6)


def test_conditional_mean_grows_with_more_sites():
    means = [exact.cond_mean_ancestors(6, 1.0, 0.5, r) for r in range(0, 8)]
    assert all(1.0 <= m <= 6.0 for m in means)
    assert means[0] < means[-1]


def test_conditional_mean_refuses_negligible_evidence():
    with pytest.raises(NegligibleProbabilityError):
        exact.cond_mean_ancestors(2, 1e-4, 0.5, 200)


def test_joint_table_boundary():
    table = exact.joint_mut_allele_table(1, 1.0)
    assert table.probability(0, 1, 1, 1) == 1.0
    assert table.probability(1, 1, 1, 1) == 0.0


@pytest.mark.parametrize("n, theta", [(4, 1.0), (8, 2.5), (15, 0.7)])
def test_joint_table_marginals(n, theta):
    table = exact.joint_mut_allele_table(n, theta)
    assert table.tail_mass < exact.TABLE_TAIL
    mutations = table.mutation_marginal()
    assert mutations == pytest.approx(exact.seg_sites_pmf_vector(n, theta, table.i_max), abs=1e-9)
    alleles = table.allele_marginal()
    assert alleles[1:] == pytest.approx([exact.num_alleles_pmf(n, theta, j) for j in range(1, n + 1)], abs=1e-9)


def test_joint_table_has_no_more_alleles_than_sites_plus_one():
    table = exact.joint_mut_allele_table(6, 1.5)
    layer = table.layer()
    for i in range(min(6, table.i_max + 1)):
        assert np.all(layer[i, i + 2:] == 0.0)
    with pytest.raises(ParameterError):
        table.layer(5, 3)


def test_esf_hammer_probability():
    assert math.exp(exact.esf_log_probability(HAMMER, 2.5)) == pytest.approx(1.1722e-18, rel=1e-4)


def test_esf_small_configuration():
    theta = 1.7
    expected = 3 * theta / ((theta + 1) * (theta + 2))
    assert math.exp(exact.esf_log_probability((1, 2), theta)) == pytest.approx(expected, rel=1e-12)


def test_sample_probability_two_singletons():
    theta = 2.0
    assert exact.unordered_sample_probability((1, 1), 1, theta) == pytest.approx(theta / (1 + theta) ** 2)
    assert exact.sample_probability((1, 1), 1, theta) == pytest.approx(2 * theta / (1 + theta) ** 2)
    assert exact.sample_probability((2,), 0, theta) == pytest.approx(1 / (1 + theta))


def test_sample_probability_impossible_sites():
    assert exact.sample_probability((1, 1, 1), 1, 1.0) == 0.0
    assert exact.sample_probability((3,), 2, 1.0) == 0.0


def test_sample_probabilities_sum_to_site_law():
    theta = 1.4
    configurations = [(3,), (1, 2), (1, 1, 1)]
    for s in range(6):
        total = sum(exact.unordered_sample_probability(c, s, theta) for c in configurations)
        assert total == pytest.approx(exact.seg_sites_pmf(3, theta, s), rel=1e-10)


def test_sample_probabilities_sum_to_esf():
    theta = 1.0
    for counts in [(1, 2), (1, 1, 2), (2, 3)]:
        total = sum(exact.unordered_sample_probability(counts, s, theta) for s in range(80))
        assert total == pytest.approx(math.exp(exact.esf_log_probability(counts, theta)), rel=1e-9)


def test_precision_guard_and_fallback(restore_settings):
    params = LineageLawParams(150, 0.5, 0.05)
    reference = exact.ancestors_pmf_expm(150, 0.5, 0.05)[40]
    restore_settings.configure(cancellation_digits=1e-6, precision_fallback=False)
    with pytest.raises(PrecisionLossError):
        exact.ancestors_pmf(params, 40)
    restore_settings.configure(precision_fallback=True)
    assert exact.ancestors_pmf(params, 40) == pytest.approx(reference, abs=1e-9)


def test_small_samples_are_resummed_without_fallback(restore_settings):
    restore_settings.configure(precision_fallback=False)
    params = LineageLawParams(100, 0.0, 0.01)
    reference = exact.ancestors_pmf_expm(100, 0.0, 0.01)
    assert exact.ancestors_pmf(params, 70) == pytest.approx(reference[70], abs=1e-9)
    assert exact.ancestors_pmf(params, 70) == pytest.approx(0.074939, rel=1e-4)
    assert exact.ancestors_pmf(params, 72) == pytest.approx(0.044398, rel=1e-4)
    assert exact.seg_sites_pmf_alternating(30, 0.5, 0) == pytest.approx(exact.seg_sites_pmf(30, 0.5, 0), abs=1e-9)


def test_population_series_at_short_times_is_refused(restore_settings):
    restore_settings.configure(precision_fallback=False)
    with pytest.raises(PrecisionLossError) as info:
        exact.ancestors_pmf(LineageLawParams(INFINITE, 0.0, 0.01), 70)
    assert info.value.absolute_error > 1e-12


@pytest.mark.parametrize("n", [2, 10, 30, 50, 100])
@pytest.mark.parametrize("theta", [0.0, 2.5])
@pytest.mark.parametrize("t", [0.01, 0.1, 1.0, 5.0])
def test_line_count_law_normalised_and_exact(n, theta, t):
    pmf = exact.ancestors_pmf_vector(LineageLawParams(n, theta, t))
    assert pmf.sum() == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(pmf, exact.ancestors_pmf_expm(n, theta, t), rtol=0, atol=1e-9)


@pytest.mark.parametrize("n", [10, 30, 50])
@pytest.mark.parametrize("theta", [0.5, 2.5, 10.0])
def test_alternating_site_law_agrees_with_recursion(n, theta):
    table = exact.seg_sites_pmf_vector(n, theta, 80)
    for s in range(81):
        assert abs(exact.seg_sites_pmf_alternating(n, theta, s) - table[s]) < 1e-9
