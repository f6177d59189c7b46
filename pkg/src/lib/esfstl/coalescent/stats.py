# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT
"""Estimators of theta, Tajima's D and Poisson checks of the haplotype frequency spectrum."""
from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy import optimize, special, stats

from esfstl.core.errors import BoundaryError, ParameterError, UndefinedStatisticError

logger = logging.getLogger(__name__)

# Y-chromosome haplotype spectrum, multiplicity: number of haplotypes
TBL1Y_ALPHA = {1: 107, 2: 12, 3: 6, 4: 1, 5: 1, 6: 2, 7: 1, 14: 1, 32: 1, 50: 1, 61: 1}


@dataclass(frozen=True)
class FrequencySpectrum:
    """Haplotype frequency spectrum: ``alpha[j]`` haplotypes are seen j times

    Parameters
    ----------
    alpha : dict
        multiplicity -> number of haplotypes, zero entries dropped.
    n : int
        Sample size, sum of j * alpha[j].
    """

    alpha: dict
    n: int

    def __post_init__(self):
        if any(j < 1 or a < 0 for j, a in self.alpha.items()):
            raise ParameterError("spectrum entries need multiplicity >= 1 and a nonnegative count")
        if sum(j * a for j, a in self.alpha.items()) != self.n:
            raise ParameterError(f"spectrum does not add up to n={self.n}")

    @classmethod
    def from_counts(cls, counts):
        values, alpha = np.unique(np.asarray(counts, dtype=int), return_counts=True)
        if values.size and values[0] < 1:
            raise ParameterError("haplotype counts must be positive")
        return cls({int(j): int(a) for j, a in zip(values, alpha)}, int(np.sum(values * alpha)))

    @classmethod
    def from_alpha(cls, alpha):
        alpha = {int(j): int(a) for j, a in alpha.items() if a}
        return cls(alpha, sum(j * a for j, a in alpha.items()))

    @classmethod
    def tbl1y(cls):
        return cls.from_alpha(TBL1Y_ALPHA)

    @property
    def k(self):
        return sum(self.alpha.values())

    def count(self, j):
        return self.alpha.get(j, 0)

    def counts(self):
        """One count per haplotype, in increasing multiplicity"""
        return [j for j in sorted(self.alpha) for _ in range(self.alpha[j])]

    def as_array(self):
        """alpha_1..alpha_n as an array"""
        array = np.zeros(self.n, dtype=int)
        for j, a in self.alpha.items():
            array[j - 1] = a
        return array


def harmonic(n):
    """1 + 1/2 + ... + 1/n"""
    return float(np.sum(1.0 / np.arange(1, n + 1)))


def watterson_theta(s, n):
    """s divided by the (n-1)th harmonic number"""
    if n < 2:
        raise ParameterError(f"need n >= 2, got {n}")
    if s < 0:
        raise ParameterError(f"segregating sites must be nonnegative, got {s}")
    return s / harmonic(n - 1)


def esf_expected_alleles(n, theta):
    """Expected number of haplotypes in a sample of n, sum of theta/(theta+j) over j = 0..n-1"""
    if n < 1:
        raise ParameterError(f"need n >= 1, got {n}")
    if theta < 0:
        raise ParameterError(f"theta must be nonnegative, got {theta}")
    if theta == 0:
        return 1.0
    j = np.arange(n)
    return float(np.sum(theta / (theta + j)))


def ewens_mle_theta(k, n, rtol=1e-10):
    """Maximum likelihood theta from the number of haplotypes k in a sample of n

    Solves k = sum_{j=0}^{n-1} theta/(theta+j), which is increasing in theta.

    Raises
    ------
    BoundaryError
        For k = 1 (estimate 0) and k = n (estimate infinite).
    """
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
    if k == 1:
        raise BoundaryError(f"k=1 puts the estimate on the boundary theta=0 (n={n})")
    if k == n:
        raise BoundaryError(f"k=n={n} puts the estimate at theta=infinity")

    def residual(theta):
        return esf_expected_alleles(n, theta) - k

    high = 1.0
    while residual(high) < 0:
        high *= 2.0
    low = high / 2.0
    while low > 1e-300 and residual(low) > 0:
        low /= 2.0
    root = optimize.brentq(residual, low, high, rtol=rtol, xtol=1e-14)
    logger.debug("Ewens estimate for k=%d n=%d: %.10g", k, n, root)
    return root


def expected_singletons(n, theta):
    """E[alpha_1] = n theta / (n + theta - 1) under the Ewens sampling formula"""
    if n < 1:
        raise ParameterError(f"need n >= 1, got {n}")
    if theta <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    return n * theta / (n + theta - 1)


def pairwise_diversity(sfs, n):
    """Mean pairwise differences from an unfolded site frequency spectrum

    Parameters
    ----------
    sfs : array_like
        ``sfs[i - 1]`` sites have the derived variant in i copies, i = 1..n-1.
    n : int
    """
    sfs = np.asarray(sfs, dtype=float)
    if sfs.shape != (n - 1,):
        raise ParameterError(f"an unfolded spectrum for n={n} has {n - 1} entries, got {sfs.size}")
    i = np.arange(1, n)
    return float(np.sum(i * (n - i) * sfs) / special.comb(n, 2))


def tajimas_d(pi, s, n):
    """Tajima's D from mean pairwise differences, segregating sites and sample size

    The variance of pi - theta_W uses the usual constants
    a1 = sum 1/i, a2 = sum 1/i^2 (i < n),
    b1 = (n+1)/(3(n-1)), b2 = 2(n^2+n+3)/(9n(n-1)),
    c1 = b1 - 1/a1, c2 = b2 - (n+2)/(a1 n) + a2/a1^2,
    e1 = c1/a1, e2 = c2/(a1^2 + a2), var = e1 s + e2 s(s-1).
    """
    if n < 4:
        raise ParameterError(f"need n >= 4, got {n}")
    if s <= 0:
        raise UndefinedStatisticError("Tajima's D is undefined without segregating sites")
    i = np.arange(1, n)
    a1 = np.sum(1 / i)
    a2 = np.sum(1 / i ** 2)
    b1 = (n + 1) / (3 * (n - 1))
    b2 = 2 * (n ** 2 + n + 3) / (9 * n * (n - 1))
    c1 = b1 - 1 / a1
    c2 = b2 - (n + 2) / (a1 * n) + a2 / a1 ** 2
    e1 = c1 / a1
    e2 = c2 / (a1 ** 2 + a2)
    return float((pi - s / a1) / math.sqrt(e1 * s + e2 * s * (s - 1)))


def poisson_spectrum_approx(n, theta, j):
    """Mean of the Poisson limit Z_j for the count of haplotypes seen j times"""
    if j < 1:
        raise ParameterError(f"multiplicity must be at least 1, got {j}")
    if theta < 0:
        raise ParameterError(f"theta must be nonnegative, got {theta}")
    return theta / j * (n / (n + theta)) ** j


def poisson_tail_test(observed, mean):
    """P(Z >= observed) for Z Poisson with the given mean"""
    if mean <= 0:
        raise ParameterError(f"Poisson mean must be positive, got {mean}")
    if observed <= 0:
        return 1.0
    return float(np.exp(stats.poisson.logsf(observed - 1, mean)))


def poisson_spectrum_test(spectrum, theta, classes=(1,)):
    """Tail test for the total count over some multiplicity classes

    Returns
    -------
    tuple
        (observed total, Poisson mean, upper-tail probability).
    """
    observed = sum(spectrum.count(j) for j in classes)
    mean = sum(poisson_spectrum_approx(spectrum.n, theta, j) for j in classes)
    return observed, mean, poisson_tail_test(observed, mean)


def factorial_moment_check(n, theta, r):
    """Exact joint falling factorial moment of (alpha_1, ..., alpha_b) and its Poisson limit

    Parameters
    ----------
    r : sequence of int
        ``r[j - 1]`` is the order for alpha_j.

    Returns
    -------
    tuple of float
        (exact moment, limiting product).
    """
    r = np.asarray(r, dtype=int)
    if np.any(r < 0):
        raise ParameterError("moment orders must be nonnegative")
    if theta <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    j = np.arange(1, r.size + 1)
    m = int(np.sum(j * r))
    log_product = float(np.sum(r * np.log(theta / j)))
    limit = math.exp(log_product + m * math.log(n / (theta + n)))
    if m > n:
        return 0.0, limit
    log_exact = (special.gammaln(n + 1) + special.gammaln(theta + n - m) - special.gammaln(n - m + 1)
                 - special.gammaln(theta + n) + log_product)
    return float(math.exp(log_exact)), limit


@dataclass(frozen=True)
class SpectrumSummary:
    """Estimators and tests for one sample

    ``theta`` is the value the expected singletons and the Poisson tests were
    evaluated at. ``tajimas_d`` is None when no pairwise diversity was given.
    """

    n: int
    k: int
    s: int
    watterson: float
    ewens: float
    theta: float
    expected_singletons: float
    singleton_test: tuple
    low_frequency_test: tuple
    tajimas_d: float = None


def summarize(spectrum, s, pi=None, theta=None):
    """Every estimator and test of this module for one spectrum

    Parameters
    ----------
    spectrum : FrequencySpectrum
    s : int
        Segregating sites.
    pi : float, optional
        Mean pairwise differences, needed for Tajima's D.
    theta : float, optional
        Where to evaluate the expected singletons and the singleton and
        singleton-plus-doubleton Poisson tail tests. Defaults to the Ewens
        estimate.
    """
    ewens = ewens_mle_theta(spectrum.k, spectrum.n)
    if theta is None:
        theta = ewens
    elif theta <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    return SpectrumSummary(
        n=spectrum.n,
        k=spectrum.k,
        s=s,
        watterson=watterson_theta(s, spectrum.n),
        ewens=ewens,
        theta=theta,
        expected_singletons=expected_singletons(spectrum.n, theta),
        singleton_test=poisson_spectrum_test(spectrum, theta, (1,)),
        low_frequency_test=poisson_spectrum_test(spectrum, theta, (1, 2)),
        tajimas_d=tajimas_d(pi, s, spectrum.n) if pi is not None else None,
    )
