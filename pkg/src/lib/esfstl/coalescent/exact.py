# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT
"""Exact ancestral-lineage, mutation and allele-count laws of the coalescent.

Time is measured backward from the sample in coalescent units. ``theta`` is
the scaled mutation rate, so each line mutates at rate theta/2 and each pair
of lines coalesces at rate 1.
"""
from dataclasses import dataclass
from functools import lru_cache
import logging
import math

import mpmath
import numpy as np
from numpy.polynomial import polynomial as P
from scipy import linalg, signal, special

import esfstl
from esfstl.core import numerics
from esfstl.core.errors import NegligibleProbabilityError, ParameterError, PrecisionLossError

logger = logging.getLogger(__name__)

INFINITE = math.inf

# tail mass left outside an adaptive table
TABLE_TAIL = 1e-10


@dataclass(frozen=True)
class LineageLawParams:
    """Sample size, mutation rate and time for an ancestral-line law

    Parameters
    ----------
    n : int or INFINITE
        Sample size, at least 1. ``INFINITE`` selects the whole-population law.
    theta : float
        Scaled mutation rate, nonnegative.
    t : float
        Time back from the sample, nonnegative.
    """

    n: float
    theta: float
    t: float

    def __post_init__(self):
        if self.n != INFINITE:
            if int(self.n) != self.n or self.n < 1:
                raise ParameterError(f"n must be a positive integer or INFINITE, got {self.n}")
            object.__setattr__(self, "n", int(self.n))
        if self.theta < 0:
            raise ParameterError(f"theta must be nonnegative, got {self.theta}")
        if self.t < 0:
            raise ParameterError(f"t must be nonnegative, got {self.t}")
        if self.n == INFINITE and self.t == 0:
            raise ParameterError("the infinite-population law needs t > 0")

    @property
    def finite(self):
        return self.n != INFINITE

    def log_rho(self, j):
        j = np.asarray(j, dtype=float)
        return -0.5 * j * (j + self.theta - 1.0) * self.t

    def log_sampling_ratio(self, j):
        """ln(n_[j] / (n+theta)_(j)), elementwise over ``j``"""
        j = np.asarray(j)
        if not self.finite:
            return np.zeros(j.shape)
        table = _log_sampling_table(self.n, float(self.theta))
        index = np.clip(j.astype(int), 0, self.n)
        return np.where(j > self.n, -np.inf, table[index])

    def with_theta(self, theta):
        return LineageLawParams(self.n, theta, self.t)


@lru_cache(maxsize=64)
def _log_sampling_table(n, theta):
    # running sum of ln((n - i)/(n + theta + i)); differencing log-gammas loses digits for large n
    i = np.arange(n, dtype=float)
    steps = np.log1p(-(theta + 2.0 * i) / (n + theta + i))
    table = np.concatenate(([0.0], np.cumsum(steps)))
    table.setflags(write=False)
    return table


# alternating series of samples up to this size are re-summed with mpmath when
# their double-precision error bound exceeds settings.absolute_tolerance
EXACT_SERIES_LIMIT = 100


def _series_cutoff(params, k):
    if params.finite:
        return params.n
    # rho_j decays like exp(-j^2 t / 2); coefficients only grow polynomially
    return k + int(math.ceil(math.sqrt(1800.0 / params.t))) + 10


def _ancestor_terms(params, k):
    """Signed log terms of the alternating series for P(A = k), with their log errors"""
    theta = params.theta
    j = np.arange(max(k, 1), _series_cutoff(params, k) + 1, dtype=float)
    pieces = [params.log_rho(j), np.log(2 * j + theta - 1),
              special.gammaln(k + theta + j - 1), -special.gammaln(k + theta),
              -special.gammaln(k + 1), -special.gammaln(j - k + 1)]
    ratio = params.log_sampling_ratio(j)
    logs = sum(pieces) + ratio
    log_errors = 4 * numerics.EPS * sum(np.abs(p) for p in pieces) + numerics.EPS * j * np.abs(ratio)
    signs = np.where((j - k) % 2 == 0, 1, -1)
    keep = logs > -np.inf
    terms = [numerics.SignedLog(float(lg), int(sg)) for lg, sg in zip(logs[keep], signs[keep])]
    log_errors = list(log_errors[keep])
    if k == 0:
        terms.append(numerics.SignedLog(0.0, 1))
        log_errors.append(0.0)
    return terms, log_errors


def _ancestor_series_mp(params, k, dps):
    with mpmath.workdps(dps):
        theta = mpmath.mpf(params.theta)
        t = mpmath.mpf(params.t)
        first = max(k, 1)
        # (k+theta)_(j-1) / (k! (j-k)!) and n_[j] / (n+theta)_(j), updated as j grows
        coef = mpmath.rf(k + theta, first - 1) / (mpmath.factorial(k) * mpmath.factorial(first - k))
        ratio = mpmath.ff(params.n, first) / mpmath.rf(params.n + theta, first) if params.finite else mpmath.mpf(1)
        total = mpmath.mpf(1) if k == 0 else mpmath.mpf(0)
        for j in range(first, _series_cutoff(params, k) + 1):
            if j > first:
                coef *= (k + theta + j - 2) / (j - k)
                if params.finite:
                    ratio *= (params.n - j + 1) / (params.n + theta + j - 1)
            rho = mpmath.exp(-j * (j + theta - 1) * t / 2)
            term = (2 * j + theta - 1) * rho * coef * ratio
            total += term if (j - k) % 2 == 0 else -term
        return float(total)


def guarded_series(terms, context, fallback, log_errors=0.0, escalate=False):
    """Sum signed terms, re-summing with ``fallback(dps)`` when the guard trips

    The fallback is taken when ``escalate`` is set or
    ``esfstl.settings.precision_fallback`` is on; otherwise the
    PrecisionLossError propagates. ``dps`` is sized from the largest term
    and ``settings.absolute_tolerance``.
    """
    report = numerics.signed_log_sum(terms, log_errors)
    try:
        numerics.check_cancellation(report, context)
    except PrecisionLossError:
        if not (escalate or esfstl.settings.precision_fallback):
            raise
        dps = numerics.extended_precision_digits(report)
        logger.debug("%s: error bound %.3g, recomputing at %d digits", context, report.absolute_error, dps)
        return fallback(dps)
    return report.value


def ancestors_pmf(params, k):
    """Probability that ``params.n`` sample lines have ``k`` mutation-free ancestors

    With theta = 0 this is the law of the number of ancestral lines A_n(t).
    With theta > 0 lines are also lost to mutation, and k = 0 is the event
    that every line has mutated.

    Parameters
    ----------
    params : LineageLawParams
    k : int
        0 <= k <= n; k = 0 only carries mass when theta > 0.

    Returns
    -------
    float

    Raises
    ------
    PrecisionLossError
        When the alternating series fails the guard for a sample larger than
        EXACT_SERIES_LIMIT, or an infinite one, and the precision fallback is
        disabled. Smaller samples are re-summed with mpmath instead.
    """
    n, theta, t = params.n, params.theta, params.t
    if k < 0 or k > n:
        raise ParameterError(f"k must lie in 0..{n}, got {k}")
    if t == 0:
        return 1.0 if k == n else 0.0
    if k == 0 and theta == 0:
        return 0.0
    if n == 1:
        survive = math.exp(-0.5 * theta * t)
        return survive if k == 1 else 1.0 - survive

    terms, log_errors = _ancestor_terms(params, k)
    value = guarded_series(
        terms,
        f"P(A_{n}^{theta:g}({t:g}) = {k})",
        lambda dps: _ancestor_series_mp(params, k, dps),
        log_errors,
        escalate=params.finite and n <= EXACT_SERIES_LIMIT,
    )
    return min(1.0, max(0.0, value))


def ancestors_pmf_vector(params):
    """P(A = k) for k = 0..n as an array (finite n only)"""
    if not params.finite:
        raise ParameterError("ancestors_pmf_vector needs a finite sample size")
    return np.array([ancestors_pmf(params, k) for k in range(params.n + 1)])


def death_process_generator(n, theta):
    """Rate matrix of the pure-death chain on 0..n with rates k(k+theta-1)/2"""
    k = np.arange(n + 1, dtype=float)
    rates = 0.5 * k * (k + theta - 1.0)
    rates[0] = 0.0
    Q = np.diag(-rates)
    Q[np.arange(1, n + 1), np.arange(0, n)] = rates[1:]
    return Q


def ancestors_pmf_expm(n, theta, t):
    """P(A_n^theta(t) = k) for k = 0..n by matrix exponential of the generator"""
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    if t < 0 or theta < 0:
        raise ParameterError("theta and t must be nonnegative")
    transition = linalg.expm(death_process_generator(int(n), theta) * t)
    row = np.clip(transition[int(n)], 0.0, 1.0)
    return row


def ancestors_falling_moment(params, r):
    """E[A_n^theta(t) (A_n^theta(t) - 1) ... (A_n^theta(t) - r + 1)]

    The series has positive terms; those below 1e-16 of the sum are dropped.
    """
    if r < 1:
        raise ParameterError(f"moment order must be at least 1, got {r}")
    n, theta = params.n, params.theta
    if params.t == 0:
        return math.exp(numerics.log_falling_factorial(n, r))

    k = np.arange(r, _series_cutoff(params, r) + 1, dtype=float)
    if k.size == 0:
        return 0.0
    logs = (params.log_rho(k) + np.log(2 * k + theta - 1)
            + special.gammaln(k) - special.gammaln(r) - special.gammaln(k - r + 1)
            + special.gammaln(theta + k + r - 1) - special.gammaln(theta + k)
            + params.log_sampling_ratio(k))
    top = np.max(logs)
    if top == -np.inf:
        return 0.0
    kept = logs[logs > top + math.log(1e-16)]
    return math.exp(top) * math.fsum(np.exp(kept - top))


def event_time_density(params, l):
    """Density at t of the time T_n + ... + T_l until l - 1 lines remain

    Related to the line-count law by the rate l(l+theta-1)/2 at which the
    l-th line is lost.
    """
    if not 2 <= l <= params.n:
        raise ParameterError(f"need 2 <= l <= n, got l={l}, n={params.n}")
    rate = 0.5 * l * (l + params.theta - 1.0)
    return rate * ancestors_pmf(params, l)


@lru_cache(maxsize=64)
def _seg_sites_table(n, theta, s_max):
    probs = np.zeros(s_max + 1)
    probs[0] = 1.0
    if theta == 0:
        probs.setflags(write=False)
        return probs
    for m in range(2, n + 1):
        scale = m - 1 + theta
        probs = signal.lfilter([(m - 1) / scale], [1.0, -theta / scale], probs)
    probs.setflags(write=False)
    return probs


def seg_sites_pmf_vector(n, theta, s_max):
    """P(S_n = s) for s = 0..s_max by the recursion in s and n

    (n - 1 + theta) P(S_n = s) = theta P(S_n = s - 1) + (n - 1) P(S_{n-1} = s)
    """
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    if theta < 0:
        raise ParameterError(f"theta must be nonnegative, got {theta}")
    if s_max < 0:
        raise ParameterError(f"s_max must be nonnegative, got {s_max}")
    return _seg_sites_table(int(n), float(theta), int(s_max))


def seg_sites_pmf(n, theta, s):
    """Probability of ``s`` segregating sites in a sample of ``n``"""
    if s < 0:
        return 0.0
    return float(seg_sites_pmf_vector(n, theta, int(s))[int(s)])


def seg_sites_pgf(n, theta, z):
    """Generating function prod_{j=1}^{n-1} (1 + theta(1-z)/j)^-1 of S_n"""
    j = np.arange(1, int(n), dtype=float)
    return float(np.exp(-np.sum(np.log1p(theta * (1.0 - z) / j))))


def _seg_sites_alternating_mp(n, theta, s, dps):
    with mpmath.workdps(dps):
        theta = mpmath.mpf(theta)
        total = mpmath.mpf(0)
        for l in range(1, n):
            total += (-1) ** (l - 1) * mpmath.binomial(n - 2, l - 1) * (theta / (l + theta)) ** (s + 1)
        return float((n - 1) / theta * total)


def seg_sites_pmf_alternating(n, theta, s):
    """P(S_n = s) from the closed-form alternating sum over l = 1..n-1

    Guarded like every alternating series in this module, and re-summed
    with mpmath for n <= EXACT_SERIES_LIMIT when double precision is not
    enough. Use it as a check on :func:`seg_sites_pmf` rather than as the
    working evaluation.
    """
    if n == 1 or theta == 0:
        return 1.0 if s == 0 else 0.0
    l = np.arange(1, n, dtype=float)
    pieces = [math.log(n - 1), -math.log(theta), special.gammaln(n - 1), -special.gammaln(l),
              -special.gammaln(n - l), (s + 1) * (math.log(theta) - np.log(l + theta))]
    logs = sum(pieces)
    log_errors = 4 * numerics.EPS * (sum(abs(p) for p in pieces[:5])
                                     + (s + 1) * (abs(math.log(theta)) + np.abs(np.log(l + theta))))
    terms = [numerics.SignedLog(float(lg), 1 if i % 2 == 0 else -1) for i, lg in enumerate(logs)]
    value = guarded_series(terms, f"P(S_{n} = {s}) alternating sum",
                           lambda dps: _seg_sites_alternating_mp(n, theta, s, dps),
                           log_errors, escalate=n <= EXACT_SERIES_LIMIT)
    return min(1.0, max(0.0, value))


def num_alleles_pmf(n, theta, k):
    """Probability of ``k`` distinct alleles in a sample of ``n``"""
    if theta <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
    return math.exp(k * math.log(theta) + numerics.log_stirling1_unsigned(n, k)
                    - numerics.log_rising_factorial(theta, n))


def mutations_while_at_least_pgf(n, theta, l, z):
    """Generating function of mutations arising while at least l lines remain"""
    if not 2 <= l <= n:
        raise ParameterError(f"need 2 <= l <= n, got l={l}, n={n}")
    j = np.arange(l - 1, n, dtype=float)
    return float(np.exp(-np.sum(np.log1p(theta * (1.0 - z) / j))))


def mutations_while_at_least_pmf(n, theta, l, k):
    """Probability of ``k`` mutations arising while at least ``l`` lines remain"""
    return numerics.beta_mixture_poisson_pmf(l, n, theta, k)


def _tail_product(theta_z, start, n):
    j = np.arange(start, n, dtype=float)
    return float(np.exp(-np.sum(np.log1p(theta_z / j))))


def mut_anc_joint_pgf(params, l, z):
    """E[z^(mutations in (0, t)) ; A_n(t) = l]

    Parameters
    ----------
    params : LineageLawParams
        Finite sample size.
    l : int
        2 <= l <= n.
    z : float
        Generating-function argument in [0, 1].
    """
    if not params.finite:
        raise ParameterError("the joint generating function needs a finite sample size")
    if not 2 <= l <= params.n:
        raise ParameterError(f"need 2 <= l <= n, got l={l}, n={params.n}")
    if not 0 <= z <= 1:
        raise ParameterError(f"z must lie in [0, 1], got {z}")
    theta_z = params.theta * (1.0 - z)
    return _tail_product(theta_z, l, params.n) * ancestors_pmf(params.with_theta(theta_z), l)


def stationary_joint_pgf_prob(params, l, z):
    """E[z^S_n ; A_n(t) = l] with all mutations counted, standing variation included

    Equal to H_n(z) P(A_n^{theta(1-z)}(t) = l) for l >= 2. For l = 1 the
    event that every line was lost to mutation is absorbed into the cell.
    """
    if not params.finite:
        raise ParameterError("the joint generating function needs a finite sample size")
    if not 1 <= l <= params.n:
        raise ParameterError(f"need 1 <= l <= n, got l={l}, n={params.n}")
    if not 0 <= z <= 1:
        raise ParameterError(f"z must lie in [0, 1], got {z}")
    theta_z = params.theta * (1.0 - z)
    shifted = params.with_theta(theta_z)
    mass = ancestors_pmf(shifted, l)
    if l == 1:
        mass += ancestors_pmf(shifted, 0)
    return seg_sites_pgf(params.n, params.theta, z) * mass


@dataclass(frozen=True)
class CondMeanTables:
    """Coefficient tables behind E[A_n(t) | S_n = r]

    ``a[r, k]`` is the coefficient of z^r in H_n(z) / (n + theta(1-z))_(k),
    ``b`` and ``c`` are the derived tables. All three are stored scaled by the
    falling factorial n_[k] along the k axis, which keeps them of order one.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    n: int
    theta: float
    t: float


def cond_mean_tables(n, theta, t, r_max):
    a = np.zeros((r_max + 1, n + 1))
    a[:, 0] = seg_sites_pmf_vector(n, theta, r_max)
    for k in range(1, n + 1):
        scale = n + theta + k - 1
        a[:, k] = signal.lfilter([(n - k + 1) / scale], [1.0, -theta / scale], a[:, k - 1])
    b = np.zeros_like(a)
    b[:, 1:] = (2 * np.arange(1, n + 1) + theta - 1) * a[:, 1:]
    b[1:, 1:] -= theta * a[:-1, 1:]
    c = np.zeros_like(a)
    for k in range(1, n + 1):
        mean = 0.5 * k * theta * t
        weights = np.exp([numerics.log_poisson_pmf(mean, m) for m in range(r_max + 1)])
        c[:, k] = np.convolve(weights, b[:, k])[:r_max + 1]
    return CondMeanTables(a=a, b=b, c=c, n=n, theta=theta, t=t)


def _all_lost_coefficient(tables, r):
    """[z^r] H_n(z) P(A_n^{theta(1-z)}(t) = 0)

    The probability that every line has mutated by time t, as a generating
    function in z. It is an alternating series in j, so it is guarded.
    """
    n, theta, t = tables.n, tables.theta, tables.t
    terms = [numerics.SignedLog.from_value(tables.a[r, 0])]
    poisson = np.zeros(r + 1)
    for j in range(1, n + 1):
        log_rho = -0.5 * j * (j + theta - 1) * t
        if log_rho < -745:
            break
        # (2j + x - 1)(x)_(j-1) / j! with x = theta - theta z, as a polynomial in z
        x = np.array([theta, -theta])
        poly = P.polyadd(x, [2 * j - 1]) / j
        for i in range(j - 1):
            poly = P.polymul(poly, P.polyadd(x, [i]) / (i + 1))[:r + 1]
        mean = 0.5 * j * theta * t
        for m in range(r + 1):
            poisson[m] = math.exp(special.xlogy(m, mean) - special.gammaln(m + 1))
        series = P.polymul(P.polymul(poly, tables.a[:r + 1, j])[:r + 1], poisson)[:r + 1]
        coefficient = series[r] if len(series) > r else 0.0
        value = (-1) ** j * math.exp(log_rho) * coefficient
        terms.append(numerics.SignedLog.from_value(value))
    report = numerics.signed_log_sum(terms)
    numerics.check_cancellation(report, f"all-lost coefficient r={r}")
    return report.value


def cond_mean_ancestors(n, theta, t, r):
    """E[A_n(t) | S_n = r], the mean number of ancestral lines given r segregating sites

    Parameters
    ----------
    n : int
        Sample size.
    theta : float
        Scaled mutation rate, positive.
    t : float
        Time back from the sample.
    r : int
        Observed number of segregating sites.

    Returns
    -------
    float
        A value in [1, n].

    Raises
    ------
    NegligibleProbabilityError
        If P(S_n = r) < 1e-300.
    """
    if theta <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    if r < 0 or t < 0:
        raise ParameterError("r and t must be nonnegative")
    n, r = int(n), int(r)
    evidence = seg_sites_pmf(n, theta, r)
    if evidence < 1e-300:
        raise NegligibleProbabilityError(f"P(S_{n} = {r}) = {evidence:.3e} is too small to condition on")
    if t == 0 or n == 1:
        return float(n)

    tables = cond_mean_tables(n, theta, t, r)
    k = np.arange(1, n + 1)
    rho = np.exp(-0.5 * k * (k - 1.0) * t)
    joint = math.fsum(rho * tables.c[r, 1:])
    joint += _all_lost_coefficient(tables, r)
    return float(min(n, max(1.0, joint / evidence)))


class JointMutAlleleTable:
    """Joint law of the number of mutations i and alleles j back to the ancestor

    Entries ``p(i, j; a_theta, a)`` start from ``a`` lines of which
    ``a_theta`` carry no mutation yet. The full-sample law is at
    ``a_theta = a = n``.
    """

    def __init__(self, n, theta, layers, i_max):
        self.n = n
        self.theta = theta
        self.i_max = i_max
        self._layers = layers

    def __getitem__(self, key):
        i, j, a_theta, a = key
        return self.probability(i, j, a_theta, a)

    def layer(self, a_theta=None, a=None):
        a = self.n if a is None else a
        a_theta = a if a_theta is None else a_theta
        try:
            return self._layers[(a_theta, a)]
        except KeyError:
            raise ParameterError(f"no state with a_theta={a_theta}, a={a}") from None

    def probability(self, i, j, a_theta=None, a=None):
        layer = self.layer(a_theta, a)
        if i < 0 or j < 0 or j >= layer.shape[1]:
            return 0.0
        if i > self.i_max:
            raise ParameterError(f"i={i} is beyond the tabulated range {self.i_max}")
        return float(layer[i, j])

    def mutation_marginal(self):
        return self.layer().sum(axis=1)

    def allele_marginal(self):
        return self.layer().sum(axis=0)

    @property
    def tail_mass(self):
        return max(0.0, 1.0 - float(self.layer().sum()))


def _fill_joint_layers(n, theta, i_max):
    width = n + 1
    layers = {}
    # a_theta = 1 boundary: only the mutation count moves
    boundary = np.zeros(i_max + 1)
    boundary[0] = 1.0
    for a in range(1, n + 1):
        if a >= 2:
            scale = a - 1 + theta
            boundary = signal.lfilter([(a - 1) / scale], [1.0, -theta / scale], boundary)
        layer = np.zeros((i_max + 1, width))
        layer[:, 1] = boundary
        layers[(1, a)] = layer

    for a in range(2, n + 1):
        scale = a * (a - 1 + theta)
        for a_theta in range(2, a + 1):
            b = a - a_theta
            rhs = np.zeros((i_max + 1, width))
            if b > 0:
                rhs += (a + a_theta - 1) * b * layers[(a_theta, a - 1)]
            rhs += a_theta * (a_theta - 1) * layers[(a_theta - 1, a - 1)]
            shifted = np.zeros((i_max + 1, width))
            shifted[1:, 1:] = layers[(a_theta - 1, a)][:-1, :-1]
            rhs += a_theta * theta * shifted
            layers[(a_theta, a)] = signal.lfilter([1.0 / scale], [1.0, -b * theta / scale], rhs, axis=0)
    return layers


def joint_mut_allele_table(n, theta, i_max=None):
    """Tabulate the joint law of (mutations, alleles) for a sample of ``n``

    ``i_max`` is doubled until the mass left beyond it is below 1e-10.
    """
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    if theta <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    n = int(n)
    harmonic = sum(1.0 / j for j in range(1, n))
    if i_max is None:
        i_max = max(16, int(4 * theta * harmonic) + 16)
    while True:
        table = JointMutAlleleTable(n, theta, _fill_joint_layers(n, theta, i_max), i_max)
        if table.tail_mass < TABLE_TAIL:
            return table
        logger.debug("joint table for n=%d: tail %.2e at i_max=%d, doubling", n, table.tail_mass, i_max)
        i_max *= 2


def esf_log_probability(counts, theta):
    """ln of the Ewens sampling formula probability of an unordered configuration"""
    counts = np.asarray(counts, dtype=int)
    if counts.size == 0 or np.any(counts < 1):
        raise ParameterError("haplotype counts must be positive")
    if theta <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    n = int(counts.sum())
    k = counts.size
    _, alpha = np.unique(counts, return_counts=True)
    return float(special.gammaln(n + 1) - np.sum(np.log(counts)) - np.sum(special.gammaln(alpha + 1))
                 + k * math.log(theta) - numerics.log_rising_factorial(theta, n))


class _SampleRecursion:
    def __init__(self, theta):
        self.theta = theta
        self.memo = {}

    def __call__(self, counts, s):
        key = (counts, s)
        if key not in self.memo:
            self.memo[key] = self._evaluate(counts, s)
        return self.memo[key]

    def _evaluate(self, counts, s):
        k = len(counts)
        n = sum(counts)
        if s - k + 1 < 0 or (k == 1 and s > 0):
            return 0.0
        if n == 1:
            return 1.0
        theta = self.theta
        total = 0.0
        for idx, c in enumerate(counts):
            if c > 1 and (idx == 0 or counts[idx - 1] != c):
                multiplicity = counts.count(c)
                reduced = _canonical(counts[:idx] + (c - 1,) + counts[idx + 1:])
                total += multiplicity * (c - 1) / (n + theta - 1) * self(reduced, s)
        if s > 0:
            singles = counts.count(1)
            if singles:
                total += theta / (n + theta - 1) * singles / n * self(counts, s - 1)
                rest = list(counts)
                rest.remove(1)
                for idx, c in enumerate(rest):
                    if idx > 0 and rest[idx - 1] == c:
                        continue
                    multiplicity = rest.count(c)
                    merged = _canonical(tuple(rest[:idx]) + (c + 1,) + tuple(rest[idx + 1:]))
                    total += (singles * multiplicity * theta / (n + theta - 1) * (c + 1) / n
                              * self(merged, s - 1))
        return total


def _canonical(counts):
    return tuple(sorted(c for c in counts if c > 0))


def sample_probability(counts, s, theta):
    """Age-labelled probability p(n; s) of a configuration and segregating-site count

    Evaluated exactly by the forward recursion over configurations, so only
    practical for small samples. Divide by prod(alpha_j!) for the unordered
    probability, or call :func:`unordered_sample_probability`.
    """
    if theta <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    counts = _canonical(counts)
    if not counts or any(c < 0 for c in counts):
        raise ParameterError("haplotype counts must be positive")
    return _SampleRecursion(theta)(counts, int(s))


def unordered_sample_probability(counts, s, theta):
    _, alpha = np.unique(np.asarray(counts, dtype=int), return_counts=True)
    return sample_probability(counts, s, theta) / float(np.prod(special.factorial(alpha)))
