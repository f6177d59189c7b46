# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT
"""Log-space primitives used throughout the package.

Probabilities are carried as natural logarithms. Alternating series are
summed as :class:`SignedLog` terms by :func:`signed_log_sum`, which reports
how many decimal digits cancelled so callers can refuse a result that is
mostly rounding error.
"""
from dataclasses import dataclass
from functools import lru_cache
import logging
import math

import numpy as np
from scipy import integrate, special, stats

import esfstl
from esfstl.core.errors import ParameterError, PrecisionLossError, QuadratureError

logger = logging.getLogger(__name__)

LN10 = math.log(10.0)

EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class SignedLog:
    """A real number stored as sign and log-magnitude

    Parameters
    ----------
    log_magnitude : float
        Natural log of the absolute value. ``-inf`` for zero.
    sign : int
        One of -1, 0, +1. Zero exactly when the value is zero.
    """

    log_magnitude: float
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ParameterError(f"sign must be -1, 0 or 1, got {self.sign}")
        if self.sign == 0 and self.log_magnitude != -math.inf:
            object.__setattr__(self, "log_magnitude", -math.inf)
        elif self.log_magnitude == -math.inf and self.sign != 0:
            object.__setattr__(self, "sign", 0)
        if math.isnan(self.log_magnitude):
            raise ParameterError("log_magnitude is NaN")

    @classmethod
    def from_value(cls, value):
        if value == 0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(value)), 1 if value > 0 else -1)

    @classmethod
    def zero(cls):
        return cls(-math.inf, 0)

    @property
    def value(self):
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def __neg__(self):
        return SignedLog(self.log_magnitude, -self.sign)

    def __add__(self, other):
        return signed_log_sum([self, other]).result

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, SignedLog):
            return SignedLog(self.log_magnitude + other.log_magnitude, self.sign * other.sign)
        return self * SignedLog.from_value(other)


@dataclass(frozen=True)
class CancellationReport:
    """Outcome of a signed summation

    Parameters
    ----------
    result : SignedLog
        The sum.
    max_term_log : float
        Log-magnitude of the largest term.
    cancellation_digits : float
        log10 of the largest term's magnitude over the result's magnitude,
        clipped at zero; infinite when the terms cancel exactly.
    terms : int
        Number of nonzero terms summed.
    absolute_error : float
        Bound on the rounding error of the linear-scale result, counting the
        error of each term's log-magnitude as well as the scaling.
    """

    result: SignedLog
    max_term_log: float
    cancellation_digits: float
    terms: int = 0
    absolute_error: float = 0.0

    @property
    def value(self):
        return self.result.value


def log_rising_factorial(x, n):
    """Return ln(x (x+1) ... (x+n-1)); the empty product for n = 0 is 1."""
    n = int(n)
    if n < 0:
        raise ParameterError(f"rising factorial length must be nonnegative, got {n}")
    if n == 0:
        return 0.0
    if x <= 0:
        raise ParameterError(f"rising factorial of {x} over {n} factors has a nonpositive factor")
    if n <= 32:
        return math.fsum(math.log(x + j) for j in range(n))
    return float(special.gammaln(x + n) - special.gammaln(x))


def log_falling_factorial(x, n):
    """Return ln(x (x-1) ... (x-n+1)), or -inf when a factor is zero."""
    n = int(n)
    if n < 0:
        raise ParameterError(f"falling factorial length must be nonnegative, got {n}")
    if n == 0:
        return 0.0
    if x - n + 1 <= 0:
        if float(x).is_integer() and x >= 0:
            return -math.inf
        raise ParameterError(f"falling factorial of {x} over {n} factors has a nonpositive factor")
    return log_rising_factorial(x - n + 1, n)


@lru_cache(maxsize=16)
def _stirling1_row(n):
    # row[k] = ln|S_k^n| for k = 0..n
    row = np.array([-np.inf, 0.0])
    for m in range(2, n + 1):
        shifted = np.concatenate(([-np.inf], row))
        grown = np.concatenate((row, [-np.inf])) + math.log(m - 1)
        row = np.logaddexp(shifted, grown)
    row.setflags(write=False)
    return row


def log_stirling1_row(n):
    """ln|S_k^n| for k = 0..n as a read-only array"""
    if n < 1:
        raise ParameterError(f"Stirling numbers need n >= 1, got {n}")
    return _stirling1_row(int(n))


def log_stirling1_unsigned(n, k):
    """ln of the unsigned Stirling number of the first kind |S_k^n|

    Parameters
    ----------
    n : int
        Number of elements, at least 1.
    k : int
        Number of cycles, 1 <= k <= n.

    Returns
    -------
    float
    """
    if not 1 <= k <= n:
        raise ParameterError(f"Stirling number |S_{k}^{n}| lies outside the triangle 1 <= k <= n")
    return float(log_stirling1_row(n)[k])


def signed_log_sum(terms, log_errors=0.0):
    """Sum SignedLog terms and report the cancellation

    Terms are scaled by the largest magnitude and summed largest first with
    an exactly rounded accumulator, so the result does not depend on the
    order of ``terms``.

    Parameters
    ----------
    terms : iterable of SignedLog
    log_errors : float or sequence of float
        Bound on the absolute error of each term's log-magnitude, one per
        term or one for all. A term computed from log-gamma values of size G
        carries an error of a few ``EPS * G``.

    Returns
    -------
    CancellationReport
    """
    terms = list(terms)
    log_errors = np.broadcast_to(np.asarray(log_errors, dtype=float), (len(terms),))
    live = [(term, err) for term, err in zip(terms, log_errors) if term.sign != 0]
    if not live:
        return CancellationReport(SignedLog.zero(), -math.inf, 0.0, 0)

    live.sort(key=lambda pair: pair[0].log_magnitude, reverse=True)
    top = live[0][0].log_magnitude
    if top == math.inf:
        raise ParameterError("cannot sum an infinite term")
    scaled = [math.exp(term.log_magnitude - top) for term, _ in live]
    total = math.fsum(term.sign * x for (term, _), x in zip(live, scaled))
    # exp() of the shifted log adds about EPS * |log| to each term's relative error
    spread = math.fsum(x * (err + EPS * (abs(term.log_magnitude) + 2.0)) for (term, err), x in zip(live, scaled))
    log_error_bound = top + math.log(spread) if spread > 0 else -math.inf
    absolute_error = math.exp(log_error_bound) if log_error_bound < 709.0 else math.inf

    if total == 0.0:
        return CancellationReport(SignedLog.zero(), top, math.inf, len(live), absolute_error)

    result = SignedLog(top + math.log(abs(total)), 1 if total > 0 else -1)
    digits = max(0.0, (top - result.log_magnitude) / LN10)
    return CancellationReport(result, top, digits, len(live), absolute_error)


def effective_cancellation(report, absolute_tolerance=None):
    """Digits lost relative to max(|result|, absolute_tolerance)

    A probability that is genuinely tiny is allowed to come out of a sum of
    order-one terms; only the loss against the absolute floor counts.
    """
    if report.terms == 0:
        return 0.0
    if absolute_tolerance is None:
        absolute_tolerance = esfstl.settings.absolute_tolerance
    floor = max(report.result.log_magnitude, math.log(absolute_tolerance))
    return max(0.0, (report.max_term_log - floor) / LN10)


def check_cancellation(report, context=""):
    """Raise PrecisionLossError when ``report`` fails the configured guard

    The guard trips when more than ``settings.cancellation_digits`` digits
    cancel, or when the rounding-error bound of the sum exceeds
    ``settings.absolute_tolerance``.
    """
    digits = effective_cancellation(report)
    limit = esfstl.settings.cancellation_digits
    tolerance = esfstl.settings.absolute_tolerance
    if digits > limit or report.absolute_error > tolerance:
        raise PrecisionLossError(
            f"{context}: {digits:.1f} digits cancelled (limit {limit:g}), "
            f"error bound {report.absolute_error:.3g} (tolerance {tolerance:g})",
            cancellation_digits=digits,
            absolute_error=report.absolute_error,
        )
    return report


def extended_precision_digits(report, tolerance=None):
    """Decimal digits an exact re-summation of ``report``'s series needs

    Enough to resolve ``tolerance`` (default ``settings.absolute_tolerance``)
    below the largest term, with ten guard digits.
    """
    if tolerance is None:
        tolerance = esfstl.settings.absolute_tolerance
    if report.terms == 0:
        return 30
    headroom = (max(report.max_term_log, 0.0) + math.log(report.terms)) / LN10
    return int(math.ceil(headroom - math.log10(tolerance))) + 10


def log_poisson_pmf(lam, s):
    """ln Po(lam){s}; lam = 0 puts all mass on s = 0."""
    if lam < 0:
        raise ParameterError(f"Poisson mean must be nonnegative, got {lam}")
    if s < 0:
        return -math.inf
    if lam == 0:
        return 0.0 if s == 0 else -math.inf
    return float(special.xlogy(s, lam) - lam - special.gammaln(s + 1))


def log_binomial_pmf(trials, p, k):
    """ln of the Binomial(trials, p) mass at k"""
    if not 0 <= p <= 1:
        raise ParameterError(f"binomial probability must lie in [0, 1], got {p}")
    return float(stats.binom.logpmf(k, trials, p))


def _mixture_log_integrand(u, l, n, theta, k, log_norm):
    value = -(l - 1 + theta) * u + special.xlogy(k, theta * u) - special.gammaln(k + 1) - log_norm
    if n > l:
        value = value + (n - l) * np.log1p(-np.exp(-u))
    return value


def beta_mixture_poisson_pmf(l, n, theta, k):
    """Mass at k of a Poisson(-theta ln X) law mixed over X ~ Beta(l-1, n-l+1)

    This is the law of the number of mutations that arise while a sample of
    ``n`` still has at least ``l`` ancestors. The integral is taken over
    u = -ln x so the logarithmic rate is smooth near x = 0.

    Parameters
    ----------
    l : int
        Ancestor threshold, 2 <= l <= n.
    n : int
        Sample size.
    theta : float
        Scaled mutation rate, positive.
    k : int
        Mutation count.

    Returns
    -------
    float
        A probability in [0, 1].

    Raises
    ------
    QuadratureError
        When the integrator cannot reach the configured absolute tolerance.
    """
    if not 2 <= l <= n:
        raise ParameterError(f"need 2 <= l <= n, got l={l}, n={n}")
    if theta <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    if k < 0:
        return 0.0

    tolerance = esfstl.settings.absolute_tolerance
    log_norm = special.betaln(l - 1, n - l + 1)

    def integrand(u):
        if u <= 0:
            return 0.0 if (k > 0 or n > l) else math.exp(-log_norm)
        return math.exp(_mixture_log_integrand(u, l, n, theta, k, log_norm))

    # the Poisson factor peaks near u = k / (l - 1 + theta)
    split = 2.0 * k / (l - 1 + theta) + 1.0
    total = 0.0
    error = 0.0
    for low, high in ((0.0, split), (split, np.inf)):
        value, abserr, *rest = integrate.quad(integrand, low, high, epsabs=tolerance, epsrel=1e-10,
                                              limit=200, full_output=1)
        if len(rest) > 1 and abserr > tolerance:
            raise QuadratureError(
                f"quadrature for mixture mass l={l}, n={n}, theta={theta}, k={k} did not converge",
                achieved_tolerance=abserr,
            )
        total += value
        error += abserr

    logger.debug("mixture mass l=%d n=%d k=%d: %.3e (+/- %.1e)", l, n, k, total, error)
    return min(1.0, max(0.0, total))
