# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT
"""Exception hierarchy shared by every esfstl module.

The command line maps these onto exit codes, so library code raises the most
specific class that applies and lets it propagate.
"""


class EsfError(Exception):
    """Base class for all errors raised by esfstl"""

    exit_code = 1


class ParameterError(EsfError, ValueError):
    """An argument lies outside the domain of the operation"""

    exit_code = 2


class DataError(EsfError):
    """A dataset could not be parsed or contradicts the declared run"""

    exit_code = 3


class NumericalError(EsfError):
    """A numerical guard tripped; the value that would be returned is unreliable"""

    exit_code = 4


class PrecisionLossError(NumericalError):
    """Catastrophic cancellation in a signed sum

    Parameters
    ----------
    cancellation_digits : float
        Decimal digits lost, log10 of the largest term over the result.
    absolute_error : float
        Rounding-error bound of the double-precision sum.
    """

    def __init__(self, message, cancellation_digits=None, absolute_error=None):
        super().__init__(message)
        self.cancellation_digits = cancellation_digits
        self.absolute_error = absolute_error


class QuadratureError(NumericalError):
    """Adaptive quadrature did not reach the requested tolerance

    Parameters
    ----------
    achieved_tolerance : float
        The error estimate reported by the integrator.
    """

    def __init__(self, message, achieved_tolerance=None):
        super().__init__(message)
        self.achieved_tolerance = achieved_tolerance


class NegligibleProbabilityError(NumericalError):
    """Conditioning on an event whose probability underflows"""


class SamplingError(EsfError):
    """A sampler could not produce a valid draw"""


class DeadEndError(SamplingError):
    """No backward move is admissible from the current state"""


class ZeroAcceptanceError(SamplingError):
    """A rejection sampler accepted nothing before its proposal limit"""


class BoundaryError(ParameterError):
    """An estimator sits on the boundary of its parameter space"""


class UndefinedStatisticError(ParameterError):
    """A statistic is undefined for the supplied data"""
