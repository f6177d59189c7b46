# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT
"""Rejection samplers for the posterior of theta and the ancestral process given S_n = s.

A proposal draws theta from its prior and a coalescent tree, and is kept with
probability Po(theta L_n / 2){s} / Po(s){s}. One tree serves every time on
the grid. Replicate ``i`` proposes from its own stream until it accepts, so
results do not depend on how replicates are spread over workers.
"""
from dataclasses import dataclass
import enum
import functools
import logging
import math

import numpy as np

import esfstl
from esfstl.coalescent import genealogy
from esfstl.core import numerics
from esfstl.core.errors import ParameterError, ZeroAcceptanceError
from esfstl.utilities import streams

logger = logging.getLogger(__name__)


class PriorKind(enum.Enum):
    FIXED = "fixed"
    UNIFORM = "uniform"
    GAMMA = "gamma"


@dataclass(frozen=True)
class ThetaPrior:
    """Prior on the scaled mutation rate

    Parameters
    ----------
    kind : PriorKind
    params : tuple of float
        (value,) for FIXED, (low, high) for UNIFORM, (shape, rate) for GAMMA.
    """

    kind: PriorKind
    params: tuple

    def __post_init__(self):
        arity = {PriorKind.FIXED: 1, PriorKind.UNIFORM: 2, PriorKind.GAMMA: 2}[self.kind]
        if len(self.params) != arity:
            raise ParameterError(f"a {self.kind.value} prior takes {arity} parameter(s), got {self.params}")
        if self.kind is PriorKind.FIXED and not self.params[0] > 0:
            raise ParameterError(f"fixed theta must be positive, got {self.params[0]}")
        if self.kind is PriorKind.UNIFORM and not 0 <= self.params[0] < self.params[1]:
            raise ParameterError(f"uniform prior needs 0 <= low < high, got {self.params}")
        if self.kind is PriorKind.GAMMA and not min(self.params) > 0:
            raise ParameterError(f"gamma prior needs positive shape and rate, got {self.params}")

    @classmethod
    def fixed(cls, value):
        return cls(PriorKind.FIXED, (float(value),))

    @classmethod
    def uniform(cls, low, high):
        return cls(PriorKind.UNIFORM, (float(low), float(high)))

    @classmethod
    def gamma(cls, shape, rate):
        return cls(PriorKind.GAMMA, (float(shape), float(rate)))

    @classmethod
    def parse(cls, text):
        """Build a prior from "fixed:2.5", "uniform:0,10" or "gamma:2,0.5"."""
        name, _, values = text.partition(":")
        try:
            kind = PriorKind(name.strip().lower())
            params = tuple(float(v) for v in values.split(",")) if values else ()
        except ValueError:
            raise ParameterError(f"Invalid prior '{text}'. "
                                 f"Acceptable forms: fixed:VALUE, uniform:LOW,HIGH, gamma:SHAPE,RATE") from None
        return cls(kind, params)

    def describe(self):
        return f"{self.kind.value}:{','.join(f'{p:g}' for p in self.params)}"

    def sample(self, rng):
        if self.kind is PriorKind.FIXED:
            return self.params[0]
        if self.kind is PriorKind.UNIFORM:
            low, high = self.params
            # theta = 0 can only be accepted for s = 0
            value = rng.uniform(low, high)
            while value == 0.0:
                value = rng.uniform(low, high)
            return value
        shape, rate = self.params
        return rng.gamma(shape, 1.0 / rate)


@dataclass(frozen=True)
class PosteriorDraw:
    """One accepted replicate

    Parameters
    ----------
    theta : float
    ancestors : numpy.ndarray
        A_n(t) for each time on the grid.
    standing_sites : numpy.ndarray or None
        S_n(t) for each time on the grid; only for the standing-variation sampler.
    tmrca : float
    proposals : int
        Proposals made to get this draw.
    segregating_sites : int
        The conditioning s.
    """

    theta: float
    ancestors: np.ndarray
    standing_sites: np.ndarray
    tmrca: float
    proposals: int
    segregating_sites: int = 0

    @property
    def new_sites(self):
        """S~_n(t) = s - S_n(t): mutations arising in (0, t)"""
        if self.standing_sites is None:
            return None
        return self.segregating_sites - self.standing_sites


def accept_probability(theta, total_length, s):
    """Po(theta L_n / 2){s} / Po(s){s}, at most one"""
    if total_length <= 0:
        raise ParameterError(f"total tree length must be positive, got {total_length}")
    if s < 0:
        raise ParameterError(f"segregating sites must be nonnegative, got {s}")
    log_h = numerics.log_poisson_pmf(0.5 * theta * total_length, s) - numerics.log_poisson_pmf(s, s)
    return min(1.0, math.exp(log_h))


@dataclass(frozen=True)
class RejectionSummary:
    """Means and standard errors of an accepted sample

    Array fields are indexed like ``t_grid``.
    """

    t_grid: np.ndarray
    replicates: int
    proposals: int
    theta_mean: float
    theta_se: float
    tmrca_mean: float
    tmrca_se: float
    ancestors_mean: np.ndarray
    ancestors_se: np.ndarray
    standing_mean: np.ndarray = None
    standing_se: np.ndarray = None

    @property
    def acceptance_rate(self):
        return self.replicates / self.proposals


class RunningMoments:
    """Count, mean and sum of squared deviations, merged pairwise

    Values are floats or numpy arrays of a fixed shape. Merging in a fixed
    order gives bitwise reproducible results.
    """

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add(self, x):
        x = np.asarray(x, dtype=float)
        self.count += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (x - self.mean)

    def merge(self, other):
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            return self
        count = self.count + other.count
        delta = other.mean - self.mean
        self.mean = self.mean + delta * (other.count / count)
        self.m2 = self.m2 + other.m2 + delta * delta * (self.count * other.count / count)
        self.count = count
        return self

    def std_error(self):
        if self.count < 2:
            return np.zeros_like(np.asarray(self.mean, dtype=float))
        return np.sqrt(self.m2 / (self.count - 1) / self.count)


class RejectionTally:
    """Running totals of the accepted draws of one chunk, or of a whole run

    ``ancestor_counts[g, a]`` counts draws with A_n(t_g) = a and
    ``standing_counts[g, j]`` draws with S_n(t_g) = j.
    """

    def __init__(self, n, s, grid_size, standing):
        self.accepted = 0
        self.proposals = 0
        self.starved = False
        self.theta = RunningMoments()
        self.tmrca = RunningMoments()
        self.ancestors = RunningMoments()
        self.ancestor_counts = np.zeros((grid_size, n + 1), dtype=np.int64)
        self.standing = RunningMoments() if standing else None
        self.standing_counts = np.zeros((grid_size, s + 1), dtype=np.int64) if standing else None

    def add(self, draw):
        rows = np.arange(len(draw.ancestors))
        self.accepted += 1
        self.proposals += draw.proposals
        self.theta.add(draw.theta)
        self.tmrca.add(draw.tmrca)
        self.ancestors.add(draw.ancestors)
        self.ancestor_counts[rows, draw.ancestors] += 1
        if self.standing is not None:
            self.standing.add(draw.standing_sites)
            self.standing_counts[rows, draw.standing_sites] += 1

    def merge(self, other):
        self.accepted += other.accepted
        self.proposals += other.proposals
        self.starved = self.starved or other.starved
        self.theta.merge(other.theta)
        self.tmrca.merge(other.tmrca)
        self.ancestors.merge(other.ancestors)
        self.ancestor_counts += other.ancestor_counts
        if self.standing is not None:
            self.standing.merge(other.standing)
            self.standing_counts += other.standing_counts
        return self


@dataclass
class RejectionResult:
    n: int
    s: int
    prior: ThetaPrior
    time_model: genealogy.TimeModel
    t_grid: np.ndarray
    tally: RejectionTally

    @property
    def replicates(self):
        return self.tally.accepted

    @property
    def proposals(self):
        return self.tally.proposals

    @property
    def acceptance_rate(self):
        return self.replicates / self.proposals

    def ancestor_distribution(self, grid_index):
        """P(A_n(t) = a | S_n = s) for a = 0..n, estimated at one grid time"""
        return self.tally.ancestor_counts[grid_index] / self.replicates

    def standing_distribution(self, grid_index):
        """P(S_n(t) = j | S_n = s) for j = 0..s; None without standing variation"""
        if self.tally.standing is None:
            return None
        return self.tally.standing_counts[grid_index] / self.replicates

    def summary(self):
        tally = self.tally
        standing_mean = standing_se = None
        if tally.standing is not None:
            standing_mean, standing_se = tally.standing.mean, tally.standing.std_error()
        return RejectionSummary(self.t_grid, self.replicates, self.proposals, float(tally.theta.mean),
                                float(tally.theta.std_error()), float(tally.tmrca.mean),
                                float(tally.tmrca.std_error()), tally.ancestors.mean, tally.ancestors.std_error(),
                                standing_mean, standing_se)


def _propose_until_accepted(n, s, prior, time_model, t_grid, standing, rng, limit=None):
    """The first accepted draw of one replicate, or None after ``limit`` proposals"""
    attempt = 0
    while limit is None or attempt < limit:
        attempt += 1
        theta = prior.sample(rng)
        times = genealogy.sample_coalescent_times(n, time_model, rng)
        if rng.random() >= accept_probability(theta, times.total_length, s):
            continue
        ancestors = np.array([genealogy.ancestor_count_at(times, t) for t in t_grid], dtype=int)
        standing_sites = None
        if standing:
            ancient = np.array([genealogy.tree_lengths_at(times, t)[1] for t in t_grid])
            standing_sites = rng.binomial(s, np.clip(ancient / times.total_length, 0.0, 1.0))
        return PosteriorDraw(theta, ancestors, standing_sites, times.height, attempt, s)
    return None


def _rejection_chunk(n, s, prior, time_model, t_grid, standing, budget, start, stop, seed):
    """Tally replicates start..stop-1

    Until the chunk's first acceptance at most ``budget`` proposals are made
    (no limit when None); a chunk that spends them is returned starved.
    """
    tally = RejectionTally(n, s, len(t_grid), standing)
    for index in range(start, stop):
        limit = budget - tally.proposals if budget is not None and tally.accepted == 0 else None
        draw = _propose_until_accepted(n, s, prior, time_model, t_grid, standing,
                                       streams.seed_replicate_rng(seed, index), limit)
        if draw is None:
            tally.proposals += limit
            tally.starved = True
            return tally
        tally.add(draw)
    return tally


def _run(n, s, prior, time_model, t_grid, replicates, seed, standing, workers, chunk_size):
    if n < 2:
        raise ParameterError(f"need n >= 2, got {n}")
    if s < 0:
        raise ParameterError(f"segregating sites must be nonnegative, got {s}")
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if t_grid.size == 0:
        raise ParameterError("the time grid is empty")
    if np.any(t_grid < 0):
        raise ParameterError("grid times must be nonnegative")

    # the proposal budget is shared by the chunks
    chunk_size = chunk_size or esfstl.settings.chunk_size
    bounds = streams.chunk_bounds(replicates, chunk_size)
    budget = max(1, math.ceil(int(esfstl.settings.max_proposals) / len(bounds)))
    job = functools.partial(_rejection_chunk, n, s, prior, time_model, t_grid, standing)
    tallies = streams.run_replicates(functools.partial(job, budget), replicates, seed, workers, chunk_size)

    if not any(tally.accepted for tally in tallies):
        spent = sum(tally.proposals for tally in tallies)
        raise ZeroAcceptanceError(
            f"no proposal accepted in {spent} proposals for n={n}, s={s}, prior {prior.describe()}; "
            f"theta and s look incompatible"
        )
    total = RejectionTally(n, s, t_grid.size, standing)
    for (start, stop), tally in zip(bounds, tallies):
        if tally.starved:
            logger.debug("chunk %d-%d spent its share of the proposal budget; rerunning", start, stop)
            tally = job(None, start, stop, seed)
        total.merge(tally)
    result = RejectionResult(n, s, prior, time_model, t_grid, total)
    logger.info("accepted %d of %d proposals (rate %.3g)", result.replicates, result.proposals,
                result.acceptance_rate)
    return result


def run_algorithm3(n, s, prior, time_model, t_grid, replicates, seed=0, workers=None, chunk_size=None):
    """Posterior draws of (theta, A_n(t)) given S_n = s

    Parameters
    ----------
    n : int
        Sample size.
    s : int
        Observed segregating sites.
    prior : ThetaPrior
    time_model : esfstl.coalescent.genealogy.TimeModel
    t_grid : array_like
        Times at which to record the number of ancestors.
    replicates : int
        Accepted draws to collect.
    seed : int
        Master seed; replicate i uses ``seed_replicate_rng(seed, i)``.

    Returns
    -------
    RejectionResult

    Raises
    ------
    ZeroAcceptanceError
        When ``settings.max_proposals`` proposals, shared across the run,
        bring no acceptance.
    """
    return _run(n, s, prior, time_model, t_grid, replicates, seed, False, workers, chunk_size)


def run_algorithm4(n, s, prior, time_model, t_grid, replicates, seed=0, workers=None, chunk_size=None):
    """Posterior draws of (theta, A_n(t), S_n(t)) given S_n = s

    As :func:`run_algorithm3`; each accepted tree also splits the s sites
    binomially by the share of branch length older than t, giving the
    standing variation S_n(t).
    """
    return _run(n, s, prior, time_model, t_grid, replicates, seed, True, workers, chunk_size)
