# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT
"""Sequential importance sampling of haplotype and mutation histories.

A path starts from the observed configuration and segregating-site count and
moves backward one event at a time until a single line remains. Each step
picks a line uniformly: a line of a repeated haplotype coalesces with a copy
of itself, a singleton loses a mutation. The path weight is the product of
forward transition probabilities divided by the proposal probabilities, and
its mean is the age-labelled probability p(n; s) of the sample.

Haplotypes keep the label of their position in the observed input, so
per-haplotype estimates come back in input order.
"""
from dataclasses import dataclass, field
import enum
import logging
import math

import numpy as np
from scipy import special

from esfstl.coalescent import genealogy
from esfstl.core.errors import DeadEndError, ParameterError
from esfstl.utilities import streams

logger = logging.getLogger(__name__)

# warn when the effective sample size falls below this share of the replicates
LOW_ESS_FRACTION = 0.01


@dataclass(frozen=True)
class ObservedSample:
    """Haplotype counts in input order and the number of segregating sites"""

    counts: tuple
    s: int

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if not self.counts or any(c < 1 for c in self.counts):
            raise ParameterError("haplotype counts must be positive")
        if sum(self.counts) < 2:
            raise ParameterError("a sample needs at least two genes")
        if self.s < 0:
            raise ParameterError(f"segregating sites must be nonnegative, got {self.s}")

    @property
    def n(self):
        return sum(self.counts)

    @property
    def k(self):
        return len(self.counts)

    @property
    def possible(self):
        """False when p(n; s) is zero: too few sites, or sites on a monomorphic sample"""
        return self.s - self.k + 1 >= 0 and not (self.k == 1 and self.s > 0)

    @property
    def log_label_factor(self):
        """ln prod_j alpha_j!, the ratio of the age-labelled to the unordered probability"""
        _, alpha = np.unique(self.counts, return_counts=True)
        return float(np.sum(special.gammaln(alpha + 1)))


class MoveKind(enum.Enum):
    COALESCE = "coalesce"
    DEFINING_MUTATION = "defining"
    EXTRA_MUTATION = "extra"


@dataclass(frozen=True)
class Move:
    """One backward event; ``haplotype`` and ``target`` are input-order labels"""

    kind: MoveKind
    haplotype: int = -1
    target: int = -1

    @property
    def is_mutation(self):
        return self.kind is not MoveKind.COALESCE


@dataclass(frozen=True)
class ISState:
    """Current labelled counts, remaining mutations, backward time and log weight

    Removed haplotypes keep their slot with count zero.
    """

    counts: tuple
    s_rem: int
    time: float = 0.0
    log_weight: float = 0.0

    @classmethod
    def initial(cls, sample):
        return cls(sample.counts, sample.s)

    @property
    def lines(self):
        return sum(self.counts)

    @property
    def haplotypes(self):
        return sum(1 for c in self.counts if c > 0)

    @property
    def singletons(self):
        return sum(1 for c in self.counts if c == 1)

    @property
    def terminal(self):
        return self.lines == 1

    def apply(self, move):
        counts = list(self.counts)
        s_rem = self.s_rem
        if move.kind is MoveKind.COALESCE:
            counts[move.haplotype] -= 1
        elif move.kind is MoveKind.DEFINING_MUTATION:
            counts[move.haplotype] = 0
            counts[move.target] += 1
            s_rem -= 1
        else:
            s_rem -= 1
        return ISState(tuple(counts), s_rem, self.time, self.log_weight)


@dataclass(frozen=True)
class Proposal:
    move: Move
    state: ISState
    log_probability: float


def _mutation_options(state):
    """(defining allowed, extra allowed) for a singleton of ``state``"""
    k = state.haplotypes
    defining = state.s_rem >= 1 and (k >= 3 or (k == 2 and state.s_rem == 1))
    extra = state.s_rem - k + 1 > 0
    return defining, extra


def admissible_moves(state):
    """Every backward move from ``state`` with its proposal probability

    Returns
    -------
    list of (Move, float)
        Probabilities sum to one. The extra-mutation move is aggregated over
        singletons.
    """
    if state.terminal:
        return []
    n = state.lines
    moves = [(Move(MoveKind.COALESCE, i), c / n) for i, c in enumerate(state.counts) if c > 1]
    q = state.singletons
    if q:
        defining, extra = _mutation_options(state)
        if defining:
            share = 1.0 / n if extra else 1.0 / (n - 1)
            for i, c in enumerate(state.counts):
                if c != 1:
                    continue
                moves.extend((Move(MoveKind.DEFINING_MUTATION, i, l), share * m / n)
                             for l, m in enumerate(state.counts) if l != i and m > 0)
        if extra:
            moves.append((Move(MoveKind.EXTRA_MUTATION), q / n ** 2 if defining else q / n))
    if not moves:
        raise DeadEndError(f"no admissible move from counts {state.counts} with {state.s_rem} mutations")
    return moves


def _locate(counts, pick):
    """Index of the haplotype holding line number ``pick`` (0-based)"""
    rest = pick
    for i, c in enumerate(counts):
        if rest < c:
            return i
        rest -= c
    raise ParameterError(f"line {pick} is beyond a sample of {sum(counts)}")


def _next_move(counts, lines, haplotypes, singletons, s_rem, u, v):
    """The move chosen by the uniforms ``u`` and ``v``

    Returns
    -------
    (int, int, float)
        ``source``, the haplotype losing a line (-1 for an extra mutation),
        ``target``, the haplotype a singleton joins (-1 unless it loses its
        defining mutation), and the proposal probability.
    """
    i = _locate(counts, int(u * lines))
    c = counts[i]
    if c > 1:
        return i, -1, c / lines
    defining = s_rem >= 1 and (haplotypes >= 3 or (haplotypes == 2 and s_rem == 1))
    extra = s_rem - haplotypes + 1 > 0
    if defining and extra:
        l = _locate(counts, int(v * lines))
        if l == i:
            return -1, -1, singletons / lines ** 2
        return i, l, counts[l] / lines ** 2
    if defining:
        pick = int(v * (lines - 1))
        if pick >= sum(counts[:i]):
            pick += 1
        l = _locate(counts, pick)
        return i, l, counts[l] / ((lines - 1) * lines)
    if extra:
        return -1, -1, singletons / lines
    raise DeadEndError(f"no admissible move from counts {tuple(counts)} with {s_rem} mutations")


def _as_move(source, target):
    if target >= 0:
        return Move(MoveKind.DEFINING_MUTATION, source, target)
    if source >= 0:
        return Move(MoveKind.COALESCE, source)
    return Move(MoveKind.EXTRA_MUTATION)


def propose_step(state, rng):
    """Draw the next backward move

    Picks a line uniformly. A line of a repeated haplotype coalesces. A
    singleton either loses its defining mutation, joining the haplotype of a
    second uniformly picked line, or loses an extra mutation when the second
    pick falls on itself. Moves forbidden by the site count are left out of
    the second pick.

    Returns
    -------
    Proposal
    """
    if state.terminal:
        raise DeadEndError("the path has already reached its most recent common ancestor")
    u, v = rng.random(2)
    source, target, probability = _next_move(state.counts, state.lines, state.haplotypes, state.singletons,
                                             state.s_rem, u, v)
    move = _as_move(source, target)
    return Proposal(move, state.apply(move), math.log(probability))


def forward_log_probability(state, move, theta):
    """ln of the forward transition probability that undoes ``move``

    The one-step factor of the recursion for p(n; s) in the constant-size
    model.
    """
    n = state.lines
    scale = n + theta - 1
    if move.kind is MoveKind.COALESCE:
        return math.log((state.counts[move.haplotype] - 1) / scale)
    if move.kind is MoveKind.DEFINING_MUTATION:
        return math.log(theta / scale * (state.counts[move.target] + 1) / n)
    return math.log(theta / scale * state.singletons / n)


def step_log_weight(state, move, log_proposal_prob, theta):
    """ln(forward probability) - ln(proposal probability) for one step"""
    return forward_log_probability(state, move, theta) - log_proposal_prob


def _walk(sample, theta, rng):
    """Draw every move of one path with a single batch of uniforms

    Returns
    -------
    (numpy.ndarray, numpy.ndarray, numpy.ndarray)
        Per step: source, target and forward over proposal probability.
    """
    counts = list(sample.counts)
    lines, haplotypes, s_rem = sample.n, sample.k, sample.s
    singletons = counts.count(1)
    sources, targets, ratios = [], [], []
    for u, v in rng.random((lines - 1 + s_rem, 2)).tolist():
        source, target, proposal = _next_move(counts, lines, haplotypes, singletons, s_rem, u, v)
        scale = lines + theta - 1
        if target >= 0:
            joined = counts[target]
            forward = theta / scale * (joined + 1) / lines
            counts[source] = 0
            counts[target] = joined + 1
            haplotypes -= 1
            singletons -= 2 if joined == 1 else 1
            s_rem -= 1
        elif source >= 0:
            c = counts[source]
            forward = (c - 1) / scale
            counts[source] = c - 1
            if c == 2:
                singletons += 1
            lines -= 1
        else:
            forward = theta / scale * singletons / lines
            s_rem -= 1
        sources.append(source)
        targets.append(target)
        ratios.append(forward / proposal)
    return np.array(sources, dtype=np.intp), np.array(targets, dtype=np.intp), np.array(ratios)


def _growth_type_log_ratio(lines, theta, beta, times, is_mutation):
    """ln of each event-type probability under growth over the constant-size one"""
    coalescence = 0.5 * lines * (lines - 1) * np.exp(beta * times)
    mutation = 0.5 * lines * theta
    true = np.where(is_mutation, mutation, coalescence) / (coalescence + mutation)
    constant = np.where(is_mutation, theta, lines - 1) / (lines - 1 + theta)
    return np.log(true) - np.log(constant)


def _holding_time(lines, theta, time_model, time, rng):
    coalescence = time_model.coalescence_time(0.5 * lines * (lines - 1), time, rng.standard_exponential())
    mutation = rng.standard_exponential() / (0.5 * lines * theta)
    return min(coalescence, mutation)


def _event_times(lines, theta, time_model, rng):
    """Backward times of the events of a path with ``lines`` lines before each event"""
    if time_model.is_constant:
        rates = 0.5 * lines * (lines + theta - 1)
        return np.cumsum(rng.standard_exponential(len(lines)) / rates)
    times = np.empty(len(lines))
    time = 0.0
    for j, count in enumerate(lines.tolist()):
        time += _holding_time(count, theta, time_model, time, rng)
        times[j] = time
    return times


@dataclass(frozen=True)
class PathEvent:
    time: float
    move: Move
    state: ISState


def _empty(dtype=float):
    return np.zeros(0, dtype=dtype)


@dataclass
class ISPath:
    """A simulated history held as per-event arrays

    Event ``j`` happens at backward time ``times[j]``. It takes a line from
    haplotype ``sources[j]`` (-1 for an extra mutation) and, when a singleton
    loses its defining mutation, adds one to ``targets[j]`` (-1 otherwise).
    ``log_weights`` is the running log weight.
    """

    start: ISState
    times: np.ndarray = field(default_factory=_empty)
    sources: np.ndarray = field(default_factory=lambda: _empty(np.intp))
    targets: np.ndarray = field(default_factory=lambda: _empty(np.intp))
    log_weights: np.ndarray = field(default_factory=_empty)
    log_weight: float = 0.0

    @property
    def weight(self):
        return math.exp(self.log_weight)

    @property
    def tmrca(self):
        return float(self.times[-1]) if len(self.times) else math.nan

    @property
    def coalescences(self):
        return (self.sources >= 0) & (self.targets < 0)

    @property
    def events(self):
        """The moves in time order, each with the state it leads to"""
        state = self.start
        events = []
        for time, source, target, log_weight in zip(self.times.tolist(), self.sources.tolist(),
                                                    self.targets.tolist(), self.log_weights.tolist()):
            move = _as_move(source, target)
            after = state.apply(move)
            state = ISState(after.counts, after.s_rem, time, log_weight)
            events.append(PathEvent(time, move, state))
        return events

    def coalescence_times(self):
        return self.times[self.coalescences]

    def mutation_times(self):
        return self.times[~self.coalescences]

    def loss_times(self):
        """Times the haplotype count drops, one per defining mutation

        The last haplotype is lost at the TMRCA, which is not included.
        """
        return self.times[self.targets >= 0]

    def allele_ages(self):
        """Per input label: the time its defining mutation is removed, or the TMRCA"""
        ages = np.full(len(self.start.counts), self.tmrca)
        defining = self.targets >= 0
        ages[self.sources[defining]] = self.times[defining]
        return ages

    def state_at(self, t):
        """The state holding at backward time ``t``; an event at exactly t has not happened yet

        Past the TMRCA the single ancestral line carries no observed label.
        """
        done = int(np.searchsorted(self.times, t, side="left"))
        k = len(self.start.counts)
        if done == len(self.times):
            return ISState((0,) * k, 0, t, self.log_weight)
        if done == 0:
            return self.start
        moved, joined = self.sources[:done], self.targets[:done]
        counts = (np.asarray(self.start.counts) - np.bincount(moved[moved >= 0], minlength=k)
                  + np.bincount(joined[joined >= 0], minlength=k))
        mutations = int(np.count_nonzero(~self.coalescences[:done]))
        return ISState(tuple(int(c) for c in counts), self.start.s_rem - mutations,
                       float(self.times[done - 1]), float(self.log_weights[done - 1]))


def simulate_path(sample, theta, time_model, rng):
    """Simulate one weighted backward history of ``sample``

    The moves are drawn first. The event times then follow from the number
    of lines before each event.

    Parameters
    ----------
    sample : ObservedSample
    theta : float
    time_model : esfstl.coalescent.genealogy.TimeModel
    rng : numpy.random.Generator

    Returns
    -------
    ISPath
        With ``log_weight = -inf`` and no events when p(n; s) is zero.
    """
    if theta <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    start = ISState.initial(sample)
    if not sample.possible:
        return ISPath(start, log_weight=-math.inf)

    sources, targets, ratios = _walk(sample, theta, rng)
    coalescences = (sources >= 0) & (targets < 0)
    lines = sample.n - np.concatenate(([0], np.cumsum(coalescences)[:-1]))
    times = _event_times(lines, theta, time_model, rng)
    step_log_weights = np.log(ratios)
    if not time_model.is_constant:
        step_log_weights += _growth_type_log_ratio(lines, theta, time_model.beta, times, ~coalescences)
    log_weights = np.cumsum(step_log_weights)
    return ISPath(start, times, sources, targets, log_weights, float(log_weights[-1]))


@dataclass(frozen=True)
class WeightedEstimate:
    """Self-normalised importance-sampling estimate

    ``mean`` and ``std_error`` are floats or arrays of matching shape.
    """

    mean: object
    std_error: object
    effective_sample_size: float
    replicates: int


@dataclass(frozen=True)
class LikelihoodEstimate:
    """Mean path weight, which estimates the age-labelled p(n; s)

    Parameters
    ----------
    log_mean : float
        ln of the mean weight; ``-inf`` when every weight is zero.
    relative_error : float
        Standard error of the mean over the mean.
    log_label_factor : float
        ln prod_j alpha_j!; subtract from ``log_mean`` for the unordered probability.
    """

    log_mean: float
    relative_error: float
    effective_sample_size: float
    replicates: int
    log_label_factor: float = 0.0

    @property
    def mean(self):
        return math.exp(self.log_mean)

    @property
    def std_error(self):
        return self.mean * self.relative_error

    @property
    def log_unordered(self):
        return self.log_mean - self.log_label_factor

    @property
    def unordered(self):
        return math.exp(self.log_unordered)

    @property
    def unordered_std_error(self):
        return self.unordered * self.relative_error


class WeightedAccumulator:
    """Running weighted sums kept relative to the largest log weight seen

    Values are floats or numpy arrays keyed by name. Merging is exact up to
    rounding and must be done in a fixed order for bitwise reproducibility.
    """

    def __init__(self):
        self.shift = -math.inf
        self.count = 0
        self.sum_w = 0.0
        self.sum_w2 = 0.0
        self.sum_wx = {}
        self.sum_w2x = {}
        self.sum_w2x2 = {}

    def _rescale(self, shift):
        if shift <= self.shift:
            return
        if self.shift > -math.inf:
            factor = math.exp(self.shift - shift)
            self.sum_w *= factor
            self.sum_w2 *= factor * factor
            for key in self.sum_wx:
                self.sum_wx[key] = self.sum_wx[key] * factor
                self.sum_w2x[key] = self.sum_w2x[key] * factor * factor
                self.sum_w2x2[key] = self.sum_w2x2[key] * factor * factor
        self.shift = shift

    def add(self, log_weight, values=None):
        self.count += 1
        if log_weight == -math.inf:
            return
        self._rescale(log_weight)
        w = math.exp(log_weight - self.shift)
        self.sum_w += w
        self.sum_w2 += w * w
        for key, x in (values or {}).items():
            x = np.asarray(x, dtype=float)
            if key not in self.sum_wx:
                self.sum_wx[key] = np.zeros_like(x)
                self.sum_w2x[key] = np.zeros_like(x)
                self.sum_w2x2[key] = np.zeros_like(x)
            self.sum_wx[key] = self.sum_wx[key] + w * x
            self.sum_w2x[key] = self.sum_w2x[key] + w * w * x
            self.sum_w2x2[key] = self.sum_w2x2[key] + w * w * x * x

    def merge(self, other):
        self.count += other.count
        if other.shift == -math.inf:
            return self
        self._rescale(other.shift)
        factor = math.exp(other.shift - self.shift)
        self.sum_w += other.sum_w * factor
        self.sum_w2 += other.sum_w2 * factor * factor
        for key in other.sum_wx:
            if key not in self.sum_wx:
                self.sum_wx[key] = np.zeros_like(other.sum_wx[key])
                self.sum_w2x[key] = np.zeros_like(other.sum_wx[key])
                self.sum_w2x2[key] = np.zeros_like(other.sum_wx[key])
            self.sum_wx[key] = self.sum_wx[key] + other.sum_wx[key] * factor
            self.sum_w2x[key] = self.sum_w2x[key] + other.sum_w2x[key] * factor * factor
            self.sum_w2x2[key] = self.sum_w2x2[key] + other.sum_w2x2[key] * factor * factor
        return self

    @property
    def effective_sample_size(self):
        if self.sum_w2 == 0:
            return 0.0
        return self.sum_w ** 2 / self.sum_w2

    def likelihood(self, log_label_factor=0.0):
        if self.count == 0:
            raise ParameterError("no replicates were accumulated")
        if self.sum_w == 0:
            return LikelihoodEstimate(-math.inf, math.nan, 0.0, self.count, log_label_factor)
        mean = self.sum_w / self.count
        variance = max(0.0, self.sum_w2 / self.count - mean * mean)
        relative = math.sqrt(variance / (self.count - 1)) / mean if self.count > 1 else math.nan
        return LikelihoodEstimate(self.shift + math.log(mean), relative, self.effective_sample_size,
                                  self.count, log_label_factor)

    def estimate(self, key):
        """Weighted mean of ``key`` with its delta-method standard error"""
        if self.sum_w == 0 or key not in self.sum_wx:
            return WeightedEstimate(math.nan, math.nan, 0.0, self.count)
        mean = self.sum_wx[key] / self.sum_w
        spread = self.sum_w2x2[key] - 2 * mean * self.sum_w2x[key] + mean * mean * self.sum_w2
        std_error = np.sqrt(np.maximum(spread, 0.0)) / self.sum_w
        if np.ndim(mean) == 0:
            mean, std_error = float(mean), float(std_error)
        return WeightedEstimate(mean, std_error, self.effective_sample_size, self.count)


@dataclass(frozen=True)
class ConfigAtTime:
    """Weighted summaries of the ancestral state at one backward time

    ``line_distribution[a]`` is P(A_n(t) = a) for a = 0..n.
    """

    time: float
    counts: WeightedEstimate
    haplotypes: WeightedEstimate
    segregating_sites: WeightedEstimate
    lines: WeightedEstimate
    line_distribution: WeightedEstimate


@dataclass(frozen=True)
class ImportanceResult:
    sample: ObservedSample
    theta: float
    time_model: genealogy.TimeModel
    likelihood: LikelihoodEstimate
    tmrca: WeightedEstimate
    coalescence_times: WeightedEstimate
    mutation_times: WeightedEstimate
    loss_times: WeightedEstimate
    allele_ages: WeightedEstimate
    configs: tuple

    def group_mean_ages(self):
        if self.likelihood.log_mean == -math.inf:
            return {}
        return group_mean_ages(self.sample, self.allele_ages.mean)


@dataclass
class ImportanceSampler:
    """Accumulates every importance-sampling estimator in one pass over the paths

    Parameters
    ----------
    sample : ObservedSample
    theta : float
    time_model : esfstl.coalescent.genealogy.TimeModel
    time_points : tuple of float
        Backward times at which the ancestral configuration is recorded.
    """

    sample: ObservedSample
    theta: float
    time_model: genealogy.TimeModel = field(default_factory=genealogy.TimeModel.constant)
    time_points: tuple = ()

    logger = logging.getLogger(__name__).getChild(__qualname__)

    def __post_init__(self):
        if self.theta <= 0:
            raise ParameterError(f"theta must be positive, got {self.theta}")
        self.time_points = tuple(float(t) for t in self.time_points)
        if any(t < 0 for t in self.time_points):
            raise ParameterError("configuration times must be nonnegative")

    def path_values(self, path):
        n = self.sample.n
        values = {
            "tmrca": path.tmrca,
            "coalescence_times": path.coalescence_times(),
            "mutation_times": path.mutation_times(),
            "loss_times": path.loss_times(),
            "allele_ages": path.allele_ages(),
        }
        for index, t in enumerate(self.time_points):
            state = path.state_at(t)
            lines = max(state.lines, 1)
            one_hot = np.zeros(n + 1)
            one_hot[lines] = 1.0
            values[f"counts@{index}"] = np.array(state.counts, dtype=float)
            values[f"haplotypes@{index}"] = state.haplotypes
            values[f"segregating@{index}"] = state.s_rem
            values[f"lines@{index}"] = lines
            values[f"line_distribution@{index}"] = one_hot
        return values

    def run_chunk(self, start, stop, seed):
        accumulator = WeightedAccumulator()
        for index in range(start, stop):
            path = simulate_path(self.sample, self.theta, self.time_model, streams.seed_replicate_rng(seed, index))
            if path.log_weight == -math.inf:
                accumulator.add(path.log_weight)
            else:
                accumulator.add(path.log_weight, self.path_values(path))
        return accumulator

    def accumulate(self, replicates, seed=0, workers=None, chunk_size=None):
        total = WeightedAccumulator()
        for chunk in streams.run_replicates(self.run_chunk, replicates, seed, workers, chunk_size):
            total.merge(chunk)
        return total

    def run(self, replicates, seed=0, workers=None, chunk_size=None):
        """Simulate ``replicates`` paths and collect every estimate

        Returns
        -------
        ImportanceResult
        """
        self.logger.info("importance sampling n=%d k=%d s=%d theta=%g model %s: %d paths",
                         self.sample.n, self.sample.k, self.sample.s, self.theta,
                         self.time_model.describe(), replicates)
        total = self.accumulate(replicates, seed, workers, chunk_size)
        likelihood = total.likelihood(self.sample.log_label_factor)
        if total.effective_sample_size < LOW_ESS_FRACTION * replicates and total.sum_w > 0:
            self.logger.warning("effective sample size %.1f is below %g%% of %d replicates",
                                total.effective_sample_size, 100 * LOW_ESS_FRACTION, replicates)
        self.logger.info("log likelihood %.6g, ESS %.1f", likelihood.log_mean, likelihood.effective_sample_size)
        configs = tuple(
            ConfigAtTime(t, total.estimate(f"counts@{i}"), total.estimate(f"haplotypes@{i}"),
                         total.estimate(f"segregating@{i}"), total.estimate(f"lines@{i}"),
                         total.estimate(f"line_distribution@{i}"))
            for i, t in enumerate(self.time_points)
        )
        return ImportanceResult(self.sample, self.theta, self.time_model, likelihood, total.estimate("tmrca"),
                                total.estimate("coalescence_times"), total.estimate("mutation_times"),
                                total.estimate("loss_times"), total.estimate("allele_ages"), configs)


def estimate_likelihood(sample, theta, time_model, replicates, seed=0):
    """Importance-sampling estimate of p(n; s); see LikelihoodEstimate for the unordered value"""
    sampler = ImportanceSampler(sample, theta, time_model)
    return sampler.accumulate(replicates, seed).likelihood(sample.log_label_factor)


def estimate_event_times(sample, theta, time_model, replicates, seed=0):
    """Weighted mean coalescence, mutation and haplotype-loss times and the TMRCA

    Returns
    -------
    dict of WeightedEstimate
        Keys "coalescence_times", "mutation_times", "loss_times" and "tmrca";
        vector means are in increasing time order.
    """
    result = ImportanceSampler(sample, theta, time_model).run(replicates, seed)
    return {
        "coalescence_times": result.coalescence_times,
        "mutation_times": result.mutation_times,
        "loss_times": result.loss_times,
        "tmrca": result.tmrca,
    }


def estimate_allele_ages(sample, theta, time_model, replicates, seed=0):
    """Weighted mean age of each observed haplotype, in input order"""
    return ImportanceSampler(sample, theta, time_model).run(replicates, seed).allele_ages


def estimate_config_at_time(sample, theta, time_model, t, replicates, seed=0):
    """Weighted mean haplotype counts, K_n(t), S_n(t), A_n(t) and the law of A_n(t)"""
    return ImportanceSampler(sample, theta, time_model, (t,)).run(replicates, seed).configs[0]


def group_mean_ages(sample, ages):
    """Mean age over haplotypes sharing a multiplicity

    Returns
    -------
    dict
        multiplicity -> mean age, in increasing multiplicity.
    """
    counts = np.asarray(sample.counts)
    ages = np.asarray(ages, dtype=float)
    return {int(m): float(ages[counts == m].mean()) for m in np.unique(counts)}


def _likelihood_at(sample, theta, time_model, replicates, seed, workers, chunk_size):
    sampler = ImportanceSampler(sample, theta, time_model)
    return sampler.accumulate(replicates, seed, workers, chunk_size).likelihood(sample.log_label_factor)


def likelihood_curve(sample, replicates, seed=0, thetas=None, betas=None, theta=None, workers=None,
                     chunk_size=None):
    """Likelihood over a grid of mutation rates or of growth rates

    Give ``thetas`` to scan theta under the constant-size model, or ``betas``
    together with a fixed ``theta`` to scan the growth rate. Every grid point
    reuses ``seed``.

    Returns
    -------
    list of (float, LikelihoodEstimate)
    """
    if (thetas is None) == (betas is None):
        raise ParameterError("give exactly one of thetas or betas")
    if betas is not None:
        if theta is None:
            raise ParameterError("a growth scan needs a fixed theta")
        grid = [(beta, theta, genealogy.TimeModel.exp_growth(beta) if beta > 0 else genealogy.TimeModel.constant())
                for beta in betas]
    else:
        grid = [(value, value, genealogy.TimeModel.constant()) for value in thetas]
    curve = []
    for value, point_theta, model in grid:
        estimate = _likelihood_at(sample, point_theta, model, replicates, seed, workers, chunk_size)
        logger.info("grid point %g: log likelihood %.6g", value, estimate.log_mean)
        curve.append((value, estimate))
    return curve
