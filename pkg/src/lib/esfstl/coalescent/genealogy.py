# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT
"""Coalescent times, forward tree growing and the backward mutation/lineage chain."""
from dataclasses import dataclass, field
import enum
import logging
import math

import numpy as np

from esfstl.core.errors import ParameterError

logger = logging.getLogger(__name__)


class TimeModelKind(enum.Enum):
    CONSTANT = "constant"
    EXP_GROWTH = "growth"


@dataclass(frozen=True)
class TimeModel:
    """Population-size history governing coalescence intensities

    Looking back from the present, the relative population size at time t is
    exp(-beta t), so m lines coalesce at rate m(m-1)/2 exp(beta t). Mutation
    intensity is not rescaled. ``beta = 0`` is the constant-size coalescent
    and shares its code path.

    Parameters
    ----------
    kind : TimeModelKind
    beta : float
        Growth rate, nonnegative; must be 0 for CONSTANT.
    """

    kind: TimeModelKind = TimeModelKind.CONSTANT
    beta: float = 0.0

    def __post_init__(self):
        if self.beta < 0:
            raise ParameterError(f"growth rate must be nonnegative, got {self.beta}")
        if self.kind is TimeModelKind.CONSTANT and self.beta != 0:
            raise ParameterError("a constant-size model has beta = 0")

    @classmethod
    def constant(cls):
        return cls(TimeModelKind.CONSTANT, 0.0)

    @classmethod
    def exp_growth(cls, beta):
        return cls(TimeModelKind.EXP_GROWTH, float(beta))

    @property
    def is_constant(self):
        return self.beta == 0

    def describe(self):
        if self.kind is TimeModelKind.CONSTANT:
            return "constant"
        return f"growth beta={self.beta:g}"

    def coalescence_time(self, pairs, elapsed, exponential):
        """Waiting time after ``elapsed`` for a coalescence among ``pairs`` pairs

        ``exponential`` is a unit exponential draw; the integrated intensity
        is inverted in closed form.
        """
        if self.is_constant:
            return exponential / pairs
        return math.log1p(self.beta * exponential * math.exp(-self.beta * elapsed) / pairs) / self.beta

    def coalescence_intensity(self, pairs, elapsed):
        if self.is_constant:
            return float(pairs)
        return pairs * math.exp(self.beta * elapsed)


@dataclass(frozen=True)
class CoalescentTimes:
    """Inter-coalescence times of an n-coalescent

    Parameters
    ----------
    t : numpy.ndarray
        (T_n, ..., T_2): ``t[i]`` is the time during which n - i lines exist.
    w : numpy.ndarray
        Partial sums W_1, ..., W_{n-1}; W_{n-1} is the tree height.
    total_length : float
        L_n = n T_n + ... + 2 T_2.
    """

    t: np.ndarray
    w: np.ndarray
    total_length: float
    cumulative_length: np.ndarray = field(repr=False, default=None)

    @classmethod
    def from_intervals(cls, t):
        t = np.asarray(t, dtype=float)
        if t.ndim != 1 or t.size < 1 or np.any(t <= 0):
            raise ParameterError("coalescent intervals must be a nonempty vector of positive times")
        n = t.size + 1
        lines = np.arange(n, 1, -1, dtype=float)
        pieces = lines * t
        cumulative = np.concatenate(([0.0], np.cumsum(pieces)))
        return cls(t=t, w=np.cumsum(t), total_length=float(cumulative[-1]), cumulative_length=cumulative)

    @property
    def n(self):
        return self.t.size + 1

    @property
    def height(self):
        return float(self.w[-1])

    @property
    def lineages(self):
        return np.arange(self.n, 1, -1)

    def bin_index(self, t):
        """J such that t lies in B_J = (W_{J-1}, W_J], with B_1 = (0, W_1]"""
        if t < 0:
            raise ParameterError(f"time must be nonnegative, got {t}")
        return int(np.searchsorted(self.w, t, side="left")) + 1


def sample_coalescent_times(n, time_model, rng):
    """Draw T_n, ..., T_2 for a sample of ``n`` under ``time_model``"""
    if n < 2:
        raise ParameterError(f"need at least two lines, got n={n}")
    lines = np.arange(n, 1, -1, dtype=float)
    pairs = 0.5 * lines * (lines - 1.0)
    draws = rng.standard_exponential(n - 1)
    if time_model.is_constant:
        return CoalescentTimes.from_intervals(draws / pairs)
    beta = time_model.beta
    w = np.log1p(beta * np.cumsum(draws / pairs)) / beta
    return CoalescentTimes.from_intervals(np.diff(w, prepend=0.0))


def ancestor_count_at(times, t):
    """Number of ancestral lines of the sample at time ``t``"""
    return times.n - times.bin_index(t) + 1


def tree_lengths_at(times, t):
    """Split the total branch length at time ``t``

    Returns
    -------
    tuple of float
        (recent, ancient): length between the sample and ``t``, and between
        ``t`` and the most recent common ancestor.
    """
    J = times.bin_index(t)
    n = times.n
    if J == n:
        return times.total_length, 0.0
    start = times.w[J - 2] if J >= 2 else 0.0
    recent = float(times.cumulative_length[J - 1] + (n - J + 1) * (t - start))
    return recent, times.total_length - recent


@dataclass
class GeneTree:
    """A tree whose internal nodes are mutations and whose leaves are sampled genes

    Node 0 is the root. Nodes are numbered in the order they arose, which is
    age order from the oldest.
    """

    parents: list
    leaf_nodes: list

    @property
    def leaves(self):
        return len(self.leaf_nodes)

    @property
    def mutations(self):
        return len(self.parents) - 1

    def config(self):
        counts = np.bincount(self.leaf_nodes, minlength=len(self.parents))
        return GrowthConfigState(tuple(int(c) for c in counts if c > 0), self.mutations)

    def copy(self):
        return GeneTree(list(self.parents), list(self.leaf_nodes))


def grow_gene_tree(n, theta, rng):
    """Grow a mutation-node gene tree forward until it first has n + 1 leaves

    Returns the tree as it was just before the (n+1)-th leaf appeared.
    """
    if n < 2:
        raise ParameterError(f"need n >= 2, got {n}")
    if theta <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    tree = GeneTree(parents=[-1], leaf_nodes=[0, 0])
    while True:
        m = tree.leaves
        chosen = int(rng.integers(m))
        if rng.random() < (m - 1) / (theta + m - 1):
            if m == n:
                return tree
            tree.leaf_nodes.append(tree.leaf_nodes[chosen])
        else:
            tree.parents.append(tree.leaf_nodes[chosen])
            tree.leaf_nodes[chosen] = len(tree.parents) - 1


@dataclass(frozen=True)
class GrowthConfigState:
    """Haplotype counts in age order (oldest first) and accumulated mutations"""

    counts: tuple
    s: int

    def __post_init__(self):
        if any(c < 1 for c in self.counts):
            raise ParameterError("haplotype counts must be positive")

    @property
    def n(self):
        return sum(self.counts)

    @property
    def k(self):
        return len(self.counts)


def grow_config(n, theta, rng):
    """Grow haplotype counts forward in time, keeping only counts and mutations

    Returns the size-n state held just before the (n+1)-th individual appeared.
    """
    if n < 2:
        raise ParameterError(f"need n >= 2, got {n}")
    if theta <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    counts = [2]
    s = 0
    while True:
        m = sum(counts)
        j = int(np.searchsorted(np.cumsum(counts), rng.integers(m), side="right"))
        if rng.random() < (m - 1) / (m + theta - 1):
            if m == n:
                return GrowthConfigState(tuple(counts), s)
            counts[j] += 1
        else:
            counts[j] -= 1
            counts.append(1)
            s += 1
            if counts[j] == 0:
                del counts[j]


@dataclass(frozen=True)
class AncestralState:
    """Mutations, new haplotypes, mutant lines and mutation-free lines at a time back

    Parameters
    ----------
    s : int
        Mutations that arose in (0, t).
    k : int
        Haplotypes founded by those mutations.
    b : int
        Ancestral lines that carry at least one mutation.
    a_theta : int
        Ancestral lines free of mutations.
    """

    s: int
    k: int
    b: int
    a_theta: int

    def __post_init__(self):
        if min(self.s, self.k, self.b, self.a_theta) < 0:
            raise ParameterError(f"negative component in {self}")
        if self.b + self.a_theta < 1:
            raise ParameterError("an ancestral state needs at least one line")
        if self.s < self.k:
            raise ParameterError(f"more new haplotypes than mutations in {self}")

    @property
    def a(self):
        return self.b + self.a_theta


def _ska_path(n, theta, t, rng):
    s, k, b, a_theta = 0, 0, 0, n
    now = 0.0
    yield now, AncestralState(s, k, b, a_theta)
    while True:
        rates = (
            0.5 * theta * b,
            0.5 * theta * a_theta,
            0.5 * (b * (b - 1) + 2 * b * a_theta),
            0.5 * a_theta * (a_theta - 1),
        )
        total = sum(rates)
        if total <= 0:
            return
        now += rng.exponential(1.0 / total)
        if now > t:
            return
        pick = rng.random() * total
        if pick < rates[0]:
            s += 1
        elif pick < rates[0] + rates[1]:
            s, k, b, a_theta = s + 1, k + 1, b + 1, a_theta - 1
        elif pick < rates[0] + rates[1] + rates[2]:
            b -= 1
        else:
            a_theta -= 1
        yield now, AncestralState(s, k, b, a_theta)


def simulate_ska_path(n, theta, t, rng):
    """Every (time, AncestralState) visited in [0, t]"""
    if n < 1:
        raise ParameterError(f"need n >= 1, got {n}")
    if theta <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    if t < 0:
        raise ParameterError(f"t must be nonnegative, got {t}")
    return list(_ska_path(n, theta, t, rng))


def simulate_ska(n, theta, t, rng):
    """State of the backward mutation/lineage chain at time ``t``"""
    return simulate_ska_path(n, theta, t, rng)[-1][1]


def simulate_ancestral_lines(n, theta, t, rng):
    """(A_n(t), A_n^theta(t)) from one run of the backward chain"""
    state = simulate_ska(n, theta, t, rng)
    return state.a, state.a_theta
