"""Markov chain over the base station's per-sub-frame observations.

The base station cannot see codewords directly; in each sub-frame ``j`` it
sees some set of preambles.  Writing ``C_j`` for the number of observed
preambles in sub-frame ``j`` *counting idle as always present*, the tuple
``(C_1, ..., C_L)`` -- a configuration -- is everything the observation
reveals.  The codewords consistent with a configuration number
``prod(C_j) - 1`` (the all-idle word never counts), and that cardinality is
exactly how many codewords the base station perceives: singles, collisions,
and phantom codewords no one sent.

Contenders pick codewords independently and uniformly, so adding one more
contender moves the configuration by keeping each ``C_j`` or raising it by
one, with a probability that depends only on the current configuration --
never on which codewords produced it.  The number of codewords driving the
move from ``c`` to ``c'`` is::

    prod_j ( C_j           if C'_j == C_j        # symbol already observed
             m_j + 1 - C_j if C'_j == C_j + 1    # symbol new in sub-frame j
             0             otherwise )

minus one for a self-loop, because the all-idle word keeps every coordinate
yet is not in the codebook.  Dividing by the codebook size gives a
row-stochastic transition matrix; the expected perceived count after ``N``
contenders is the cardinality vector averaged over the N-step state
distribution.  Counts are kept as integers so small instances can be checked
in exact rational arithmetic.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

from .codebook import CodebookSpec, Mode, codebook_size
from .contention import LoadPoint, expected_singles
from .errors import DomainError, NotUniform, StateSpaceTooLarge

#: Per-sub-frame observed-preamble counts, idle included (each entry >= 1).
Configuration = tuple[int, ...]

#: Largest state space `build_state_space` will materialize.
STATE_CAP = 10**7


def _check_expanded(spec: CodebookSpec) -> None:
    if spec.mode is not Mode.EXPANDED:
        raise DomainError("observation chains are built for expanded codebooks")


def _validate_configuration(config: Configuration, spec: CodebookSpec) -> None:
    if len(config) != spec.length:
        raise DomainError(f"configuration {config} has wrong length for {spec.describe()}")
    for c, m in zip(config, spec.budgets):
        if not 1 <= c <= m + 1:
            raise DomainError(f"configuration {config} out of range for budgets {spec.budgets}")


def configuration_cardinality(config: Configuration) -> int:
    """Codewords consistent with a configuration: ``prod(C_j) - 1``."""
    return math.prod(config) - 1


@dataclass(frozen=True)
class StateSpace:
    """Indexed set of reachable configurations for an expanded codebook."""

    spec: CodebookSpec
    states: tuple[Configuration, ...]
    cardinalities: np.ndarray
    index: Mapping[Configuration, int]

    def __len__(self) -> int:
        return len(self.states)


def build_state_space(spec: CodebookSpec, cap: int = STATE_CAP) -> StateSpace:
    """Enumerate configurations in lexicographic order.

    The all-ones configuration is excluded: with at least one contender some
    sub-frame always shows a non-idle preamble.

    Raises
    ------
    StateSpaceTooLarge
        When ``prod(m_j + 1)`` exceeds ``cap``; use `build_lumped_model` or
        Monte Carlo instead.
    """
    _check_expanded(spec)
    total = math.prod(b + 1 for b in spec.budgets)
    if total > cap:
        raise StateSpaceTooLarge(f"{total - 1} states exceed the cap of {cap}")
    all_ones = (1,) * spec.length
    states = tuple(
        c
        for c in itertools.product(*(range(1, b + 2) for b in spec.budgets))
        if c != all_ones
    )
    cardinalities = np.fromiter(
        (configuration_cardinality(c) for c in states), dtype=np.int64, count=len(states)
    )
    index = {c: i for i, c in enumerate(states)}
    return StateSpace(spec=spec, states=states, cardinalities=cardinalities, index=index)


def transition_count(frm: Configuration, to: Configuration, spec: CodebookSpec) -> int:
    """Number of codewords that move the observation from ``frm`` to ``to``.

    Returns 0 for impossible moves.  Dividing by the codebook size gives the
    transition probability.
    """
    _check_expanded(spec)
    _validate_configuration(frm, spec)
    _validate_configuration(to, spec)
    count = 1
    for c_from, c_to, m in zip(frm, to, spec.budgets):
        if c_to == c_from:
            count *= c_from
        elif c_to == c_from + 1:
            count *= m + 1 - c_from
        else:
            return 0
    if frm == to:
        count -= 1
    return count


@dataclass(frozen=True)
class TransitionModel:
    """Observation chain: integer transition counts over the codebook size.

    ``counts[i, j]`` is the number of codewords moving state ``i`` to state
    ``j``; every row sums to ``denominator`` (the codebook size), so
    ``counts / denominator`` is row-stochastic.  ``initial_counts / denominator``
    is the state distribution after the first contender.  For a lumped model
    the states are sorted representatives and ``class_sizes`` holds the number
    of configurations each one stands for.
    """

    spec: CodebookSpec
    states: tuple[Configuration, ...]
    cardinalities: np.ndarray
    counts: sparse.csr_matrix
    initial_counts: np.ndarray
    denominator: int
    class_sizes: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.states)

    @cached_property
    def matrix(self) -> sparse.csr_matrix:
        """Row-stochastic transition matrix (float)."""
        return self.counts.astype(np.float64) / self.denominator

    @cached_property
    def initial(self) -> np.ndarray:
        """State distribution after the first contender (float)."""
        return self.initial_counts.astype(np.float64) / self.denominator

    def perceived_count(self, n_users: int) -> float:
        """Expected number of codewords the base station perceives.

        Defined as 0 for an empty system; otherwise the cardinality vector
        averaged over the state distribution after ``n_users`` contenders,
        computed with ``n_users - 1`` sparse vector-matrix products.
        """
        if n_users < 0:
            raise DomainError("user count cannot be negative")
        if n_users == 0:
            return 0.0
        dist = self.initial
        for _ in range(n_users - 1):
            dist = dist @ self.matrix
        return float(dist @ self.cardinalities)

    def perceived_sweep(self, n_values: Sequence[int]) -> np.ndarray:
        """Perceived counts over an increasing grid of user counts.

        Shares one state-distribution iteration across the whole grid, so a
        sweep up to ``max(n_values)`` costs ``max(n_values) - 1`` products.
        """
        grid = _checked_grid(n_values)
        out = np.empty(len(grid), dtype=np.float64)
        dist = self.initial
        pos = 0
        for n in range(1, grid[-1] + 1):
            if n > 1:
                dist = dist @ self.matrix
            while pos < len(grid) and grid[pos] == n:
                out[pos] = float(dist @ self.cardinalities)
                pos += 1
        return out

    def efficiency(self, n_users: int) -> float:
        """Expected singles over expected perceived codewords."""
        if n_users < 1:
            raise DomainError("efficiency is undefined without contenders")
        singles = expected_singles(LoadPoint(n_users, self.denominator))
        return singles / self.perceived_count(n_users)

    def efficiency_sweep(self, n_values: Sequence[int]) -> np.ndarray:
        grid = _checked_grid(n_values)
        perceived = self.perceived_sweep(grid)
        singles = np.array(
            [expected_singles(LoadPoint(n, self.denominator)) for n in grid]
        )
        return singles / perceived

    def perceived_count_exact(self, n_users: int) -> Fraction:
        """Exact rational perceived count, for golden-value comparisons.

        Practical only for small states and user counts.
        """
        if n_users < 0:
            raise DomainError("user count cannot be negative")
        if n_users == 0:
            return Fraction(0)
        denom = Fraction(self.denominator)
        dist = [Fraction(int(c)) / denom for c in self.initial_counts]
        indptr, indices, data = self.counts.indptr, self.counts.indices, self.counts.data
        for _ in range(n_users - 1):
            nxt = [Fraction(0)] * len(dist)
            for i, p in enumerate(dist):
                if p == 0:
                    continue
                for k in range(indptr[i], indptr[i + 1]):
                    nxt[indices[k]] += p * int(data[k]) / denom
            dist = nxt
        return sum(
            (p * int(a) for p, a in zip(dist, self.cardinalities)), start=Fraction(0)
        )


def _checked_grid(n_values: Sequence[int]) -> list[int]:
    grid = [int(n) for n in n_values]
    if not grid or any(n < 1 for n in grid):
        raise DomainError("grid must be non-empty with positive user counts")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("grid must be strictly increasing")
    return grid


def build_transition_model(spec: CodebookSpec, cap: int = STATE_CAP) -> TransitionModel:
    """Build the full observation chain for an expanded codebook."""
    space = build_state_space(spec, cap=cap)
    denom = codebook_size(spec)
    budgets = spec.budgets
    length = spec.length

    rows: list[int] = []
    cols: list[int] = []
    data: list[int] = []
    for i, config in enumerate(space.states):
        movable = [j for j in range(length) if config[j] <= budgets[j]]
        for bump in _subsets(movable):
            succ = list(config)
            count = 1
            for j in range(length):
                if j in bump:
                    succ[j] += 1
                    count *= budgets[j] + 1 - config[j]
                else:
                    count *= config[j]
            if not bump:
                count -= 1  # the all-idle word is not in the codebook
            if count:
                rows.append(i)
                cols.append(space.index[tuple(succ)])
                data.append(count)
    counts = sparse.csr_matrix(
        (np.asarray(data, dtype=np.int64), (rows, cols)),
        shape=(len(space), len(space)),
    )
    counts.sort_indices()
    _check_row_sums(counts, denom)
    initial = np.fromiter(
        (_first_contender_count(c, budgets) for c in space.states),
        dtype=np.int64,
        count=len(space),
    )
    return TransitionModel(
        spec=spec,
        states=space.states,
        cardinalities=space.cardinalities,
        counts=counts,
        initial_counts=initial,
        denominator=denom,
    )


def build_lumped_model(spec: CodebookSpec, cap: int = STATE_CAP) -> TransitionModel:
    """Collapse the chain over sub-frame permutations (uniform budgets only).

    With equal budgets each sub-frame is exchangeable, so configurations that
    are permutations of one another can be merged.  States become sorted
    configurations; cardinalities, the first-contender distribution, and the
    perceived-count sweep are preserved exactly.

    Raises
    ------
    NotUniform
        When the budgets differ between sub-frames.
    """
    _check_expanded(spec)
    if not spec.uniform:
        raise NotUniform(f"budgets {spec.budgets} differ between sub-frames")
    m = spec.budgets[0]
    length = spec.length
    denom = codebook_size(spec)
    n_classes = math.comb(m + 1 + length - 1, length) - 1
    if n_classes > cap:
        raise StateSpaceTooLarge(f"{n_classes} classes exceed the cap of {cap}")

    all_ones = (1,) * length
    reps = tuple(
        c
        for c in itertools.combinations_with_replacement(range(1, m + 2), length)
        if c != all_ones
    )
    index = {c: i for i, c in enumerate(reps)}
    cardinalities = np.fromiter(
        (configuration_cardinality(c) for c in reps), dtype=np.int64, count=len(reps)
    )
    class_sizes = np.fromiter(
        (_orbit_size(c) for c in reps), dtype=np.int64, count=len(reps)
    )

    rows: list[int] = []
    cols: list[int] = []
    data: list[int] = []
    for i, rep in enumerate(reps):
        movable = [j for j in range(length) if rep[j] <= m]
        merged: Counter[Configuration] = Counter()
        for bump in _subsets(movable):
            succ = list(rep)
            count = 1
            for j in range(length):
                if j in bump:
                    succ[j] += 1
                    count *= m + 1 - rep[j]
                else:
                    count *= rep[j]
            if not bump:
                count -= 1
            if count:
                merged[tuple(sorted(succ))] += count
        for key, count in merged.items():
            rows.append(i)
            cols.append(index[key])
            data.append(count)
    counts = sparse.csr_matrix(
        (np.asarray(data, dtype=np.int64), (rows, cols)),
        shape=(len(reps), len(reps)),
    )
    counts.sort_indices()
    _check_row_sums(counts, denom)
    initial = np.fromiter(
        (_first_contender_count(c, spec.budgets) * _orbit_size(c) for c in reps),
        dtype=np.int64,
        count=len(reps),
    )
    return TransitionModel(
        spec=spec,
        states=reps,
        cardinalities=cardinalities,
        counts=counts,
        initial_counts=initial,
        denominator=denom,
        class_sizes=class_sizes,
    )


def perceived_count(spec: CodebookSpec, n_users: int, cap: int = STATE_CAP) -> float:
    """Expected perceived codewords for ``n_users`` contenders (full chain)."""
    return build_transition_model(spec, cap=cap).perceived_count(n_users)


def expanded_efficiency(spec: CodebookSpec, n_users: int, cap: int = STATE_CAP) -> float:
    """Expected singles over expected perceived codewords (full chain)."""
    return build_transition_model(spec, cap=cap).efficiency(n_users)


def _subsets(items: Sequence[int]) -> Iterable[tuple[int, ...]]:
    return itertools.chain.from_iterable(
        itertools.combinations(items, k) for k in range(len(items) + 1)
    )


def _first_contender_count(config: Configuration, budgets: tuple[int, ...]) -> int:
    # One codeword yields C_j = 2 where it sent a preamble (m_j candidates)
    # and C_j = 1 where it idled; anything else is unreachable in one step.
    count = 1
    for c, m in zip(config, budgets):
        if c == 1:
            continue
        if c == 2:
            count *= m
        else:
            return 0
    return count


def _orbit_size(rep: Configuration) -> int:
    size = math.factorial(len(rep))
    for mult in Counter(rep).values():
        size //= math.factorial(mult)
    return size


def _check_row_sums(counts: sparse.csr_matrix, denom: int) -> None:
    sums = np.asarray(counts.sum(axis=1)).ravel()
    if not (sums == denom).all():
        raise AssertionError("transition counts do not cover the codebook")
