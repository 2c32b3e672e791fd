"""Load-adaptive codebook selection.

Small codebooks suffer few phantom codewords but run out of contention room;
large ones invert the trade.  Given the distinct observation cardinalities a
system can realize, the planner builds one candidate codebook per cardinality
worth using (those larger than the baseline), sweeps every candidate's
efficiency over a user-load grid, and reads off the load thresholds at which
the preferred codebook changes.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codebook import CodebookSpec, Mode, codebook_size, restrictions_for_cardinality
from .contention import reference_efficiency
from .errors import BudgetExceedsTotal, DomainError
from .markov import STATE_CAP, build_lumped_model, build_state_space, build_transition_model


@dataclass(frozen=True)
class CandidateSet:
    """Codebooks competing over a strictly increasing user-load grid."""

    candidates: tuple[CodebookSpec, ...]
    load_grid: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "load_grid", tuple(int(n) for n in self.load_grid))
        if not self.candidates:
            raise DomainError("need at least one candidate codebook")
        grid = self.load_grid
        if not grid or grid[0] < 1:
            raise DomainError("load grid must be non-empty with positive user counts")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("load grid must be strictly increasing")


@dataclass(frozen=True)
class ScheduleSegment:
    """One load interval and the codebook chosen throughout it."""

    n_low: int
    n_high: int
    spec: CodebookSpec
    efficiency_low: float
    efficiency_high: float


@dataclass(frozen=True)
class ThresholdSchedule:
    """Contiguous segments covering the load grid, best codebook per segment."""

    segments: tuple[ScheduleSegment, ...]

    @property
    def thresholds(self) -> tuple[int, ...]:
        """Loads at which the preferred codebook changes (segment starts)."""
        return tuple(seg.n_low for seg in self.segments[1:])

    def spec_at(self, n_users: int) -> CodebookSpec:
        """Codebook chosen for a load inside the grid's span."""
        lows = [seg.n_low for seg in self.segments]
        pos = bisect_right(lows, n_users) - 1
        if pos < 0 or n_users > self.segments[pos].n_high:
            raise DomainError(f"load {n_users} outside the scheduled grid")
        return self.segments[pos].spec


def state_cardinality_values(length: int, m: int, cap: int = STATE_CAP) -> list[int]:
    """Distinct observation cardinalities of the full codebook's chain."""
    space = build_state_space(CodebookSpec.expanded((m,) * length), cap=cap)
    return sorted(set(int(a) for a in space.cardinalities))


def cardinalities_of_interest(
    length: int, m: int, reference_preambles: int | None = None, cap: int = STATE_CAP
) -> list[int]:
    """Realizable codebook sizes that beat the reference scheme's size.

    The baseline is ``reference_preambles * length`` codewords when given,
    otherwise ``m * length`` (same preamble count in both schemes).
    """
    baseline = (reference_preambles if reference_preambles is not None else m) * length
    return [a for a in state_cardinality_values(length, m, cap=cap) if a > baseline]


def spec_for_cardinality(length: int, m: int, target: int) -> CodebookSpec:
    """Expanded codebook of exactly ``target`` codewords.

    Of all budget vectors realizing the target, the lexicographically smallest
    is used; the realization is a convention, since only the size matters for
    the efficiency model.
    """
    options = restrictions_for_cardinality(length, m, target)
    if not options:
        raise DomainError(f"no codebook of size {target} with L={length}, M={m}")
    return CodebookSpec.expanded(options[0], m_global=m)


def default_candidates(
    length: int,
    m: int,
    load_grid: Sequence[int],
    reference_preambles: int | None = None,
) -> CandidateSet:
    """Reference codebook plus one expanded codebook per interest cardinality."""
    reference = CodebookSpec.reference(
        reference_preambles if reference_preambles is not None else m, length
    )
    interest = cardinalities_of_interest(length, m, reference_preambles)
    expanded = tuple(spec_for_cardinality(length, m, a) for a in interest)
    return CandidateSet((reference,) + expanded, tuple(load_grid))


def efficiency_curve(
    spec: CodebookSpec, load_grid: Sequence[int], cap: int = STATE_CAP
) -> list[tuple[int, float]]:
    """Contention efficiency at each grid load.

    Reference codebooks use the closed form; expanded ones sweep the
    observation chain incrementally (the lumped chain when budgets are
    uniform), so a whole grid costs one pass of vector-matrix products.
    """
    grid = [int(n) for n in load_grid]
    if spec.mode is Mode.REFERENCE:
        m = spec.budgets[0]
        return [(n, reference_efficiency(n, m, spec.length)) for n in grid]
    if spec.uniform and spec.length > 1:
        model = build_lumped_model(spec, cap=cap)
    else:
        model = build_transition_model(spec, cap=cap)
    return list(zip(grid, (float(e) for e in model.efficiency_sweep(grid))))


def crossover_point(
    spec_a: CodebookSpec,
    spec_b: CodebookSpec,
    load_grid: Sequence[int],
    cap: int = STATE_CAP,
) -> int | None:
    """Smallest grid load where ``spec_b`` is strictly more efficient."""
    curve_a = efficiency_curve(spec_a, load_grid, cap=cap)
    curve_b = efficiency_curve(spec_b, load_grid, cap=cap)
    for (n, eff_a), (_, eff_b) in zip(curve_a, curve_b):
        if eff_b > eff_a:
            return n
    return None


def supported_load(
    spec: CodebookSpec,
    load_grid: Sequence[int],
    floor: float = 0.5,
    cap: int = STATE_CAP,
) -> int | None:
    """Largest grid load at which efficiency still reaches ``floor``."""
    curve = efficiency_curve(spec, load_grid, cap=cap)
    for n, eff in reversed(curve):
        if eff >= floor:
            return n
    return None


def threshold_schedule(candidates: CandidateSet, cap: int = STATE_CAP) -> ThresholdSchedule:
    """Pick the most efficient candidate at every grid load.

    Exact efficiency ties go to the smaller codebook, which keeps fewer
    simultaneous preambles on the air.  Contiguous choices merge into
    segments; segment boundaries are the adaptation thresholds.
    """
    grid = candidates.load_grid
    curves = np.array(
        [[e for _, e in efficiency_curve(spec, grid, cap=cap)] for spec in candidates.candidates]
    )
    sizes = np.array([codebook_size(spec) for spec in candidates.candidates])
    order = np.argsort(sizes, kind="stable")
    best = order[np.argmax(curves[order], axis=0)]

    segments: list[ScheduleSegment] = []
    start = 0
    for pos in range(1, len(grid) + 1):
        if pos == len(grid) or best[pos] != best[start]:
            chosen = int(best[start])
            segments.append(
                ScheduleSegment(
                    n_low=grid[start],
                    n_high=grid[pos - 1],
                    spec=candidates.candidates[chosen],
                    efficiency_low=float(curves[chosen, start]),
                    efficiency_high=float(curves[chosen, pos - 1]),
                )
            )
            start = pos
    return ThresholdSchedule(tuple(segments))


def partition_preambles(
    m_total: int, class_budgets: Sequence[int]
) -> list[tuple[int, int]]:
    """Reserve disjoint contiguous preamble ranges for user classes.

    Ranges are 1-based inclusive, assigned in the order the budgets are
    given; preambles past the last range stay unassigned.
    """
    if m_total < 1:
        raise DomainError("need at least one preamble to partition")
    budgets = [int(b) for b in class_budgets]
    if any(b < 1 for b in budgets):
        raise DomainError("every class needs at least one preamble")
    if sum(budgets) > m_total:
        raise BudgetExceedsTotal(
            f"budgets {budgets} need {sum(budgets)} of {m_total} preambles"
        )
    ranges = []
    start = 1
    for b in budgets:
        ranges.append((start, start + b - 1))
        start += b
    return ranges
