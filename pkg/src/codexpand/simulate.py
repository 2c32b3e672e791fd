"""Monte Carlo contention trials and an exact brute-force oracle.

Both exist to cross-check the closed forms and the observation chain by a
route that shares none of their machinery: trials draw codewords and count
what a base station would see; the oracle enumerates every equally likely
codeword assignment and averages exactly.

Reproducibility contract: trial ``i`` of a batch draws from a counter-based
stream keyed by the master seed with the trial index in the highest counter
word, so streams never overlap and no trial depends on how many others ran
before it.  Batch aggregation keeps integer and rational sums only, which are
exact and order-independent, so a batch result is byte-identical no matter
how trials are scheduled across workers.
"""

from __future__ import annotations

import itertools
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import sqrt
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .codebook import CodebookSpec, Mode, enumerate_codewords, sample_codewords
from .errors import DomainError, EnumerationTooLarge

#: Largest number of ordered codeword assignments `brute_force_expected` will visit.
BRUTE_FORCE_CAP = 10**7


@dataclass(frozen=True)
class ScenarioConfig:
    """One Monte Carlo scenario: a codebook under a fixed contender count."""

    spec: CodebookSpec
    n_users: int
    trials: int
    master_seed: int

    def __post_init__(self) -> None:
        if self.n_users < 1:
            raise DomainError("a scenario needs at least one contender")
        if self.trials < 1:
            raise DomainError("a scenario needs at least one trial")
        if not 0 <= self.master_seed < 2**64:
            raise DomainError("master seed must fit in 64 bits")


@dataclass(frozen=True)
class TrialOutcome:
    """What the base station sees after one contention round.

    ``perceived`` counts every codeword consistent with the observation; the
    excess over ``distinct_used`` is the phantom count.  Reference codewords
    are unambiguous, so there ``perceived == distinct_used``.
    """

    singles: int
    collided_codewords: int
    distinct_used: int
    perceived: int
    phantoms: int


class Estimate(NamedTuple):
    """A sample mean with its standard error (``None`` below two trials)."""

    mean: float
    se: float | None


@dataclass(frozen=True)
class AggregateStats:
    """Batch statistics over independent trials.

    ``efficiency`` is the ratio of means mean(singles)/mean(perceived) with a
    delta-method standard error, matching the analytic ratio of expectations.
    ``efficiency_per_trial`` averages the per-trial ratio instead; it is
    reported alongside because either reading of "simulated efficiency" is
    defensible.
    """

    scenario: ScenarioConfig
    trials: int
    singles: Estimate
    collided_codewords: Estimate
    distinct_used: Estimate
    perceived: Estimate
    phantoms: Estimate
    efficiency: Estimate
    efficiency_per_trial: Estimate


def observe(spec: CodebookSpec, codewords: Iterable[Sequence[int]]) -> TrialOutcome:
    """Reduce the transmitted codewords to what the base station perceives."""
    words = [tuple(int(s) for s in w) for w in codewords]
    for w in words:
        if len(w) != spec.length:
            raise DomainError(f"codeword {w} has wrong length for {spec.describe()}")
    multiplicity = Counter(words)
    distinct = len(multiplicity)
    singles = sum(1 for c in multiplicity.values() if c == 1)
    collided = distinct - singles
    if spec.mode is Mode.REFERENCE:
        return TrialOutcome(singles, collided, distinct, distinct, 0)
    perceived = 1
    for column in zip(*words):
        perceived *= len(set(column) - {0}) + 1
    perceived = perceived - 1 if words else 0
    return TrialOutcome(singles, collided, distinct, perceived, perceived - distinct)


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream for one trial, derived in counter mode.

    The trial index occupies the highest counter word, giving each trial a
    disjoint 2**192-long block of the keyed Philox sequence.
    """
    bits = np.random.Philox(key=master_seed, counter=[0, 0, 0, trial_index])
    return np.random.Generator(bits)


def run_trial(spec: CodebookSpec, n_users: int, rng: np.random.Generator) -> TrialOutcome:
    """One contention round: sample codewords uniformly, observe the result."""
    return observe(spec, sample_codewords(spec, n_users, rng).tolist())


class _Sums(NamedTuple):
    """Exact per-batch accumulators; addition is order-independent."""

    trials: int
    s: tuple[int, int, int, int, int]
    sq: tuple[int, int, int, int, int]
    cross_sp: int
    ratio: Fraction
    ratio_sq: Fraction

    def __add__(self, other: "_Sums") -> "_Sums":  # type: ignore[override]
        return _Sums(
            self.trials + other.trials,
            tuple(a + b for a, b in zip(self.s, other.s)),
            tuple(a + b for a, b in zip(self.sq, other.sq)),
            self.cross_sp + other.cross_sp,
            self.ratio + other.ratio,
            self.ratio_sq + other.ratio_sq,
        )


_ZERO_SUMS = _Sums(0, (0,) * 5, (0,) * 5, 0, Fraction(0), Fraction(0))


def _accumulate(config: ScenarioConfig, lo: int, hi: int) -> _Sums:
    s = [0] * 5
    sq = [0] * 5
    cross = 0
    ratio = Fraction(0)
    ratio_sq = Fraction(0)
    for i in range(lo, hi):
        out = run_trial(config.spec, config.n_users, trial_rng(config.master_seed, i))
        fields = (
            out.singles,
            out.collided_codewords,
            out.distinct_used,
            out.perceived,
            out.phantoms,
        )
        for k, v in enumerate(fields):
            s[k] += v
            sq[k] += v * v
        cross += out.singles * out.perceived
        r = Fraction(out.singles, out.perceived)
        ratio += r
        ratio_sq += r * r
    return _Sums(hi - lo, tuple(s), tuple(sq), cross, ratio, ratio_sq)


def _mean_se(total: int | Fraction, total_sq: int | Fraction, n: int) -> Estimate:
    mean = total / Fraction(n) if isinstance(total, Fraction) else total / n
    if n < 2:
        return Estimate(float(mean), None)
    var = (total_sq - Fraction(total) * total / n) / (n - 1)
    return Estimate(float(mean), sqrt(max(0.0, float(var)) / n))


def _ratio_of_means(sums: _Sums) -> Estimate:
    n = sums.trials
    s_x, s_y = sums.s[0], sums.s[3]
    mean = s_x / s_y
    if n < 2:
        return Estimate(mean, None)
    # Delta method around (mean singles, mean perceived): centered second
    # moments of x - r*y, scaled by the perceived mean.
    c_xx = sums.sq[0] - Fraction(s_x) * s_x / n
    c_yy = sums.sq[3] - Fraction(s_y) * s_y / n
    c_xy = sums.cross_sp - Fraction(s_x) * s_y / n
    spread = float(c_xx) - 2 * mean * float(c_xy) + mean * mean * float(c_yy)
    se = sqrt(max(0.0, spread) / (n - 1) / n) / (s_y / n)
    return Estimate(mean, se)


def run_batch(config: ScenarioConfig, workers: int = 1) -> AggregateStats:
    """Run the scenario's trials and aggregate them exactly.

    ``workers`` > 1 spreads trials over processes; results are byte-identical
    for any worker count because every accumulator is an exact sum.
    """
    if workers < 1:
        raise DomainError("need at least one worker")
    trials = config.trials
    if workers == 1 or trials < 2 * workers:
        sums = _accumulate(config, 0, trials)
    else:
        bounds = np.linspace(0, trials, workers + 1, dtype=int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_accumulate, itertools.repeat(config), bounds[:-1], bounds[1:])
            sums = sum(parts, _ZERO_SUMS)
    estimates = [_mean_se(sums.s[k], sums.sq[k], trials) for k in range(5)]
    return AggregateStats(
        scenario=config,
        trials=trials,
        singles=estimates[0],
        collided_codewords=estimates[1],
        distinct_used=estimates[2],
        perceived=estimates[3],
        phantoms=estimates[4],
        efficiency=_ratio_of_means(sums),
        efficiency_per_trial=_mean_se(sums.ratio, sums.ratio_sq, trials),
    )


@dataclass(frozen=True)
class ExpectedOutcome:
    """Exact expectations of the trial fields, as rationals."""

    singles: Fraction
    collided_codewords: Fraction
    distinct_used: Fraction
    perceived: Fraction
    phantoms: Fraction

    def efficiency(self) -> Fraction:
        """Ratio of expectations E[singles] / E[perceived]."""
        return self.singles / self.perceived


def brute_force_expected(
    spec: CodebookSpec, n_users: int, cap: int = BRUTE_FORCE_CAP
) -> ExpectedOutcome:
    """Average the observation over every ordered codeword assignment.

    All ``A**n_users`` assignments are equally likely because contenders pick
    independently and uniformly, so the unweighted average is the exact
    expectation.

    Raises
    ------
    EnumerationTooLarge
        When ``A**n_users`` exceeds ``cap``.
    """
    if n_users < 0:
        raise DomainError("user count cannot be negative")
    words = enumerate_codewords(spec)
    total = len(words) ** n_users
    if total > cap:
        raise EnumerationTooLarge(
            f"{len(words)}**{n_users} assignments exceed the cap of {cap}"
        )
    sums = [0] * 5
    for assignment in itertools.product(words, repeat=n_users):
        out = observe(spec, assignment)
        sums[0] += out.singles
        sums[1] += out.collided_codewords
        sums[2] += out.distinct_used
        sums[3] += out.perceived
        sums[4] += out.phantoms
    return ExpectedOutcome(*(Fraction(v, total) for v in sums))
