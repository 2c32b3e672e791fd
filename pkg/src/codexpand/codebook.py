"""Codeword alphabets for contention over virtual frames.

A virtual frame groups ``L`` random access sub-frames.  In sub-frame ``j`` a
contender either transmits one of ``m_j`` non-idle preambles or stays idle;
idle is encoded as symbol 0 in every sub-frame.  A codeword is the length-L
vector of per-sub-frame symbols.  Two codeword alphabets are supported:

* reference -- exactly one non-idle symbol per virtual frame (one preamble
  sent in one sub-frame), giving ``sum(m_j)`` codewords;
* expanded -- any symbol per sub-frame with the all-idle word excluded,
  giving ``prod(m_j + 1) - 1`` codewords.

Per-sub-frame budgets may differ, which is how restricted sub-codebooks of a
given cardinality are realized.  Whether a restriction should also pin the
identity of the usable preambles (rather than just their count) is left open
here: budgets are counts, and preamble identity is positional.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DomainError, SizeExceedsCap

#: A codeword: one symbol per sub-frame, 0 meaning idle.
Codeword = tuple[int, ...]

#: Largest codebook `enumerate_codewords` will materialize.
ENUMERATION_CAP = 10**6


class Mode(Enum):
    """Codeword alphabet in use."""

    REFERENCE = "reference"
    EXPANDED = "expanded"


@dataclass(frozen=True)
class CodebookSpec:
    """Parameters of a codeword alphabet.

    Parameters
    ----------
    budgets :
        Non-idle preambles usable in each sub-frame, one entry per sub-frame.
    mode :
        Reference or expanded alphabet.
    m_global :
        Preambles provisioned by the system; every budget must fit in it.
        Defaults to ``max(budgets)``.
    """

    budgets: tuple[int, ...]
    mode: Mode
    m_global: int = 0

    def __post_init__(self) -> None:
        budgets = tuple(int(b) for b in self.budgets)
        object.__setattr__(self, "budgets", budgets)
        if len(budgets) < 1:
            raise DomainError("a virtual frame needs at least one sub-frame")
        if any(b < 0 for b in budgets):
            raise DomainError(f"negative preamble budget in {budgets}")
        if all(b == 0 for b in budgets):
            raise DomainError("empty codebook: every sub-frame budget is zero")
        m_global = int(self.m_global) if self.m_global else max(budgets)
        object.__setattr__(self, "m_global", m_global)
        if max(budgets) > m_global:
            raise DomainError(
                f"budget {max(budgets)} exceeds the {m_global} provisioned preambles"
            )
        if self.mode is Mode.REFERENCE and len(set(budgets)) != 1:
            raise DomainError("reference mode uses one uniform preamble budget")

    @classmethod
    def reference(cls, m: int, length: int, m_global: int | None = None) -> "CodebookSpec":
        """Reference alphabet with ``m`` preambles in each of ``length`` sub-frames."""
        return cls((int(m),) * int(length), Mode.REFERENCE, m_global or 0)

    @classmethod
    def expanded(cls, budgets: Sequence[int], m_global: int | None = None) -> "CodebookSpec":
        """Expanded alphabet with the given per-sub-frame budgets."""
        return cls(tuple(int(b) for b in budgets), Mode.EXPANDED, m_global or 0)

    @property
    def length(self) -> int:
        """Sub-frames per virtual frame."""
        return len(self.budgets)

    @property
    def uniform(self) -> bool:
        """True when every sub-frame has the same budget."""
        return len(set(self.budgets)) == 1

    @property
    def size(self) -> int:
        return codebook_size(self)

    def describe(self) -> str:
        budgets = ",".join(str(b) for b in self.budgets)
        text = f"L={self.length},m={budgets},mode={self.mode.value}"
        if self.m_global != max(self.budgets):
            text += f",M={self.m_global}"
        return text


def codebook_size(spec: CodebookSpec) -> int:
    """Number of codewords in the alphabet.

    Reference: ``sum(m_j)`` (equals ``M * L`` for a uniform budget).
    Expanded: ``prod(m_j + 1) - 1``, the all-idle word being excluded.
    """
    if spec.mode is Mode.REFERENCE:
        return sum(spec.budgets)
    return math.prod(b + 1 for b in spec.budgets) - 1


def enumerate_codewords(spec: CodebookSpec, cap: int = ENUMERATION_CAP) -> list[Codeword]:
    """All codewords in lexicographic order of their symbol vectors.

    Raises
    ------
    SizeExceedsCap
        If the codebook holds more than ``cap`` codewords; callers should
        fall back to `sample_codeword`.
    """
    size = codebook_size(spec)
    if size > cap:
        raise SizeExceedsCap(f"{size} codewords exceed the enumeration cap of {cap}")
    if spec.mode is Mode.REFERENCE:
        words = []
        for j, m in enumerate(spec.budgets):
            for p in range(1, m + 1):
                word = [0] * spec.length
                word[j] = p
                words.append(tuple(word))
        words.sort()
        return words
    ranges = [range(b + 1) for b in spec.budgets]
    all_idle = (0,) * spec.length
    return [w for w in itertools.product(*ranges) if w != all_idle]


def sample_codewords(spec: CodebookSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` codewords independently and uniformly, as an (n, L) array.

    Expanded mode draws each symbol uniformly and redraws any all-idle rows,
    which leaves the distribution exactly uniform over the codebook.
    """
    if n < 0:
        raise DomainError("cannot draw a negative number of codewords")
    if spec.mode is Mode.REFERENCE:
        offsets = np.cumsum([0] + list(spec.budgets))
        u = rng.integers(0, offsets[-1], size=n)
        slots = np.searchsorted(offsets, u, side="right") - 1
        out = np.zeros((n, spec.length), dtype=np.int64)
        out[np.arange(n), slots] = u - offsets[slots] + 1
        return out
    highs = np.asarray(spec.budgets, dtype=np.int64) + 1
    out = rng.integers(0, highs, size=(n, spec.length))
    idle = ~out.any(axis=1)
    while idle.any():
        out[idle] = rng.integers(0, highs, size=(int(idle.sum()), spec.length))
        idle = ~out.any(axis=1)
    return out


def sample_codeword(spec: CodebookSpec, rng: np.random.Generator) -> Codeword:
    """Draw one codeword uniformly at random."""
    return tuple(int(s) for s in sample_codewords(spec, 1, rng)[0])


def min_expanded_preambles(m_reference: int, length: int) -> int:
    """Smallest per-sub-frame budget whose expanded codebook can match the
    reference one: ``ceil((m_reference * length + 1) ** (1 / length) - 1)``.

    At exact equality of codebook sizes the bound is attained but not
    exceeded; see `strictly_outperforms_reference` for the strict check.
    """
    if m_reference < 1 or length < 1:
        raise DomainError("need at least one preamble and one sub-frame")
    target = m_reference * length + 1
    x = max(1, math.ceil(target ** (1.0 / length) - 1) - 2)
    while (x + 1) ** length < target:
        x += 1
    return x


def strictly_outperforms_reference(m_expanded: int, m_reference: int, length: int) -> bool:
    """True when the expanded codebook is strictly larger than the reference one."""
    return (m_expanded + 1) ** length - 1 > m_reference * length


def restrictions_for_cardinality(
    length: int, m_global: int, target: int
) -> list[tuple[int, ...]]:
    """All per-sub-frame budget vectors whose expanded codebook has exactly
    ``target`` codewords, in lexicographic order.

    Factors ``target + 1`` into ``length`` ordered factors of at most
    ``m_global + 1`` each; returns an empty list when no factorization exists.
    """
    if length < 1 or m_global < 1:
        raise DomainError("need at least one sub-frame and one preamble")
    if target < 1:
        raise DomainError(f"cardinality target must be positive, got {target}")
    if target > (m_global + 1) ** length - 1:
        return []
    results: list[tuple[int, ...]] = []
    prefix: list[int] = []

    def descend(remaining: int, slots: int) -> None:
        if slots == 0:
            if remaining == 1:
                results.append(tuple(prefix))
            return
        if remaining > (m_global + 1) ** slots:
            return
        for factor in range(1, min(m_global + 1, remaining) + 1):
            if remaining % factor == 0:
                prefix.append(factor - 1)
                descend(remaining // factor, slots - 1)
                prefix.pop()

    descend(target + 1, length)
    return results
