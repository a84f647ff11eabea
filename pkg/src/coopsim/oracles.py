"""Brute-force enumerators used as ground truth in tests.

Every function here is exact (full enumeration or exact convolution) with a
hard size bound; none falls back to sampling.
"""

from __future__ import annotations

import numpy as np

from .dbpc import DbpcParams, TableLaw
from .errors import EnumerationBoundError, InvalidArgumentError

ENUMERATION_LIMIT = 10**7
SUPPORT_LIMIT = 10**6
_CHUNK = 1 << 16


def _placement_counts(total: int, balls: int, boxes: int):
    """Yield (chunk_size, counts) with counts[t, b] = balls in box b, over all
    boxes**balls placements encoded in mixed radix."""
    radix = boxes ** np.arange(balls, dtype=np.int64)
    for lo in range(0, total, _CHUNK):
        codes = np.arange(lo, min(lo + _CHUNK, total), dtype=np.int64)
        digits = (codes[:, None] // radix[None, :]) % boxes
        counts = np.zeros((codes.size, boxes), dtype=np.int64)
        for b in range(boxes):
            counts[:, b] = (digits == b).sum(axis=1)
        yield counts


def balls_boxes_event_prob(balls: int, boxes: int, k: int, protected_suffix: int = 0) -> float:
    """Probability that exactly ``k`` of the first ``boxes - protected_suffix``
    boxes hold exactly two balls while every remaining box holds at most one,
    when ``balls`` are thrown independently and uniformly into ``boxes``.
    """
    if balls < 0 or boxes < 1:
        raise InvalidArgumentError("need balls >= 0 and boxes >= 1")
    if not 0 <= protected_suffix <= boxes:
        raise InvalidArgumentError("protected_suffix must lie in [0, boxes]")
    total = boxes**balls
    if total > ENUMERATION_LIMIT:
        raise EnumerationBoundError(f"{boxes}^{balls} placements exceed {ENUMERATION_LIMIT}")
    first = boxes - protected_suffix
    hits = 0
    for counts in _placement_counts(total, balls, boxes):
        head = counts[:, :first]
        tail = counts[:, first:]
        ok = (
            ((head == 2).sum(axis=1) == k)
            & (head <= 2).all(axis=1)
            & ((tail <= 1).all(axis=1) if tail.size else True)
        )
        hits += int(ok.sum())
    return hits / total


def exact_first_generation_law(vertices: int, parasites: int) -> np.ndarray:
    """Exact law of the number of first-generation infections on a complete
    graph: ``parasites`` uniform throws into ``vertices - 1`` targets, counting
    targets hit at least twice.  Entry j is P(j new infections).
    """
    if vertices < 2:
        raise InvalidArgumentError(f"need at least 2 vertices, got {vertices}")
    if parasites < 1:
        raise InvalidArgumentError(f"need at least 1 parasite, got {parasites}")
    boxes = vertices - 1
    total = boxes**parasites
    if total > ENUMERATION_LIMIT:
        raise EnumerationBoundError(f"{boxes}^{parasites} placements exceed {ENUMERATION_LIMIT}")
    freq = np.zeros(parasites // 2 + 1, dtype=np.int64)
    for counts in _placement_counts(total, parasites, boxes):
        infected = (counts >= 2).sum(axis=1)
        freq += np.bincount(infected, minlength=freq.size)
    return freq / total


def exact_dbpc_step_law(params: DbpcParams, k: int) -> np.ndarray:
    """Exact one-step law of a branching process with cooperation from size k:
    the k-fold convolution of the offspring table with the C(k,2)-fold
    convolution of the cooperation table.  Entry j is P(next size = j).
    """
    if k < 0:
        raise InvalidArgumentError(f"k must be nonnegative, got {k}")
    if not isinstance(params.offspring, TableLaw) or not isinstance(params.cooperation, TableLaw):
        raise InvalidArgumentError("exact step law needs Table offspring and cooperation laws")
    pairs = k * (k - 1) // 2
    support = k * (params.offspring.weights.size - 1) + pairs * (
        params.cooperation.weights.size - 1
    ) + 1
    if support > SUPPORT_LIMIT:
        raise EnumerationBoundError(f"convolution support {support} exceeds {SUPPORT_LIMIT}")
    law = np.array([1.0])
    for _ in range(k):
        law = np.convolve(law, params.offspring.weights)
    for _ in range(pairs):
        law = np.convolve(law, params.cooperation.weights)
    return law
