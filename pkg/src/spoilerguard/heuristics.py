"""TimeGate selection heuristics: minimum distance and minimum past."""
from __future__ import annotations

import enum
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence


class HeuristicKind(str, enum.Enum):
    MINDIST = "mindist"
    MINPAST = "minpast"


class EmptyCandidates(ValueError):
    pass


class NoMementoAtOrBefore(LookupError):
    """Every candidate lies after the desired datetime."""


class OrderViolation(ValueError):
    pass


@dataclass(frozen=True)
class Selection:
    index: int
    datetime: int


def select_mindist(candidates: Sequence[int], desired: int) -> Selection:
    """Closest candidate to ``desired``; an exact tie goes to the earlier one.

    With duplicate datetimes the first occurrence is returned.
    """
    if not candidates:
        raise EmptyCandidates("no candidates to select from")
    k = bisect_right(candidates, desired)
    if k == 0:
        i = 0
    elif k == len(candidates):
        i = k - 1
    else:
        before, after = candidates[k - 1], candidates[k]
        i = k - 1 if desired - before <= after - desired else k
    # step back over duplicates of the chosen datetime
    while i > 0 and candidates[i - 1] == candidates[i]:
        i -= 1
    return Selection(i, candidates[i])


def select_minpast(candidates: Sequence[int], desired: int) -> Selection:
    """Latest candidate at or before ``desired``. Never selects the future."""
    if not candidates:
        raise EmptyCandidates("no candidates to select from")
    k = bisect_right(candidates, desired)
    if k == 0:
        raise NoMementoAtOrBefore(
            f"all {len(candidates)} candidates are after {desired}")
    return Selection(k - 1, candidates[k - 1])


def select(kind: HeuristicKind, candidates: Sequence[int], desired: int) -> Selection:
    if HeuristicKind(kind) is HeuristicKind.MINDIST:
        return select_mindist(candidates, desired)
    return select_minpast(candidates, desired)


def midpoint(earlier: int, later: int) -> int:
    """Floor of the halfway second between two datetimes."""
    if earlier > later:
        raise OrderViolation(f"{earlier} > {later}")
    return (earlier + later) // 2
