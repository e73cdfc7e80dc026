"""
독립 검증용 기준 구현

matching 은 모든 변 부분집합을 걸러내고, 호몰로지는 grading 순 F₂ 열 축약
(persistence barcode) 으로 계산한다. t_homology.reduce 와는 다른 알고리즘이다.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Dict, List, Set, Tuple

from .errors import UpsilonError
from .graph_core import LabeledGraph, Matching, is_perfect_matching
from .t_homology import TModifiedComplex

logger = logging.getLogger(__name__)

MAX_BRUTE_KAPPA = 20


@dataclass(frozen=True)
class Barcode:
    infinite_bars: Tuple[Fraction, ...]
    finite_bars: Tuple[Tuple[Fraction, Fraction], ...]


def brute_matchings(g: LabeledGraph) -> List[Matching]:
    if g.kappa > MAX_BRUTE_KAPPA:
        raise UpsilonError("E_TOO_LARGE", f"κ={g.kappa} > {MAX_BRUTE_KAPPA}")
    size = len(g.vertices) // 2
    found = []
    for r in range(g.kappa + 1):
        for subset in combinations(range(1, g.kappa + 1), r):
            if r == size and is_perfect_matching(g, subset):
                found.append(Matching(subset))
    return sorted(found)


def persistence_reduce(tc: TModifiedComplex) -> Barcode:
    """
    gr_t 를 정수로 스케일한 뒤 grading 내림차순으로 열 축약

    low(j) = i 이면 유한 막대 (gr(i), gr(i) - gr(j) + 1), 짝 없는 0 열은 무한 막대.
    """
    scale = lcm(*(g.denominator for g in tc.gradings.values())) if tc.gradings else 1
    level: Dict[str, int] = {x: int(g * scale) for x, g in tc.gradings.items()}

    order = sorted(tc.order, key=lambda x: (-level[x], x))
    position = {x: k for k, x in enumerate(order)}

    boundary: List[Set[int]] = [set() for _ in order]
    for (x, y) in tc.matrix:
        boundary[position[x]].add(position[y])

    reduced: List[Set[int]] = []
    pivot_of: Dict[int, int] = {}
    for j, column in enumerate(boundary):
        column = set(column)
        while column:
            low = max(column)
            if low not in pivot_of:
                pivot_of[low] = j
                break
            column ^= reduced[pivot_of[low]]
        reduced.append(column)

    finite = []
    for low, j in pivot_of.items():
        length = level[order[low]] - level[order[j]] + scale
        if length > 0:
            finite.append((Fraction(level[order[low]], scale), Fraction(length, scale)))
    infinite = [
        Fraction(level[x], scale)
        for j, x in enumerate(order)
        if not reduced[j] and j not in pivot_of
    ]
    logger.debug(f"barcode: 무한 {len(infinite)}개, 유한 {len(finite)}개")
    return Barcode(tuple(sorted(infinite)), tuple(sorted(finite)))
