import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import UpsilonError
from .graph_core import WeightVector
from .matching_polytope import DeltaComplex, Location, delta_complex_for, locate
from .tangle_complex import TangleComplex
from .weight_ring import ZERO, HahnElement, divide_by_monomial, specialize, valuation

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TModifiedComplex:
    """u_i ↦ u^{t_i} 로 특수화한 R 위의 복합체"""
    base: TangleComplex
    t: WeightVector
    location: Location
    gradings: Dict[str, Fraction]
    matrix: Dict[Tuple[str, str], HahnElement]

    @property
    def order(self) -> Tuple[str, ...]:
        return tuple(gen.id for gen in self.base.generators)


@dataclass(frozen=True)
class HomologyStructure:
    """자유 부분 grading 과 꼬임 부분 (grading, 차수 b) 목록"""
    free_part: Tuple[Fraction, ...]
    torsion_part: Tuple[Tuple[Fraction, Fraction], ...]

    @property
    def free_rank(self) -> int:
        return len(self.free_part)

    def to_dict(self) -> Dict:
        return {
            'free': [str(g) for g in self.free_part],
            'free_rank': self.free_rank,
            'torsion': [{'gr': str(g), 'order': str(b)} for g, b in self.torsion_part],
        }


def _resolve(c: TangleComplex, dc: Optional[DeltaComplex]) -> DeltaComplex:
    if dc is None:
        return delta_complex_for(c.graph)
    if dc.graph != c.graph:
        raise UpsilonError("E_SHAPE_MISMATCH", "Δ-복합체와 복합체의 그래프가 다름")
    return dc


def t_grading(c: TangleComplex, t: WeightVector, dc: Optional[DeltaComplex] = None) -> Dict[str, Fraction]:
    """t 를 포함하는 단체의 무게중심 좌표로 매칭별 grading 을 섞는다"""
    dc = _resolve(c, dc)
    return _combine(c, dc, locate(dc, t))


def _combine(c: TangleComplex, dc: DeltaComplex, location: Location) -> Dict[str, Fraction]:
    keys = [dc.matchings[v].canonical_id for v in location.simplex]
    return {
        gen.id: sum((n * gen.gradings[k] for n, k in zip(location.coords, keys)), Fraction(0))
        for gen in c.generators
    }


def t_modify(c: TangleComplex, t: WeightVector, dc: Optional[DeltaComplex] = None) -> TModifiedComplex:
    """
    t-수정 복합체 생성

    Raises:
        UpsilonError: E_NOT_IN_POLYTOPE, E_INHOMOGENEOUS
    """
    dc = _resolve(c, dc)
    location = locate(dc, t)
    gradings = _combine(c, dc, location)

    matrix: Dict[Tuple[str, str], HahnElement] = {}
    for arrow in c.arrows:
        entry = specialize(arrow.exponents, t)
        expected = gradings[arrow.target] - gradings[arrow.source] + 1
        if entry.support[0] != expected:
            raise UpsilonError(
                "E_INHOMOGENEOUS",
                f"{arrow.source}→{arrow.target}: 지수 {entry.support[0]} ≠ gr_t 차이 + 1 = {expected}",
                {'arrow': [arrow.source, arrow.target], 't': t.to_strings()},
            )
        key = (arrow.source, arrow.target)
        total = matrix.get(key, ZERO) + entry
        if total.is_zero():
            matrix.pop(key, None)
        else:
            matrix[key] = total

    return TModifiedComplex(c, t, location, gradings, matrix)


def reduce(tc: TModifiedComplex) -> HomologyStructure:
    """
    최소 valuation 항을 pivot 으로 행/열을 소거하는 단항식 행렬 축약

    pivot 쌍 (x→y, u^e) 은 꼬임 R/(u^e) (grading gr_t(y)) 가 되고
    짝이 없는 생성원이 자유 부분이 된다.
    """
    rows: Dict[str, Dict[str, HahnElement]] = {x: {} for x in tc.order}
    cols: Dict[str, Dict[str, HahnElement]] = {x: {} for x in tc.order}
    for (x, y), value in sorted(tc.matrix.items()):
        rows[x][y] = value
        cols[y][x] = value

    def add(r: str, q: str, value: HahnElement):
        entry = rows[r].get(q, ZERO) + value
        if entry.is_zero():
            rows[r].pop(q, None)
            cols[q].pop(r, None)
        elif not entry.is_monomial():
            raise UpsilonError("E_INHOMOGENEOUS", f"단항식이 아닌 항 ({r}, {q}): {entry}")
        else:
            rows[r][q] = entry
            cols[q][r] = entry

    gr = tc.gradings
    torsion: List[Tuple[Fraction, Fraction]] = []
    paired = set()
    while True:
        candidates = [(valuation(v), x, y) for x, row in rows.items() for y, v in row.items()]
        if not candidates:
            break
        e, x, y = min(candidates)
        logger.debug(f"pivot {x}→{y}: u^{{{e}}}")

        # y 로 들어오는 다른 화살표 제거: other ← other + (D[other][y]/p)·x
        for other in sorted(r for r in cols[y] if r != x):
            factor = divide_by_monomial(cols[y][other], e)
            for q, v in list(rows[x].items()):
                add(other, q, factor * v)
            for r, v in list(cols[other].items()):
                add(r, x, factor * v)

        # x 에서 나가는 다른 화살표 제거: y ← y + (D[x][other]/p)·other
        for other in sorted(q for q in rows[x] if q != y):
            factor = divide_by_monomial(rows[x][other], e)
            for r, v in list(cols[y].items()):
                add(r, other, factor * v)
            for q, v in list(rows[other].items()):
                add(y, q, factor * v)

        if rows[y] or cols[x] or set(rows[x]) != {y} or set(cols[y]) != {x}:
            raise UpsilonError("E_D_SQUARED", f"pivot {x}→{y} 소거 후 ∂² ≠ 0")

        for gen in (x, y):
            del rows[gen]
            del cols[gen]
        paired.update((x, y))
        if e > 0:
            torsion.append((gr[y], e))

    free = tuple(sorted(gr[x] for x in tc.order if x not in paired))
    return HomologyStructure(free, tuple(sorted(torsion)))


def expected_rank(c: TangleComplex) -> int:
    return 2 ** (c.boundary_pairs - 1)


def check_rank(c: TangleComplex, structure: HomologyStructure, t: WeightVector) -> HomologyStructure:
    if structure.free_rank != expected_rank(c):
        raise UpsilonError(
            "E_RANK",
            f"자유 랭크 {structure.free_rank} ≠ 2^{c.boundary_pairs - 1}",
            {'t': t.to_strings(), 'free': [str(g) for g in structure.free_part]},
        )
    return structure


def homology_at(c: TangleComplex, t: WeightVector, dc: Optional[DeltaComplex] = None) -> HomologyStructure:
    """
    t 에서의 호몰로지 (자유 랭크 2^{n-1} 검사 포함)

    Raises:
        UpsilonError: E_RANK
    """
    return check_rank(c, reduce(t_modify(c, t, dc)), t)


def upsilon_at(c: TangleComplex, t: WeightVector, dc: Optional[DeltaComplex] = None) -> List[Fraction]:
    """Υ(t): 자유 부분 grading (오름차순)"""
    return list(homology_at(c, t, dc).free_part)


def d_invariant(c: TangleComplex) -> Fraction:
    """Θ₁ 복합체의 Υ(2) = d"""
    if c.graph.kappa != 1 or not c.graph.is_theta():
        raise UpsilonError("E_SHAPE_MISMATCH", f"Θ₁ 복합체가 아님 (κ={c.graph.kappa})")
    return upsilon_at(c, WeightVector((Fraction(2),)))[0]


def test_upsilon(path: str, text: str = "1,1"):
    """Υ 계산 테스트 함수"""
    from .tangle_complex import load_complex

    c = load_complex(path)
    t = WeightVector.parse(text)
    tc = t_modify(c, t)
    print(f"t = {t}, 단체 {tc.location.simplex}, 좌표 {[str(n) for n in tc.location.coords]}")
    for gen_id, g in tc.gradings.items():
        print(f"  gr_t({gen_id}) = {g}")
    for (x, y), entry in sorted(tc.matrix.items()):
        print(f"  {x} → {y}: {entry}")
    print(f"호몰로지: {reduce(tc).to_dict()}")


if __name__ == "__main__":
    import sys

    logging.basicConfig(
        level=logging.DEBUG,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    test_upsilon(*(sys.argv[1:] or ["data/trefoil.json"]))
