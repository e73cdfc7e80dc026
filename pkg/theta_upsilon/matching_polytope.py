import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, List, NamedTuple, Sequence, Tuple

import networkx as nx
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from .errors import UpsilonError
from .graph_core import (
    LabeledGraph,
    Matching,
    WeightVector,
    enumerate_matchings,
    is_perfect_matching,
    matching_weight,
)

logger = logging.getLogger(__name__)

TWO = Fraction(2)


def _check_length(g: LabeledGraph, t: WeightVector):
    if len(t) != g.kappa:
        raise UpsilonError("E_LENGTH", f"가중치 길이 {len(t)} ≠ κ={g.kappa}", {'t': t.to_strings()})


def satisfies_equations(g: LabeledGraph, t: WeightVector) -> bool:
    """각 정점에서 변 가중치 합이 2 인지 (음수 허용)"""
    return all(
        sum((t[i - 1] for i in g.incidence[v]), Fraction(0)) == TWO
        for v in g.vertices
    )


def contains(g: LabeledGraph, t: WeightVector) -> bool:
    """t ∈ L_G 여부"""
    if len(t) != g.kappa:
        logger.debug(f"길이 불일치: {len(t)} ≠ {g.kappa}")
        return False
    return all(c >= 0 for c in t) and satisfies_equations(g, t)


def _require_member(g: LabeledGraph, t: WeightVector):
    _check_length(g, t)
    if not contains(g, t):
        raise UpsilonError("E_NOT_IN_POLYTOPE", f"L_G 에 속하지 않는 점: {t}", {'t': t.to_strings()})


def affine_dimension(points: Sequence[WeightVector]) -> int:
    """점들의 아핀 껍질 차원 (정확한 유리수 rank)"""
    if len(points) <= 1:
        return 0
    base = points[0]
    rows = [
        [QQ(c.numerator, c.denominator) for c in (p_i - b_i for p_i, b_i in zip(p, base))]
        for p in points[1:]
    ]
    return DomainMatrix(rows, (len(rows), len(base)), QQ).rank()


def solution_polytope(g: LabeledGraph) -> Tuple[List[WeightVector], int]:
    """
    L_G 의 꼭짓점(사전식 정렬)과 아핀 차원

    Returns:
        (꼭짓점 리스트, 차원). 매칭이 없으면 ([], -1)
    """
    vertices = sorted(matching_weight(g, m) for m in enumerate_matchings(g))
    if not vertices:
        return [], -1
    return vertices, affine_dimension(vertices)


def segment_point(t0: WeightVector, t1: WeightVector, s: Fraction) -> WeightVector:
    """t0 + s(t1 - t0)"""
    return WeightVector(tuple(a + s * (b - a) for a, b in zip(t0, t1)))


def vertex_weights(n: int, i: int, a: Fraction) -> WeightVector:
    """Θ_n 위의 점 t^i_a (t_j = a, t_i = 2 - (n-1)a)"""
    if not 1 <= i <= n:
        raise UpsilonError("E_INDEX", f"변 번호 {i} 가 1..{n} 범위 밖")
    a = Fraction(a)
    return WeightVector(tuple(TWO - (n - 1) * a if j == i else a for j in range(1, n + 1)))


# --- 볼록 분해 ---------------------------------------------------------------

@dataclass(frozen=True)
class ConvexCombination:
    """매칭 꼭짓점들의 볼록 결합"""
    terms: Tuple[Tuple[Matching, Fraction], ...]

    def point(self, g: LabeledGraph) -> WeightVector:
        total = [Fraction(0)] * g.kappa
        for m, coefficient in self.terms:
            for i in m.edge_ids:
                total[i - 1] += 2 * coefficient
        return WeightVector(tuple(total))

    def to_dict(self) -> List[Dict]:
        return [{'matching': m.canonical_id, 'coefficient': str(c)} for m, c in self.terms]


def _find_loop(g: LabeledGraph, t: WeightVector) -> List[int]:
    """가장 작은 분수 변에서 시작하는 분수 변 루프 (DFS)"""
    fractional = [i for i in range(1, g.kappa + 1) if 0 < t[i - 1] < TWO]
    first = fractional[0]

    graph = nx.MultiGraph()
    for i in fractional[1:]:
        neg, pos = g.edges[i - 1]
        graph.add_edge(neg, pos, key=i)

    neg, pos = g.edges[first - 1]
    path = next(nx.all_simple_paths(graph, pos, neg))
    loop = [first] + [min(graph[u][v]) for u, v in zip(path, path[1:])]
    logger.debug(f"루프 선택: {['e%d' % i for i in loop]}")
    return loop


def _split(g: LabeledGraph, t: WeightVector) -> List[Tuple[WeightVector, Fraction]]:
    loop = _find_loop(g, t)
    odd = loop[0::2]
    even = loop[1::2]
    t_o = min(t[i - 1] for i in odd)
    t_e = min(t[i - 1] for i in even)

    first = list(t)
    second = list(t)
    for i in odd:
        first[i - 1] += t_e
        second[i - 1] -= t_o
    for i in even:
        first[i - 1] -= t_e
        second[i - 1] += t_o

    total = t_o + t_e
    return [
        (WeightVector(tuple(first)), t_o / total),
        (WeightVector(tuple(second)), t_e / total),
    ]


def _as_matching(g: LabeledGraph, t: WeightVector) -> Matching:
    m = Matching(tuple(i for i in range(1, g.kappa + 1) if t[i - 1] == TWO))
    if not is_perfect_matching(g, m.edge_ids):
        raise UpsilonError("E_NOT_MATCHING", f"정수점이 매칭이 아님: {t}")
    return m


def decompose_to_matchings(g: LabeledGraph, t: WeightVector) -> ConvexCombination:
    """
    분수 변 루프를 따라 t 를 두 점으로 나누며 매칭 꼭짓점의 볼록 결합을 만든다

    Raises:
        UpsilonError: E_NOT_IN_POLYTOPE
    """
    _require_member(g, t)

    pending: Dict[WeightVector, Fraction] = {t: Fraction(1)}
    terms: Dict[Matching, Fraction] = {}
    while pending:
        following: Dict[WeightVector, Fraction] = {}
        for point, weight in sorted(pending.items()):
            if all(c == 0 or c == TWO for c in point):
                m = _as_matching(g, point)
                terms[m] = terms.get(m, Fraction(0)) + weight
                continue
            for child, share in _split(g, point):
                if share:
                    following[child] = following.get(child, Fraction(0)) + weight * share
        pending = following

    return ConvexCombination(tuple(sorted(terms.items())))


def _walks_closed(g: LabeledGraph, cycle: Sequence[int]) -> bool:
    for start in g.edges[cycle[0] - 1]:
        neg, pos = g.edges[cycle[0] - 1]
        current = pos if start == neg else neg
        for i in cycle[1:]:
            neg, pos = g.edges[i - 1]
            if current == neg:
                current = pos
            elif current == pos:
                current = neg
            else:
                break
        else:
            if current == start:
                return True
    return False


def loop_move(g: LabeledGraph, t: WeightVector, cycle: Sequence[int]) -> WeightVector:
    """
    루프 e_i, e_{i_1}, …, e_{i_k} 를 따라 t_i 만큼 번갈아 이동

    첫 변은 0 이 되고 결과는 여전히 정점 합 = 2 를 만족한다 (음수일 수 있음).
    """
    _check_length(g, t)
    cycle = list(cycle)
    if (
        len(cycle) < 2
        or len(set(cycle)) != len(cycle)
        or any(not 1 <= i <= g.kappa for i in cycle)
        or not _walks_closed(g, cycle)
    ):
        raise UpsilonError("E_NOT_A_LOOP", f"닫힌 루프가 아님: {cycle}", {'cycle': cycle})
    if not satisfies_equations(g, t):
        raise UpsilonError("E_NOT_IN_POLYTOPE", f"정점 합 = 2 를 만족하지 않음: {t}", {'t': t.to_strings()})

    shift = t[cycle[0] - 1]
    moved = list(t)
    moved[cycle[0] - 1] = Fraction(0)
    for j, i in enumerate(cycle[1:], start=1):
        moved[i - 1] += shift if j % 2 else -shift
    return WeightVector(tuple(moved))


# --- Δ-복합체 ----------------------------------------------------------------

class Location(NamedTuple):
    simplex: Tuple[int, ...]
    coords: Tuple[Fraction, ...]


@dataclass(frozen=True, eq=False)
class DeltaComplex:
    """
    L_G 의 원뿔 삼각분할

    vertices 는 사전식 정렬, 면(face)의 꼭짓점 번호가 작을수록 사전식으로 작다.
    apexes 는 재귀 단계별 (면, t_min 번호) 기록이다.
    """
    graph: LabeledGraph
    vertices: Tuple[WeightVector, ...]
    matchings: Tuple[Matching, ...]
    dimension: int
    top_simplices: Tuple[Tuple[int, ...], ...]
    apexes: Tuple[Tuple[Tuple[int, ...], int], ...]

    @property
    def t_min(self) -> WeightVector:
        return self.vertices[0]

    @cached_property
    def simplices(self) -> Dict[int, Tuple[Tuple[int, ...], ...]]:
        """차원별 모든 단체 (최상위 단체의 면 포함)"""
        faces = set()
        for top in self.top_simplices:
            size = len(top)
            for mask in range(1, 1 << size):
                faces.add(tuple(top[k] for k in range(size) if mask >> k & 1))
        grouped: Dict[int, List[Tuple[int, ...]]] = {}
        for face in sorted(faces):
            grouped.setdefault(len(face) - 1, []).append(face)
        return {d: tuple(grouped[d]) for d in sorted(grouped)}

    def to_dict(self) -> Dict:
        return {
            'vertices': [v.to_strings() for v in self.vertices],
            'matchings': [m.canonical_id for m in self.matchings],
            'dimension': self.dimension,
            'simplices': {str(d): [list(s) for s in faces] for d, faces in self.simplices.items()},
        }


class _Triangulator:
    def __init__(self, vertices: Sequence[WeightVector]):
        self.vertices = list(vertices)
        self.kappa = len(vertices[0])
        self._dims: Dict[Tuple[int, ...], int] = {}
        self._cones: Dict[Tuple[int, ...], List[Tuple[int, ...]]] = {}
        self.apexes: Dict[Tuple[int, ...], int] = {}

    def dim(self, face: Tuple[int, ...]) -> int:
        if face not in self._dims:
            self._dims[face] = affine_dimension([self.vertices[v] for v in face])
        return self._dims[face]

    def facets(self, face: Tuple[int, ...]) -> List[Tuple[int, ...]]:
        d = self.dim(face)
        found = set()
        for i in range(self.kappa):
            sub = tuple(v for v in face if self.vertices[v][i] == 0)
            if 0 < len(sub) < len(face) and self.dim(sub) == d - 1:
                found.add(sub)
        return sorted(found)

    def triangulate(self, face: Tuple[int, ...]) -> List[Tuple[int, ...]]:
        if face in self._cones:
            return self._cones[face]
        if self.dim(face) == 0:
            result = [(face[0],)]
        else:
            apex = face[0]
            self.apexes[face] = apex
            result = []
            for facet in self.facets(face):
                if apex in facet:
                    continue
                result.extend((apex,) + simplex for simplex in self.triangulate(facet))
        self._cones[face] = result
        return result


def build_delta_complex(g: LabeledGraph) -> DeltaComplex:
    """
    ∂₀L_G (t_min 을 포함하지 않는 면) 을 재귀적으로 삼각분할하고 t_min 에서 원뿔

    Raises:
        UpsilonError: E_EMPTY_POLYTOPE
    """
    pairs = sorted((matching_weight(g, m), m) for m in enumerate_matchings(g))
    if not pairs:
        raise UpsilonError("E_EMPTY_POLYTOPE", "완전 매칭이 없어 L_G 가 비어 있음")
    vertices = tuple(v for v, _ in pairs)
    matchings = tuple(m for _, m in pairs)

    triangulator = _Triangulator(vertices)
    whole = tuple(range(len(vertices)))
    dimension = triangulator.dim(whole)
    tops = tuple(sorted(triangulator.triangulate(whole)))
    for simplex in tops:
        if len(simplex) != dimension + 1:
            raise UpsilonError("E_INTERNAL", f"최상위 단체 차원 불일치: {simplex}")

    logger.debug(f"Δ-복합체: 꼭짓점 {len(vertices)}개, 차원 {dimension}, 최상위 단체 {len(tops)}개")
    return DeltaComplex(
        graph=g,
        vertices=vertices,
        matchings=matchings,
        dimension=dimension,
        top_simplices=tops,
        apexes=tuple(sorted(triangulator.apexes.items())),
    )


@lru_cache(maxsize=64)
def delta_complex_for(g: LabeledGraph) -> DeltaComplex:
    return build_delta_complex(g)


def _locate(vertices: Sequence[WeightVector], face: Tuple[int, ...], t: WeightVector) -> Location:
    zeros = [i for i, c in enumerate(t) if c == 0]
    smallest = tuple(v for v in face if all(vertices[v][i] == 0 for i in zeros))
    if smallest != face:
        return _locate(vertices, smallest, t)
    if len(face) == 1:
        return Location(face, (Fraction(1),))

    apex = vertices[face[0]]
    # 반직선 apex + λ(t - apex) 가 ∂₀ 에 닿는 λ (> 1, t 가 상대 내부에 있으므로)
    lam = min(a / (a - c) for a, c in zip(apex, t) if c < a)
    hit = WeightVector(tuple(a + lam * (c - a) for a, c in zip(apex, t)))
    simplex, coords = _locate(vertices, face, hit)

    pairs = [(face[0], 1 - 1 / lam)] + [(v, c / lam) for v, c in zip(simplex, coords)]
    pairs.sort()
    return Location(tuple(v for v, _ in pairs), tuple(c for _, c in pairs))


def locate(dc: DeltaComplex, t: WeightVector) -> Location:
    """
    t 를 상대 내부에 포함하는 단체와 무게중심 좌표 (모두 > 0, 합 1)

    Raises:
        UpsilonError: E_NOT_IN_POLYTOPE
    """
    _require_member(dc.graph, t)
    return _locate(dc.vertices, tuple(range(len(dc.vertices))), t)


def test_polytope(path: str):
    """다면체/분해 테스트 함수"""
    from .graph_core import load_graph

    g = load_graph(path)
    vertices, dim = solution_polytope(g)
    print(f"꼭짓점 {len(vertices)}개, 차원 {dim}")
    dc = build_delta_complex(g)
    for d, faces in dc.simplices.items():
        print(f"  {d}-단체: {list(faces)}")

    center = WeightVector(tuple(sum(v[i] for v in vertices) / len(vertices) for i in range(g.kappa)))
    print(f"무게중심 {center}")
    for m, c in decompose_to_matchings(g, center).terms:
        print(f"  {c} · {m}")
    print(f"위치: {locate(dc, center)}")


if __name__ == "__main__":
    import sys

    logging.basicConfig(
        level=logging.DEBUG,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    test_polytope(sys.argv[1] if len(sys.argv) > 1 else "data/c4.json")
