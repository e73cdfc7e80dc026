import json
import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, Iterable, List, NamedTuple, Sequence, Tuple, Union

import networkx as nx

from .errors import UpsilonError

logger = logging.getLogger(__name__)


def parse_rational(value: Union[str, int, Fraction]) -> Fraction:
    """
    "p/q" 문자열 또는 정수를 정확한 유리수로 변환

    float 은 받지 않는다 (정확도 손실).
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise UpsilonError("E_PARSE", f"유리수가 아님: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise UpsilonError("E_PARSE", f"유리수 파싱 실패: {value!r}")


@dataclass(frozen=True, order=True)
class WeightVector:
    """변 가중치 벡터 t ∈ Q^κ"""
    coords: Tuple[Fraction, ...]

    @classmethod
    def of(cls, values: Iterable[Union[str, int, Fraction]]) -> "WeightVector":
        return cls(tuple(parse_rational(v) for v in values))

    @classmethod
    def parse(cls, text: str) -> "WeightVector":
        parts = [p for p in text.split(',')]
        if not text.strip() or any(not p.strip() for p in parts):
            raise UpsilonError("E_PARSE", f"가중치 벡터 파싱 실패: {text!r}")
        return cls.of(parts)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, index):
        return self.coords[index]

    def to_strings(self) -> List[str]:
        return [str(c) for c in self.coords]

    def __str__(self) -> str:
        return "(" + ",".join(self.to_strings()) + ")"


def parse_weight_vector(text: str) -> WeightVector:
    return WeightVector.parse(text)


@dataclass(frozen=True, order=True)
class Matching:
    """완전 매칭 (변 번호는 1부터)"""
    edge_ids: Tuple[int, ...]

    @property
    def canonical_id(self) -> str:
        return "-".join(str(i) for i in self.edge_ids)

    @classmethod
    def from_canonical_id(cls, text: str) -> "Matching":
        try:
            return cls(tuple(sorted(int(part) for part in text.split('-'))))
        except ValueError:
            raise UpsilonError("E_PARSE", f"매칭 id 파싱 실패: {text!r}")

    def __str__(self) -> str:
        return "{" + ",".join(f"e{i}" for i in self.edge_ids) + "}"


class Component(NamedTuple):
    vertices: Tuple[str, ...]
    edge_ids: Tuple[int, ...]


@dataclass(frozen=True)
class LabeledGraph:
    """
    라벨 붙은 균형 이분 그래프

    edges[i-1] 이 변 e_i 이고 항상 (neg, pos) 순서로 저장한다.
    """
    pos_vertices: Tuple[str, ...]
    neg_vertices: Tuple[str, ...]
    edges: Tuple[Tuple[str, str], ...]

    @property
    def kappa(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> Tuple[str, ...]:
        return self.pos_vertices + self.neg_vertices

    @cached_property
    def incidence(self) -> Dict[str, Tuple[int, ...]]:
        table: Dict[str, List[int]] = {v: [] for v in self.vertices}
        for index, (neg, pos) in enumerate(self.edges, start=1):
            table[neg].append(index)
            table[pos].append(index)
        return {v: tuple(ids) for v, ids in table.items()}

    @cached_property
    def components(self) -> Tuple[Component, ...]:
        graph = nx.MultiGraph()
        graph.add_nodes_from(self.vertices)
        graph.add_edges_from(self.edges)

        order = {v: k for k, v in enumerate(self.vertices)}
        result = []
        for part in nx.connected_components(graph):
            vertices = tuple(sorted(part, key=order.__getitem__))
            edge_ids = tuple(
                i for i, (neg, _) in enumerate(self.edges, start=1) if neg in part
            )
            result.append(Component(vertices, edge_ids))
        result.sort(key=lambda c: order[c.vertices[0]])
        return tuple(result)

    def is_theta(self) -> bool:
        """Θ_n 형태 (정점 두 개, 모든 변이 둘을 잇는다)"""
        return len(self.pos_vertices) == 1 and len(self.neg_vertices) == 1

    def to_dict(self) -> Dict:
        return {
            'pos': list(self.pos_vertices),
            'neg': list(self.neg_vertices),
            'edges': [[neg, pos] for neg, pos in self.edges],
        }


def theta_graph(n: int) -> LabeledGraph:
    """정점 p, n 을 n 개의 변으로 잇는 Θ_n"""
    if n < 1:
        raise UpsilonError("E_RANGE", f"Θ_n 의 n 은 1 이상이어야 함: {n}")
    return LabeledGraph(("p",), ("n",), tuple(("n", "p") for _ in range(n)))


def link_graph(n: int) -> LabeledGraph:
    """
    n 성분 링크 그래프 (Θ₂ 의 n 개 서로소 합)

    성분 i 는 변 e_i 와 e_{n+i} 를 가진다.
    """
    if n < 1:
        raise UpsilonError("E_RANGE", f"링크 성분 수는 1 이상이어야 함: {n}")
    pos = tuple(f"p{i}" for i in range(1, n + 1))
    neg = tuple(f"n{i}" for i in range(1, n + 1))
    edges = tuple((neg[i], pos[i]) for i in range(n)) * 2
    return LabeledGraph(pos, neg, edges)


def _read_edges(raw_edges, violations: List[Tuple[str, str]]) -> List[Tuple[object, object]]:
    indexed = []
    for position, item in enumerate(raw_edges, start=1):
        if isinstance(item, dict):
            index = item.get('index', position)
            ends = (item.get('neg'), item.get('pos'))
        elif isinstance(item, (list, tuple)) and len(item) == 2:
            index = position
            ends = (item[0], item[1])
        else:
            raise UpsilonError("E_PARSE", f"변 {position} 형식 오류: {item!r}")
        if not all(isinstance(end, str) for end in ends):
            raise UpsilonError("E_PARSE", f"변 {position} 의 끝점은 정점 id 문자열이어야 함: {item!r}")
        if isinstance(index, bool) or not isinstance(index, int):
            raise UpsilonError("E_PARSE", f"변 번호가 정수가 아님: {index!r}")
        indexed.append((index, ends))

    indices = [index for index, _ in indexed]
    duplicates = sorted(i for i, count in Counter(indices).items() if count > 1)
    if duplicates:
        violations.append(("E_INDEX", f"중복된 변 번호: {duplicates}"))
    elif sorted(indices) != list(range(1, len(indices) + 1)):
        violations.append(("E_INDEX", f"변 번호가 1..{len(indices)} 이 아님: {sorted(indices)}"))
    indexed.sort(key=lambda pair: pair[0])
    return [ends for _, ends in indexed]


def validate_graph(raw: Dict) -> LabeledGraph:
    """
    그래프 설명(dict)을 검증해 LabeledGraph 생성

    Args:
        raw: {"pos": [...], "neg": [...], "edges": [[neg, pos], ...]}

    Returns:
        검증된 LabeledGraph

    Raises:
        UpsilonError: 첫 위반 코드, details 에 전체 위반 목록
    """
    if not isinstance(raw, dict) or not all(k in raw for k in ('pos', 'neg', 'edges')):
        raise UpsilonError("E_PARSE", "그래프에는 pos, neg, edges 가 필요함")
    pos, neg, raw_edges = raw['pos'], raw['neg'], raw['edges']
    if not all(isinstance(part, list) for part in (pos, neg, raw_edges)):
        raise UpsilonError("E_PARSE", "pos, neg, edges 는 리스트여야 함")
    if not all(isinstance(v, str) for v in pos + neg):
        raise UpsilonError("E_PARSE", "정점 id 는 문자열이어야 함")
    if not raw_edges:
        raise UpsilonError("E_PARSE", "변이 없는 그래프")

    violations: List[Tuple[str, str]] = []

    for vertex, count in Counter(pos + neg).items():
        if count > 1:
            violations.append(("E_VERTEX", f"중복된 정점 id: {vertex}"))

    pos_set, neg_set = set(pos), set(neg)
    edges = []
    for index, (a, b) in enumerate(_read_edges(raw_edges, violations), start=1):
        if a not in pos_set | neg_set or b not in pos_set | neg_set:
            violations.append(("E_VERTEX", f"e{index}: 알 수 없는 정점 ({a}, {b})"))
            continue
        if a in neg_set and b in pos_set:
            edges.append((a, b))
        elif a in pos_set and b in neg_set:
            edges.append((b, a))
        else:
            violations.append(("E_BIPARTITE", f"e{index}: 같은 부호의 정점을 잇는 변 ({a}, {b})"))

    if not violations:
        covered = {v for edge in edges for v in edge}
        for vertex in pos + neg:
            if vertex not in covered:
                violations.append(("E_ISOLATED", f"고립된 정점: {vertex}"))

    if violations:
        code, message = violations[0]
        raise UpsilonError(code, message, {
            'violations': [{'code': c, 'message': m} for c, m in violations]
        })

    graph = LabeledGraph(tuple(pos), tuple(neg), tuple(edges))

    unbalanced = []
    for component in graph.components:
        plus = sum(1 for v in component.vertices if v in pos_set)
        minus = len(component.vertices) - plus
        if plus != minus:
            unbalanced.append(("E_UNBALANCED", f"성분 {list(component.vertices)}: +{plus} / -{minus}"))
    if unbalanced:
        code, message = unbalanced[0]
        raise UpsilonError(code, message, {
            'violations': [{'code': c, 'message': m} for c, m in unbalanced]
        })

    logger.debug(f"그래프 검증 완료: κ={graph.kappa}, 성분 {len(graph.components)}개")
    return graph


def load_graph(path: str) -> LabeledGraph:
    """그래프 JSON 파일 로드"""
    return validate_graph(read_json(path))


def read_json(path: str):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except OSError as e:
        raise UpsilonError("E_IO", f"파일을 읽을 수 없음: {path} ({e.strerror})")
    except json.JSONDecodeError as e:
        raise UpsilonError("E_PARSE", f"JSON 파싱 실패: {path} ({e.msg}, line {e.lineno})")


def is_perfect_matching(g: LabeledGraph, edge_ids: Sequence[int]) -> bool:
    if any(not 1 <= i <= g.kappa for i in edge_ids) or len(set(edge_ids)) != len(edge_ids):
        return False
    touched = Counter(v for i in edge_ids for v in g.edges[i - 1])
    return all(touched[v] == 1 for v in g.vertices)


def enumerate_matchings(g: LabeledGraph) -> List[Matching]:
    """
    모든 완전 매칭 열거

    neg 정점을 순서대로 백트래킹한다. 결과는 변 번호 사전식 순서.
    """
    return list(_matchings(g))


@lru_cache(maxsize=256)
def _matchings(g: LabeledGraph) -> Tuple[Matching, ...]:
    if len(g.pos_vertices) != len(g.neg_vertices):
        return ()

    options: Dict[str, List[Tuple[int, str]]] = {v: [] for v in g.neg_vertices}
    for index, (neg, pos) in enumerate(g.edges, start=1):
        options[neg].append((index, pos))

    found: List[Matching] = []
    chosen: List[int] = []
    used = set()

    def backtrack(k: int):
        if k == len(g.neg_vertices):
            found.append(Matching(tuple(sorted(chosen))))
            return
        for index, pos in options[g.neg_vertices[k]]:
            if pos in used:
                continue
            used.add(pos)
            chosen.append(index)
            backtrack(k + 1)
            chosen.pop()
            used.discard(pos)

    backtrack(0)
    found.sort()
    logger.debug(f"매칭 {len(found)}개 열거")
    return tuple(found)


def matching_weight(g: LabeledGraph, m: Matching) -> WeightVector:
    """매칭 꼭짓점 t_m (m 의 변은 2, 나머지는 0)"""
    if not is_perfect_matching(g, m.edge_ids):
        raise UpsilonError("E_NOT_MATCHING", f"완전 매칭이 아님: {m}", {'matching': m.canonical_id})
    chosen = set(m.edge_ids)
    return WeightVector(tuple(Fraction(2 if i in chosen else 0) for i in range(1, g.kappa + 1)))


def coloring_ideal_is_trivial(g: LabeledGraph) -> bool:
    """
    색칠 아이디얼 생성원이 0 인지 확인

    성분마다 + 정점 단항식의 합과 - 정점 단항식의 합을 F₂ 위에서 비교한다.
    """
    pos_set = set(g.pos_vertices)
    for component in g.components:
        plus: Counter = Counter()
        minus: Counter = Counter()
        for vertex in component.vertices:
            monomial = tuple(sorted(g.incidence[vertex]))
            (plus if vertex in pos_set else minus)[monomial] += 1
        odd_plus = {mono for mono, count in plus.items() if count % 2}
        odd_minus = {mono for mono, count in minus.items() if count % 2}
        if odd_plus != odd_minus:
            return False
    return True


def test_matchings(path: str):
    """매칭 열거 테스트 함수"""
    g = load_graph(path)
    print(f"κ = {g.kappa}, 성분 {len(g.components)}개")
    for m in enumerate_matchings(g):
        print(f"  {m.canonical_id}: {matching_weight(g, m)}")
    print(f"색칠 아이디얼 자명: {coloring_ideal_is_trivial(g)}")


if __name__ == "__main__":
    import sys

    logging.basicConfig(
        level=logging.DEBUG,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    test_matchings(sys.argv[1] if len(sys.argv) > 1 else "data/c4.json")
