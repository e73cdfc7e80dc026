import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, NamedTuple, Sequence, Tuple

from .errors import ComplexValidationError, UpsilonError, Violation
from .graph_core import (
    LabeledGraph,
    WeightVector,
    coloring_ideal_is_trivial,
    enumerate_matchings,
    parse_rational,
    read_json,
    theta_graph,
    validate_graph,
)
from .weight_ring import EdgeMonomial

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Generator:
    """생성원: 매칭 id → 유리수 grading"""
    id: str
    gradings: Dict[str, Fraction] = field(hash=False)


@dataclass(frozen=True)
class Arrow:
    """∂x 의 항 u^a·y"""
    source: str
    target: str
    exponents: EdgeMonomial


@dataclass(frozen=True, eq=False)
class TangleComplex:
    """F₂[u_1,…,u_κ] 위의 다중 grading 사슬 복합체"""
    graph: LabeledGraph
    generators: Tuple[Generator, ...]
    arrows: Tuple[Arrow, ...]
    metadata: str = ""

    @property
    def boundary_pairs(self) -> int:
        return len(self.graph.pos_vertices)

    @cached_property
    def by_id(self) -> Dict[str, Generator]:
        return {g.id: g for g in self.generators}

    def gr(self, generator_id: str, matching_id: str) -> Fraction:
        return self.by_id[generator_id].gradings[matching_id]


class CFKGenerator(NamedTuple):
    id: str
    maslov: Fraction
    alexander: Fraction


class CFKArrow(NamedTuple):
    source: str
    target: str
    z: int
    w: int


@dataclass(frozen=True)
class KnotCFKData:
    """매듭 Floer 복합체 (M, A grading 과 z/w 지수를 가진 화살표)"""
    generators: Tuple[CFKGenerator, ...]
    arrows: Tuple[CFKArrow, ...]
    name: str = ""


# --- 검증 --------------------------------------------------------------------

def validate_complex(c: TangleComplex) -> List[Violation]:
    """
    불변식 검사

    Returns:
        위반 목록 (비어 있으면 유효)
    """
    report: List[Violation] = []
    g = c.graph

    if not coloring_ideal_is_trivial(g):
        report.append(Violation("E_UNSUPPORTED_IDEAL", "색칠 아이디얼이 자명하지 않은 그래프"))

    keys = [m.canonical_id for m in enumerate_matchings(g)]
    if not keys:
        report.append(Violation("E_EMPTY_POLYTOPE", "완전 매칭이 없는 그래프"))
    key_set = set(keys)

    counts = Counter(gen.id for gen in c.generators)
    for gen_id, count in counts.items():
        if count > 1:
            report.append(Violation("E_DUPLICATE_ID", f"중복된 생성원 id: {gen_id}", (gen_id,)))

    graded = set()
    for gen in c.generators:
        missing = [k for k in keys if k not in gen.gradings]
        unknown = sorted(k for k in gen.gradings if k not in key_set)
        for k in missing:
            report.append(Violation("E_MISSING_GRADING", f"{gen.id}: 매칭 {k} 의 grading 없음", (gen.id, k)))
        for k in unknown:
            report.append(Violation("E_UNKNOWN_MATCHING", f"{gen.id}: 매칭이 아닌 키 {k}", (gen.id, k)))
        if not missing:
            graded.add(gen.id)

    usable: List[Arrow] = []
    for arrow in c.arrows:
        where = (arrow.source, arrow.target)
        if arrow.source not in counts or arrow.target not in counts:
            report.append(Violation("E_UNKNOWN_GENERATOR", f"알 수 없는 생성원: {arrow.source}→{arrow.target}", where))
            continue
        if len(arrow.exponents) != g.kappa:
            report.append(Violation("E_EXPONENT", f"{arrow.source}→{arrow.target}: 지수 길이 {len(arrow.exponents)} ≠ κ={g.kappa}", where))
            continue
        usable.append(arrow)

    for arrow, count in Counter(usable).items():
        if count > 1:
            report.append(Violation("E_DUPLICATE_ARROW", f"중복된 화살표: {arrow.source}→{arrow.target} {list(arrow.exponents)}", (arrow.source, arrow.target)))

    by_id = c.by_id
    for arrow in usable:
        if arrow.source not in graded or arrow.target not in graded:
            continue
        x, y = by_id[arrow.source], by_id[arrow.target]
        for m in enumerate_matchings(g):
            k = m.canonical_id
            drop = x.gradings[k] - y.gradings[k] + 2 * sum(arrow.exponents[i - 1] for i in m.edge_ids)
            if drop != 1:
                report.append(Violation(
                    "E_GRADING",
                    f"{arrow.source}→{arrow.target}, 매칭 {k}: gr 차이 + 2Σa = {drop} ≠ 1",
                    (arrow.source, arrow.target, k),
                ))

    outgoing: Dict[str, List[Arrow]] = defaultdict(list)
    for arrow in usable:
        outgoing[arrow.source].append(arrow)
    for x in sorted(outgoing):
        paths: Counter = Counter()
        for first in outgoing[x]:
            for second in outgoing.get(first.target, ()):
                paths[(second.target, first.exponents + second.exponents)] += 1
        odd = sorted({z for (z, _), count in paths.items() if count % 2})
        for z in odd:
            report.append(Violation("E_D_SQUARED", f"∂² ≠ 0: {x} → {z}", (x, z)))

    return report


def ensure_valid(c: TangleComplex) -> TangleComplex:
    report = validate_complex(c)
    if report:
        raise ComplexValidationError(report)
    return c


# --- 파일 형식 ----------------------------------------------------------------

def parse_complex(raw: Dict) -> TangleComplex:
    """JSON dict → TangleComplex (검증 전)"""
    if not isinstance(raw, dict) or 'graph' not in raw or 'generators' not in raw:
        raise UpsilonError("E_PARSE", "복합체에는 graph 와 generators 가 필요함")
    graph = validate_graph(raw['graph'])

    generators = []
    for item in raw['generators']:
        if not isinstance(item, dict) or 'id' not in item or not isinstance(item.get('gr', {}), dict):
            raise UpsilonError("E_PARSE", f"생성원 형식 오류: {item!r}")
        gradings = {str(k): parse_rational(v) for k, v in item.get('gr', {}).items()}
        generators.append(Generator(str(item['id']), gradings))

    arrows = []
    for item in raw.get('arrows', []):
        if not isinstance(item, dict) or not {'from', 'to', 'exp'} <= item.keys():
            raise UpsilonError("E_PARSE", f"화살표 형식 오류: {item!r}")
        if not isinstance(item['exp'], list):
            raise UpsilonError("E_PARSE", f"exp 는 리스트여야 함: {item!r}")
        arrows.append(Arrow(str(item['from']), str(item['to']), EdgeMonomial(tuple(item['exp']))))

    return TangleComplex(graph, tuple(generators), tuple(arrows), str(raw.get('metadata', "")))


def load_complex(path: str) -> TangleComplex:
    """
    복합체 JSON 파일 로드 및 검증

    Raises:
        UpsilonError: E_PARSE / E_IO
        ComplexValidationError: 검증 위반
    """
    c = ensure_valid(parse_complex(read_json(path)))
    logger.info(f"복합체 로드 완료: {path} (생성원 {len(c.generators)}개, 화살표 {len(c.arrows)}개)")
    return c


def dump_complex(c: TangleComplex) -> Dict:
    keys = [m.canonical_id for m in enumerate_matchings(c.graph)]
    data = {
        'graph': c.graph.to_dict(),
        'generators': [
            {'id': gen.id, 'gr': {k: str(gen.gradings[k]) for k in keys if k in gen.gradings}}
            for gen in c.generators
        ],
        'arrows': [
            {'from': a.source, 'to': a.target, 'exp': list(a.exponents)}
            for a in c.arrows
        ],
    }
    if c.metadata:
        data['metadata'] = c.metadata
    return data


def write_complex(c: TangleComplex, path: str):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(dump_complex(c), f, ensure_ascii=False, indent=2)
        f.write("\n")


def parse_cfk(raw: Dict, name: str = "") -> KnotCFKData:
    if not isinstance(raw, dict) or 'generators' not in raw:
        raise UpsilonError("E_PARSE", "CFK 에는 generators 가 필요함")
    try:
        generators = tuple(
            CFKGenerator(str(item['id']), parse_rational(item['M']), parse_rational(item['A']))
            for item in raw['generators']
        )
        arrows = tuple(
            CFKArrow(str(item['from']), str(item['to']), item.get('z', 0), item.get('w', 0))
            for item in raw.get('arrows', [])
        )
    except (KeyError, TypeError) as e:
        raise UpsilonError("E_PARSE", f"CFK 형식 오류: {e}")
    for arrow in arrows:
        if any(isinstance(e, bool) or not isinstance(e, int) or e < 0 for e in (arrow.z, arrow.w)):
            raise UpsilonError("E_EXPONENT", f"z/w 지수는 음이 아닌 정수여야 함: {arrow}")
    return KnotCFKData(generators, arrows, str(raw.get('name', name)))


def load_cfk(path: str) -> KnotCFKData:
    return parse_cfk(read_json(path), name=path)


# --- 구성 --------------------------------------------------------------------

def from_knot_cfk(k: KnotCFKData) -> TangleComplex:
    """
    매듭 복합체를 Θ₂ 복합체로 (e1 = z 가닥, e2 = w 가닥)

    gr_{e1} = M - 2A, gr_{e2} = M, 화살표 지수 (z, w).
    """
    maslov = {gen.id: gen.maslov for gen in k.generators}
    drops = [
        a for a in k.arrows
        if a.source in maslov and a.target in maslov
        and maslov[a.source] - maslov[a.target] + 2 * a.w != 1
    ]
    if drops:
        raise UpsilonError(
            "E_MASLOV_DROP",
            f"Maslov 차이가 1 - 2w 가 아닌 화살표 {len(drops)}개",
            {'arrows': [[a.source, a.target] for a in drops]},
        )

    generators = tuple(
        Generator(gen.id, {"1": gen.maslov - 2 * gen.alexander, "2": gen.maslov})
        for gen in k.generators
    )
    arrows = tuple(Arrow(a.source, a.target, EdgeMonomial((a.z, a.w))) for a in k.arrows)
    return ensure_valid(TangleComplex(theta_graph(2), generators, arrows, k.name or "cfk"))


def staircase_cfk(steps: Sequence[int], name: str = "") -> KnotCFKData:
    """
    L-space 매듭의 계단 복합체

    Args:
        steps: 계단 길이 (트레포일 [1,1], T(3,4) [1,2,2,1])
    """
    if not steps or len(steps) % 2 or any(s <= 0 for s in steps) or sum(steps) % 2:
        raise UpsilonError("E_RANGE", f"계단 길이가 올바르지 않음: {list(steps)}")

    maslov, alexander = Fraction(0), Fraction(sum(steps), 2)
    generators = [CFKGenerator("x0", maslov, alexander)]
    arrows = []
    for k in range(len(steps) // 2):
        w, z = steps[2 * k], steps[2 * k + 1]
        maslov, alexander = maslov + 1 - 2 * w, alexander - w
        generators.append(CFKGenerator(f"x{2 * k + 1}", maslov, alexander))
        maslov, alexander = maslov - 1, alexander - z
        generators.append(CFKGenerator(f"x{2 * k + 2}", maslov, alexander))
        arrows.append(CFKArrow(f"x{2 * k + 1}", f"x{2 * k}", 0, w))
        arrows.append(CFKArrow(f"x{2 * k + 1}", f"x{2 * k + 2}", z, 0))
    return KnotCFKData(tuple(generators), tuple(arrows), name or f"staircase{list(steps)}")


def _require_theta(*complexes: TangleComplex):
    for c in complexes:
        if not c.graph.is_theta():
            raise UpsilonError("E_SHAPE_MISMATCH", f"Θ_n 형태가 아닌 복합체: {c.metadata or '?'}")


def _escape_id(gen_id: str) -> str:
    return gen_id.replace("\\", "\\\\").replace("*", "\\*")


def _pair_id(left: str, right: str) -> str:
    # 이스케이프한 id 에는 맨 '*' 가 없으므로 곱 id 는 단사
    return f"{_escape_id(left)}*{_escape_id(right)}"


def tensor(c1: TangleComplex, c2: TangleComplex) -> TangleComplex:
    """꼭짓점 연결합: grading 은 더하고 화살표는 Leibniz 규칙"""
    _require_theta(c1, c2)
    if c1.graph.kappa != c2.graph.kappa:
        raise UpsilonError("E_SHAPE_MISMATCH", f"변 개수 불일치: {c1.graph.kappa} ≠ {c2.graph.kappa}")

    keys = [m.canonical_id for m in enumerate_matchings(c1.graph)]
    generators = tuple(
        Generator(_pair_id(x.id, y.id), {k: x.gradings[k] + y.gradings[k] for k in keys})
        for x in c1.generators
        for y in c2.generators
    )
    arrows = [
        Arrow(_pair_id(a.source, y.id), _pair_id(a.target, y.id), a.exponents)
        for a in c1.arrows
        for y in c2.generators
    ]
    arrows += [
        Arrow(_pair_id(x.id, b.source), _pair_id(x.id, b.target), b.exponents)
        for x in c1.generators
        for b in c2.arrows
    ]
    return TangleComplex(c1.graph, generators, tuple(arrows), f"tensor({c1.metadata}, {c2.metadata})")


def _stabilize(c: TangleComplex, slot: int, extra: int) -> TangleComplex:
    n = c.graph.kappa
    generators = tuple(
        Generator(gen.id, {**gen.gradings, **{str(j): gen.gradings[str(slot)] for j in range(n + 1, n + extra + 1)}})
        for gen in c.generators
    )
    arrows = tuple(
        Arrow(a.source, a.target, EdgeMonomial(a.exponents.exponents + (a.exponents[slot - 1],) * extra))
        for a in c.arrows
    )
    return TangleComplex(theta_graph(n + extra), generators, arrows, c.metadata)


def stabilize(c: TangleComplex, slot: int, extra: int) -> TangleComplex:
    """
    Θ_n → Θ_{n+extra}: 새 변은 slot 변의 지수와 grading 을 복사한다

    Raises:
        UpsilonError: E_SHAPE_MISMATCH, E_BAD_SLOT, E_RANGE
    """
    _require_theta(c)
    if isinstance(slot, bool) or not isinstance(slot, int) or not 1 <= slot <= c.graph.kappa:
        raise UpsilonError("E_BAD_SLOT", f"slot {slot} 가 1..{c.graph.kappa} 범위 밖")
    if isinstance(extra, bool) or not isinstance(extra, int) or extra < 1:
        raise UpsilonError("E_RANGE", f"extra 는 양의 정수여야 함: {extra}")
    return _stabilize(c, slot, extra)


def permute_edges(c: TangleComplex, order: Sequence[int]) -> TangleComplex:
    """새 변 j 가 기존 변 order[j-1] 이 되도록 번호를 다시 붙인다 (Θ_n 전용)"""
    _require_theta(c)
    n = c.graph.kappa
    if sorted(order) != list(range(1, n + 1)):
        raise UpsilonError("E_INDEX", f"1..{n} 의 순열이 아님: {list(order)}")
    generators = tuple(
        Generator(gen.id, {str(j): gen.gradings[str(old)] for j, old in enumerate(order, start=1)})
        for gen in c.generators
    )
    arrows = tuple(
        Arrow(a.source, a.target, EdgeMonomial(tuple(a.exponents[old - 1] for old in order)))
        for a in c.arrows
    )
    return TangleComplex(c.graph, generators, arrows, c.metadata)


def glue(c1: TangleComplex, c2: TangleComplex) -> TangleComplex:
    """
    c1 의 마지막 변과 c2 의 마지막 변을 따라 붙이기

    결과는 n+n'-2 개의 변을 가진다. 앞의 n-1 개는 c1 의 변 1..n-1,
    나머지는 c2 의 변 1..n'-1 에 대응한다.
    """
    _require_theta(c1, c2)
    n, n_prime = c1.graph.kappa, c2.graph.kappa
    if n < 2 or n_prime < 2:
        raise UpsilonError("E_SHAPE_MISMATCH", f"붙이기에는 변이 2 개 이상 필요함: {n}, {n_prime}")

    left = _stabilize(c1, n, n_prime - 2)
    right = _stabilize(c2, n_prime, n - 2)
    order = list(range(n_prime, n_prime + n - 1)) + list(range(1, n_prime))
    right = permute_edges(right, order)

    glued = tensor(left, right)
    return TangleComplex(glued.graph, glued.generators, glued.arrows, f"glue({c1.metadata}, {c2.metadata})")


def dual(c: TangleComplex) -> TangleComplex:
    """화살표를 뒤집고 grading 부호를 바꾼 쌍대 복합체 (거울상)"""
    generators = tuple(
        Generator(gen.id, {k: -v for k, v in gen.gradings.items()}) for gen in c.generators
    )
    arrows = tuple(Arrow(a.target, a.source, a.exponents) for a in c.arrows)
    return TangleComplex(c.graph, generators, arrows, f"dual({c.metadata})")


def diagonal_link_weights(n: int, t) -> WeightVector:
    """n 성분 링크 그래프의 대각선 점 (t,…,t, 2-t,…,2-t)"""
    t = parse_rational(t)
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise UpsilonError("E_RANGE", f"성분 수는 양의 정수여야 함: {n}")
    if not 0 <= t <= 2:
        raise UpsilonError("E_RANGE", f"t 는 [0, 2] 안이어야 함: {t}")
    return WeightVector((t,) * n + (2 - t,) * n)
