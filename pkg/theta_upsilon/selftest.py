"""
수용 검사 모음 (CLI `selftest`)

각 절은 (이름, 검사 수, 실패 목록) 을 돌려주며 실패는 처음 몇 건만 남긴다.
"""
import logging
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .errors import UpsilonError
from .graph_core import (
    LabeledGraph,
    WeightVector,
    enumerate_matchings,
    link_graph,
    theta_graph,
    validate_graph,
)
from .matching_polytope import build_delta_complex, decompose_to_matchings, locate
from .oracle import brute_matchings, persistence_reduce
from .settings import Settings
from .t_homology import d_invariant, reduce, t_modify, upsilon_at
from .tangle_complex import TangleComplex, glue, stabilize, tensor
from .upsilon_pl import (
    SegmentOptions,
    f_i_components,
    jump_delta_i,
    reconstruct_segment,
    tau_matrix,
    upsilon_vertex_values,
)
from .weight_ring import ZERO
from . import corpus

logger = logging.getLogger(__name__)

MAX_FAILURES = 5


@dataclass
class SectionResult:
    name: str
    checks: int = 0
    failures: List[str] = field(default_factory=list)
    failure_count: int = 0
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.failure_count == 0

    def check(self, ok: bool, message: str):
        self.checks += 1
        if not ok:
            self.failure_count += 1
            if len(self.failures) < MAX_FAILURES:
                self.failures.append(message)

    def to_dict(self) -> Dict:
        return {
            'name': self.name,
            'passed': self.passed,
            'checks': self.checks,
            'failure_count': self.failure_count,
            'failures': self.failures,
        }


@dataclass
class SelftestReport:
    seed: int
    sections: List[SectionResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.sections)

    def to_dict(self) -> Dict:
        return {
            'seed': self.seed,
            'passed': self.passed,
            'sections': [s.to_dict() for s in self.sections],
        }


def c4_graph() -> LabeledGraph:
    return validate_graph({
        'pos': ["a", "b"],
        'neg': ["c", "d"],
        'edges': [["c", "a"], ["d", "a"], ["d", "b"], ["c", "b"]],
    })


def random_graph(rng: random.Random, max_kappa: int = 12) -> LabeledGraph:
    """완전 매칭 하나에 임의 변을 더한 균형 이분 그래프"""
    size = rng.randint(1, min(5, max_kappa))
    pos = [f"p{k}" for k in range(size)]
    neg = [f"n{k}" for k in range(size)]
    targets = rng.sample(range(size), size)
    edges = [[neg[k], pos[targets[k]]] for k in range(size)]
    for _ in range(rng.randint(0, max_kappa - size)):
        edges.append([rng.choice(neg), rng.choice(pos)])
    rng.shuffle(edges)
    return validate_graph({'pos': pos, 'neg': neg, 'edges': edges})


def random_point(rng: random.Random, g: LabeledGraph, terms: Optional[int] = None) -> WeightVector:
    """매칭 꼭짓점의 양의 유리 계수 볼록 결합"""
    matchings = enumerate_matchings(g)
    if terms is not None and len(matchings) > terms:
        matchings = rng.sample(matchings, terms)
    weights = [rng.randint(1, 9) for _ in matchings]
    total = sum(weights)
    coords = [Fraction(0)] * g.kappa
    for m, w in zip(matchings, weights):
        for i in m.edge_ids:
            coords[i - 1] += Fraction(2 * w, total)
    return WeightVector(tuple(coords))


def shuffled_complex(rng: random.Random, c: TangleComplex) -> TangleComplex:
    """생성원과 화살표 순서만 섞은 같은 복합체"""
    generators, arrows = list(c.generators), list(c.arrows)
    rng.shuffle(generators)
    rng.shuffle(arrows)
    return TangleComplex(c.graph, tuple(generators), tuple(arrows), c.metadata)


def _split_gradings(t: WeightVector, n: int):
    left = WeightVector(tuple(t[: n - 1]) + (sum(t[n - 1:], Fraction(0)),))
    right = WeightVector(tuple(t[n - 1:]) + (sum(t[: n - 1], Fraction(0)),))
    return left, right


# --- 절별 검사 -----------------------------------------------------------------

def check_polytope(rng: random.Random, config: Dict, result: SectionResult):
    for _ in range(config.get('graph_count', 200)):
        g = random_graph(rng)
        fast = enumerate_matchings(g)
        result.check(fast == brute_matchings(g), f"매칭 불일치: {g.to_dict()}")
        for _ in range(config.get('points_per_graph', 50)):
            t = random_point(rng, g, terms=4)
            combination = decompose_to_matchings(g, t)
            ok = (
                combination.point(g) == t
                and sum(c for _, c in combination.terms) == 1
                and all(c > 0 for _, c in combination.terms)
            )
            result.check(ok, f"분해 실패: {g.to_dict()} t={t}")


def check_delta_complex(rng: random.Random, config: Dict, result: SectionResult):
    expected = {
        "theta2": (theta_graph(2), [(0, 1)]),
        "theta3": (theta_graph(3), [(0, 1, 2)]),
        "c4": (c4_graph(), [(0, 1)]),
        "square": (link_graph(2), [(0, 1, 3), (0, 2, 3)]),
    }
    complexes = {}
    for name, (g, tops) in expected.items():
        dc = build_delta_complex(g)
        complexes[name] = dc
        result.check(list(dc.top_simplices) == tops, f"{name}: 최상위 단체 {list(dc.top_simplices)} ≠ {tops}")

    count = config.get('locate_points', 1000)
    names = list(complexes)
    for k in range(count):
        dc = complexes[names[k % len(names)]]
        t = random_point(rng, dc.graph)
        location = locate(dc, t)
        rebuilt = [Fraction(0)] * len(t)
        for v, c in zip(location.simplex, location.coords):
            for i, x in enumerate(dc.vertices[v]):
                rebuilt[i] += c * x
        ok = (
            WeightVector(tuple(rebuilt)) == t
            and sum(location.coords) == 1
            and all(c > 0 for c in location.coords)
        )
        result.check(ok, f"{names[k % len(names)]}: 위치 복원 실패 t={t}")


def _grading_corpus() -> Dict[str, TangleComplex]:
    items = corpus.corpus()
    items["stabilize(trefoil,2,1)"] = stabilize(items["trefoil"], 2, 1)
    items["stabilize(figure-eight,1,2)"] = stabilize(items["figure-eight"], 1, 2)
    return items


def check_grading_law(rng: random.Random, config: Dict, result: SectionResult):
    for name, c in _grading_corpus().items():
        for _ in range(config.get('random_t', 20)):
            t = random_point(rng, c.graph)
            try:
                tc = t_modify(c, t)
            except UpsilonError as e:
                result.check(False, f"{name} t={t}: {e.code}")
                continue
            ok = all(
                entry.is_monomial() and entry.support[0] == tc.gradings[y] - tc.gradings[x] + 1
                for (x, y), entry in tc.matrix.items()
            )
            result.check(ok, f"{name} t={t}: 단항식/grading 위반")

            squared = {}
            for (x, y), first in tc.matrix.items():
                for (y2, z), second in tc.matrix.items():
                    if y2 == y:
                        squared[(x, z)] = squared.get((x, z), ZERO) + first * second
            result.check(all(v.is_zero() for v in squared.values()), f"{name} t={t}: ∂² ≠ 0")


def check_oracle(rng: random.Random, config: Dict, result: SectionResult):
    for name, c in _grading_corpus().items():
        for _ in range(config.get('oracle_t', 40)):
            tc = t_modify(c, random_point(rng, c.graph))
            structure = reduce(tc)
            barcode = persistence_reduce(tc)
            ok = (
                structure.free_part == barcode.infinite_bars
                and structure.torsion_part == barcode.finite_bars
            )
            result.check(ok, f"{name} t={tc.t}: {structure.to_dict()} ≠ {barcode}")

            permuted = reduce(t_modify(shuffled_complex(rng, c), tc.t))
            result.check(permuted == structure, f"{name} t={tc.t}: 기저 순서에 따라 달라짐 {permuted.to_dict()}")


def check_knot_recovery(opts: SegmentOptions, result: SectionResult):
    c = corpus.trefoil()
    values = upsilon_vertex_values(c)
    result.check(all(v == [0] for v in values.values()), f"trefoil 꼭짓점 값 {values}")

    ends = (WeightVector.of([2, 0]), WeightVector.of([0, 2]))
    f = reconstruct_segment(c, *ends, opts)[0]
    result.check(f.certified and len(f.interior_breakpoints()) == 1, f"trefoil 꺾임점 {f.to_dict()}")
    if f.interior_breakpoints():
        s = f.interior_breakpoints()[0]
        a = 2 * s
        jump = jump_delta_i(c, 1, a, opts)
        result.check(jump.a * jump.delta == 2, f"trefoil a·Δ = {jump.a * jump.delta}")

    matrix = tau_matrix(c, opts)
    result.check(matrix[0][1] in (1, -1) and matrix[1][0] in (1, -1), f"trefoil τ 행렬 {matrix}")

    g = reconstruct_segment(corpus.figure_eight(), *ends, opts)[0]
    result.check(set(g.values) == {0} and g.certified, f"8자 매듭 Υ {g.to_dict()}")


def check_additivity(rng: random.Random, config: Dict, result: SectionResult):
    knots = corpus.knot_complexes()
    for a, b in corpus.corpus_pairs():
        product = tensor(knots[a], knots[b])
        for _ in range(config.get('additivity_t', 30)):
            t = random_point(rng, product.graph)
            left = upsilon_at(product, t)
            right = [upsilon_at(knots[a], t)[0] + upsilon_at(knots[b], t)[0]]
            result.check(left == right, f"{a}⊗{b} t={t}: {left} ≠ {right}")


def check_gluing(rng: random.Random, config: Dict, result: SectionResult):
    knots = corpus.knot_complexes()
    t23 = knots["trefoil"]
    cases = [
        ("trefoil", t23, "trefoil", t23),
        ("trefoil", t23, "unknot", corpus.unknot()),
        ("trefoil", t23, "theta3-trivial", corpus.theta3_trivial()),
        ("trefoil", t23, "trefoil*figure-eight", tensor(t23, knots["figure-eight"])),
        ("trefoil", t23, "stabilize(trefoil,2,1)", stabilize(t23, 2, 1)),
        ("stabilize(T(3,4),1,1)", stabilize(knots["T(3,4)"], 1, 1), "trefoil*trefoil", tensor(t23, t23)),
    ]
    for name1, c1, name2, c2 in cases:
        glued = glue(c1, c2)
        n = c1.graph.kappa
        for _ in range(config.get('glue_t', 20)):
            t = random_point(rng, glued.graph)
            left_t, right_t = _split_gradings(t, n)
            expected = [upsilon_at(c1, left_t)[0] + upsilon_at(c2, right_t)[0]]
            got = upsilon_at(glued, t)
            result.check(got == expected, f"glue({name1}, {name2}) t={t}: {got} ≠ {expected}")


def check_d_invariant(result: SectionResult):
    for c, expected in ((corpus.s3(), 0), (corpus.theta1_with_pair(), -2), (corpus.lens_like(), Fraction(1, 2))):
        d = d_invariant(c)
        result.check(d == expected, f"{c.metadata}: d = {d} ≠ {expected}")


def check_fi(config: Dict, opts: SegmentOptions, result: SectionResult):
    count = config.get('fi_k', 5)
    knots = corpus.knot_complexes()
    cache: Dict[str, List[Fraction]] = {}

    def components(name: str, c: TangleComplex) -> List[Fraction]:
        if name not in cache:
            cache[name] = f_i_components(c, 1, count, opts)
        return cache[name]

    for name in ("unknot", "trefoil"):
        values = components(name, knots[name])
        result.check(all(v == 0 for v in values), f"{name}: f_1 = {values}")

    t34 = components("T(3,4)", knots["T(3,4)"])
    result.check(t34[0] == 1 and all(v == 0 for v in t34[1:]), f"T(3,4): f_1 = {t34}")

    for a, b in (("trefoil", "T(3,4)"), ("T(3,4)", "mirror-trefoil"), ("T(3,4)", "figure-eight")):
        product = components(f"{a}*{b}", tensor(knots[a], knots[b]))
        expected = [x + y for x, y in zip(components(a, knots[a]), components(b, knots[b]))]
        result.check(product == expected, f"f_1({a}⊗{b}) = {product} ≠ {expected}")

    for name in knots:
        for k in range(1, count + 1):
            a = Fraction(2, 2 * k + 1)
            jump = jump_delta_i(knots[name], 2, a, opts)
            result.check(jump.is_even, f"{name}: a·Δ_2 = {jump.a * jump.delta} (a={a}) 가 짝수 정수가 아님")


def run_selftest(settings: Settings, seed: Optional[int] = None) -> SelftestReport:
    """
    수용 검사 9개 절 실행

    Args:
        settings: 설정 (selftest 절의 개수들을 사용)
        seed: 난수 시드 (없으면 설정값)
    """
    config = dict(settings.selftest)
    seed = config.get('seed', 0) if seed is None else seed
    opts = SegmentOptions.from_settings(settings)
    report = SelftestReport(seed)

    sections: Sequence[tuple] = (
        ("polytope", lambda rng, r: check_polytope(rng, config, r)),
        ("delta-complex", lambda rng, r: check_delta_complex(rng, config, r)),
        ("grading-law", lambda rng, r: check_grading_law(rng, config, r)),
        ("oracle", lambda rng, r: check_oracle(rng, config, r)),
        ("knot-recovery", lambda rng, r: check_knot_recovery(opts, r)),
        ("additivity", lambda rng, r: check_additivity(rng, config, r)),
        ("gluing", lambda rng, r: check_gluing(rng, config, r)),
        ("d-invariant", lambda rng, r: check_d_invariant(r)),
        ("f_i", lambda rng, r: check_fi(config, opts, r)),
    )

    for index, (name, run) in enumerate(sections, start=1):
        section = SectionResult(name)
        rng = random.Random(seed * 100 + index)
        started = time.monotonic()
        try:
            run(rng, section)
        except UpsilonError as e:
            section.check(False, f"{e.code}: {e.message}")
        section.seconds = time.monotonic() - started
        marker = "✅" if section.passed else "❌"
        logger.info(f"{marker} [{index}/{len(sections)}] {name}: 검사 {section.checks}건, 실패 {section.failure_count}건 ({section.seconds:.1f}s)")
        report.sections.append(section)

    return report
