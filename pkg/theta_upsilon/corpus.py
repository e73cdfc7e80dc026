"""
회귀 검증용 복합체 모음

매듭 복합체는 CFK 에서 가져오고, 나머지는 직접 만든다.
"""
import logging
from fractions import Fraction
from typing import Dict, List, Tuple

from .graph_core import link_graph, theta_graph
from .tangle_complex import (
    Arrow,
    CFKArrow,
    CFKGenerator,
    Generator,
    KnotCFKData,
    TangleComplex,
    dual,
    ensure_valid,
    from_knot_cfk,
    staircase_cfk,
    tensor,
)
from .weight_ring import EdgeMonomial

logger = logging.getLogger(__name__)


def _one_generator(n: int, grading: Fraction, name: str) -> TangleComplex:
    graph = theta_graph(n)
    gradings = {str(i): Fraction(grading) for i in range(1, n + 1)}
    return ensure_valid(TangleComplex(graph, (Generator("x", gradings),), (), name))


def unknot() -> TangleComplex:
    return _one_generator(2, Fraction(0), "unknot")


def trefoil_cfk() -> KnotCFKData:
    """오른손 트레포일: a(0,1), b(-1,0), c(-2,-1), ∂b = w·a + z·c"""
    return KnotCFKData(
        generators=(
            CFKGenerator("a", Fraction(0), Fraction(1)),
            CFKGenerator("b", Fraction(-1), Fraction(0)),
            CFKGenerator("c", Fraction(-2), Fraction(-1)),
        ),
        arrows=(
            CFKArrow("b", "a", 0, 1),
            CFKArrow("b", "c", 1, 0),
        ),
        name="trefoil",
    )


def trefoil() -> TangleComplex:
    return from_knot_cfk(trefoil_cfk())


def mirror_trefoil() -> TangleComplex:
    return dual(trefoil())


def figure_eight_cfk() -> KnotCFKData:
    """8자 매듭: 네모 a→b,c→d 와 홀로 남는 e"""
    return KnotCFKData(
        generators=(
            CFKGenerator("a", Fraction(0), Fraction(0)),
            CFKGenerator("b", Fraction(1), Fraction(1)),
            CFKGenerator("c", Fraction(-1), Fraction(-1)),
            CFKGenerator("d", Fraction(0), Fraction(0)),
            CFKGenerator("e", Fraction(0), Fraction(0)),
        ),
        arrows=(
            CFKArrow("a", "b", 0, 1),
            CFKArrow("a", "c", 1, 0),
            CFKArrow("b", "d", 1, 0),
            CFKArrow("c", "d", 0, 1),
        ),
        name="figure-eight",
    )


def figure_eight() -> TangleComplex:
    return from_knot_cfk(figure_eight_cfk())


def torus_knot_3_4() -> TangleComplex:
    """T(3,4) 계단 [1,2,2,1]: 매듭 변수 2/3 에서 기울기가 바뀐다"""
    return from_knot_cfk(staircase_cfk([1, 2, 2, 1], name="T(3,4)"))


def theta3_trivial() -> TangleComplex:
    return _one_generator(3, Fraction(0), "theta3-trivial")


def s3() -> TangleComplex:
    """Θ₁ 위의 S³ (d = 0)"""
    return _one_generator(1, Fraction(0), "S3")


def lens_like() -> TangleComplex:
    """d = 1/2 인 Θ₁ 복합체"""
    return _one_generator(1, Fraction(1, 2), "lens-like")


def theta1_with_pair() -> TangleComplex:
    """자유 생성원 g (gr -2) 와 u 로 상쇄되는 x→y"""
    graph = theta_graph(1)
    generators = (
        Generator("g", {"1": Fraction(-2)}),
        Generator("x", {"1": Fraction(0)}),
        Generator("y", {"1": Fraction(1)}),
    )
    arrows = (Arrow("x", "y", EdgeMonomial((1,))),)
    return ensure_valid(TangleComplex(graph, generators, arrows, "theta1-pair"))


def unlink2() -> TangleComplex:
    """두 성분 링크 그래프 위의 복합체 (Υ = [-1/2, 1/2])"""
    graph = link_graph(2)
    keys = ("1-2", "1-4", "2-3", "3-4")
    generators = (
        Generator("a", {k: Fraction(-1, 2) for k in keys}),
        Generator("b", {k: Fraction(1, 2) for k in keys}),
    )
    arrows = (
        Arrow("a", "b", EdgeMonomial((1, 0, 1, 0))),
        Arrow("a", "b", EdgeMonomial((0, 1, 0, 1))),
    )
    return ensure_valid(TangleComplex(graph, generators, arrows, "unlink2"))


def knot_complexes() -> Dict[str, TangleComplex]:
    """Θ₂ 위의 매듭 복합체 (랭크 1)"""
    return {
        "unknot": unknot(),
        "trefoil": trefoil(),
        "mirror-trefoil": mirror_trefoil(),
        "figure-eight": figure_eight(),
        "T(3,4)": torus_knot_3_4(),
    }


def corpus() -> Dict[str, TangleComplex]:
    """전체 회귀 모음 (이름 순서 고정)"""
    knots = knot_complexes()
    items = dict(knots)
    items["trefoil*trefoil"] = tensor(knots["trefoil"], knots["trefoil"])
    items["trefoil*figure-eight"] = tensor(knots["trefoil"], knots["figure-eight"])
    items["trefoil*mirror"] = tensor(knots["trefoil"], knots["mirror-trefoil"])
    items["theta3-trivial"] = theta3_trivial()
    items["S3"] = s3()
    items["lens-like"] = lens_like()
    items["theta1-pair"] = theta1_with_pair()
    items["unlink2"] = unlink2()
    logger.debug(f"corpus: {len(items)}개 복합체")
    return items


def corpus_pairs() -> List[Tuple[str, str]]:
    """더하기 검사용 Θ₂ 매듭 쌍"""
    names = list(knot_complexes())
    pairs = [(a, b) for k, a in enumerate(names) for b in names[k:]]
    return pairs[:10]
