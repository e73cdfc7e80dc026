import bisect
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import UpsilonError
from .graph_core import WeightVector, enumerate_matchings, matching_weight
from .matching_polytope import (
    _check_length,
    contains,
    delta_complex_for,
    segment_point,
    vertex_weights,
)
from .tangle_complex import TangleComplex, _require_theta
from .t_homology import check_rank, reduce, t_modify, upsilon_at

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SegmentOptions:
    """구간 재구성 옵션"""
    max_depth: int = 20
    threads: int = 1
    jump_bracket: Fraction = Fraction(1, 64)
    tau_epsilon: Fraction = Fraction(2)
    max_retries: int = 6

    @classmethod
    def from_settings(cls, settings) -> "SegmentOptions":
        return cls(
            max_depth=settings.max_depth,
            threads=settings.threads,
            jump_bracket=settings.jump_bracket,
            tau_epsilon=settings.tau_epsilon,
            max_retries=settings.max_retries,
        )


@dataclass(frozen=True)
class PLFunction:
    """
    구간 t(s) = t0 + s(t1 - t0), s ∈ [0,1] 위의 조각별 선형 함수

    breakpoints 는 0 과 1 을 포함한다. uncertified 는 인증되지 않은
    조각 번호 (breakpoints[k]..breakpoints[k+1]) 목록이다.
    """
    segment: Tuple[WeightVector, WeightVector]
    breakpoints: Tuple[Fraction, ...]
    values: Tuple[Fraction, ...]
    uncertified: Tuple[int, ...] = ()

    @property
    def certified(self) -> bool:
        return not self.uncertified

    def piece_certified(self, k: int) -> bool:
        return k not in self.uncertified

    def slopes(self) -> List[Fraction]:
        return [
            (v1 - v0) / (s1 - s0)
            for s0, s1, v0, v1 in zip(self.breakpoints, self.breakpoints[1:], self.values, self.values[1:])
        ]

    def interior_breakpoints(self) -> List[Fraction]:
        return list(self.breakpoints[1:-1])

    def _piece(self, s: Fraction) -> int:
        if not 0 <= s <= 1:
            raise UpsilonError("E_RANGE", f"s 는 [0, 1] 안이어야 함: {s}")
        return min(max(bisect.bisect_right(self.breakpoints, s) - 1, 0), len(self.breakpoints) - 2)

    def value_at(self, s) -> Fraction:
        s = Fraction(s)
        k = self._piece(s)
        s0, s1 = self.breakpoints[k], self.breakpoints[k + 1]
        v0, v1 = self.values[k], self.values[k + 1]
        return v0 + (v1 - v0) * (s - s0) / (s1 - s0)

    def right_slope(self, s) -> Fraction:
        s = Fraction(s)
        if not 0 <= s < 1:
            raise UpsilonError("E_RANGE", f"오른쪽 기울기는 s ∈ [0, 1) 에서만: {s}")
        return self.slopes()[bisect.bisect_right(self.breakpoints, s) - 1]

    def left_slope(self, s) -> Fraction:
        s = Fraction(s)
        if not 0 < s <= 1:
            raise UpsilonError("E_RANGE", f"왼쪽 기울기는 s ∈ (0, 1] 에서만: {s}")
        return self.slopes()[bisect.bisect_left(self.breakpoints, s) - 1]

    def to_dict(self) -> Dict:
        return {
            'breakpoints': [str(s) for s in self.breakpoints],
            'values': [str(v) for v in self.values],
            'slopes': [str(m) for m in self.slopes()],
            'certified': self.certified,
            'uncertified_pieces': list(self.uncertified),
        }


@dataclass(frozen=True)
class JumpValue:
    """t^i_a 에서의 Δ_iΥ = D⁺ - D⁻"""
    i: int
    a: Fraction
    delta: Fraction
    left: Fraction
    right: Fraction

    @property
    def is_even(self) -> bool:
        product = self.a * self.delta
        return product.denominator == 1 and product.numerator % 2 == 0

    def to_dict(self) -> Dict:
        return {
            'i': self.i,
            'a': str(self.a),
            'left_slope': str(self.left),
            'right_slope': str(self.right),
            'delta': str(self.delta),
            'a_delta': str(self.a * self.delta),
            'even': self.is_even,
        }


class _Sampler:
    """구간 위 점들의 Υ 값과 생성원 gr_t 를 캐시"""

    def __init__(self, c: TangleComplex, t0: WeightVector, t1: WeightVector, threads: int):
        self.c = c
        self.t0, self.t1 = t0, t1
        self.dc = delta_complex_for(c.graph)
        self.threads = threads
        self.values: Dict[Fraction, Tuple[Fraction, ...]] = {}
        self.gradings: Dict[Fraction, Dict[str, Fraction]] = {}

    def _evaluate(self, s: Fraction):
        t = segment_point(self.t0, self.t1, s)
        tc = t_modify(self.c, t, self.dc)
        structure = check_rank(self.c, reduce(tc), t)
        return s, structure.free_part, tc.gradings

    def ensure(self, points: Iterable[Fraction], executor: Optional[ThreadPoolExecutor]):
        missing = sorted(set(points) - self.values.keys())
        if not missing:
            return
        results = executor.map(self._evaluate, missing) if executor else map(self._evaluate, missing)
        for s, values, gradings in results:
            self.values[s] = values
            self.gradings[s] = gradings


def _certified(sampler: _Sampler, a: Fraction, b: Fraction) -> bool:
    m = (a + b) / 2
    G, V = sampler.gradings, sampler.values
    for k in range(len(V[a])):
        va, vm, vb = V[a][k], V[m][k], V[b][k]
        if vm - va != vb - vm:
            return False
        slope = (vm - va) / (m - a)
        for lo, hi in ((a, m), (m, b)):
            if slope not in {(G[hi][x] - G[lo][x]) / (hi - lo) for x in G[lo]}:
                return False
        if not any(G[a][x] == va and G[m][x] == vm and G[b][x] == vb for x in G[a]):
            return False
    return True


def _kinks(sampler: _Sampler, a: Fraction, b: Fraction) -> List[Fraction]:
    """양 끝에서 Υ 와 같은 값을 갖는 생성원 직선들의 교점"""
    G, V = sampler.gradings, sampler.values
    points = set()
    for k in range(len(V[a])):
        va, vb = V[a][k], V[b][k]
        left = {(G[b][x] - G[a][x]) / (b - a) for x in G[a] if G[a][x] == va}
        right = {(G[b][x] - G[a][x]) / (b - a) for x in G[b] if G[b][x] == vb}
        for sl in left:
            for sr in right:
                if sl == sr:
                    continue
                s = (vb - va + sl * a - sr * b) / (sl - sr)
                if a < s < b:
                    points.add(s)
    return sorted(points)


def _assemble(
    sampler: _Sampler,
    pieces: List[Tuple[Fraction, Fraction, bool]],
    index: int,
) -> PLFunction:
    pieces = sorted(pieces)
    breakpoints = [pieces[0][0]] + [b for _, b, _ in pieces]
    flags = [ok for _, _, ok in pieces]
    values = [sampler.values[s][index] for s in breakpoints]

    # 기울기가 같은 이웃 조각 병합
    k = 1
    while k < len(breakpoints) - 1:
        left = (values[k] - values[k - 1]) / (breakpoints[k] - breakpoints[k - 1])
        right = (values[k + 1] - values[k]) / (breakpoints[k + 1] - breakpoints[k])
        if left == right and flags[k - 1] == flags[k]:
            del breakpoints[k], values[k], flags[k]
        else:
            k += 1

    return PLFunction(
        segment=(sampler.t0, sampler.t1),
        breakpoints=tuple(breakpoints),
        values=tuple(values),
        uncertified=tuple(k for k, ok in enumerate(flags) if not ok),
    )


def reconstruct_segment(
    c: TangleComplex,
    t0: WeightVector,
    t1: WeightVector,
    opts: Optional[SegmentOptions] = None,
) -> List[PLFunction]:
    """
    구간 위 Υ 를 조각별 선형 함수로 재구성

    중점이 현 위에 있고 두 반구간 기울기가 생성원 gr_t 기울기 후보에
    속하면 구간을 인정한다. 아니면 중점과 후보 꺾임점에서 나눈다.

    Raises:
        UpsilonError: E_NOT_IN_POLYTOPE
    """
    opts = opts or SegmentOptions()
    for t in (t0, t1):
        _check_length(c.graph, t)
        if not contains(c.graph, t):
            raise UpsilonError("E_NOT_IN_POLYTOPE", f"L_G 에 속하지 않는 점: {t}", {'t': t.to_strings()})

    sampler = _Sampler(c, t0, t1, opts.threads)
    zero, one = Fraction(0), Fraction(1)
    accepted: List[Tuple[Fraction, Fraction, bool]] = []
    pending = [(zero, one, 0)]

    executor = ThreadPoolExecutor(max_workers=opts.threads) if opts.threads > 1 else None
    try:
        while pending:
            sampler.ensure(
                (p for a, b, _ in pending for p in (a, (a + b) / 2, b)),
                executor,
            )
            following = []
            for a, b, depth in pending:
                if _certified(sampler, a, b):
                    accepted.append((a, b, True))
                elif depth >= opts.max_depth:
                    logger.warning(f"구간 [{a}, {b}] 인증 실패 (깊이 {depth})")
                    accepted.append((a, b, False))
                else:
                    cuts = sorted({(a + b) / 2, *_kinks(sampler, a, b)})
                    points = [a] + cuts + [b]
                    following.extend((p, q, depth + 1) for p, q in zip(points, points[1:]))
            pending = following
    finally:
        if executor:
            executor.shutdown()

    rank = len(sampler.values[zero])
    functions = [_assemble(sampler, accepted, k) for k in range(rank)]
    logger.info(
        f"구간 재구성 완료: 평가 {len(sampler.values)}회, "
        f"꺾임점 {[len(f.interior_breakpoints()) for f in functions]}, "
        f"{'✅ 인증' if all(f.certified for f in functions) else '⚠️ 미인증 조각 있음'}"
    )
    return functions


def theta_size(c: TangleComplex) -> int:
    _require_theta(c)
    n = c.graph.kappa
    if n < 2:
        raise UpsilonError("E_SHAPE_MISMATCH", f"Θ_n 의 n 은 2 이상이어야 함: {n}")
    return n


def jump_delta_i(
    c: TangleComplex,
    i: int,
    a,
    opts: Optional[SegmentOptions] = None,
) -> JumpValue:
    """
    직선 l_i 위의 점 t^i_a 에서 V^i 방향 단측 도함수의 차이

    Raises:
        UpsilonError: E_BOUNDARY, E_UNCERTIFIED
    """
    opts = opts or SegmentOptions()
    n = theta_size(c)
    if not 1 <= i <= n:
        raise UpsilonError("E_INDEX", f"변 번호 {i} 가 1..{n} 범위 밖")
    a = Fraction(a)
    length = Fraction(2, n - 1)
    if not 0 < a < length:
        raise UpsilonError("E_BOUNDARY", f"t^{i}_{a} 가 l_{i} 의 내부가 아님 (0 < a < {length})")

    h = length * opts.jump_bracket
    for attempt in range(opts.max_retries):
        while not (0 < a - h and a + h < length):
            h /= 2
        left = reconstruct_segment(c, vertex_weights(n, i, a - h), vertex_weights(n, i, a), opts)[0]
        right = reconstruct_segment(c, vertex_weights(n, i, a), vertex_weights(n, i, a + h), opts)[0]
        if left.piece_certified(len(left.breakpoints) - 2) and right.piece_certified(0):
            d_minus = left.slopes()[-1] / h
            d_plus = right.slopes()[0] / h
            return JumpValue(i, a, d_plus - d_minus, d_minus, d_plus)
        logger.warning(f"Δ_{i} 괄호 인증 실패 [{attempt + 1}/{opts.max_retries}], 폭 {h} 를 절반으로")
        h /= 2

    raise UpsilonError("E_UNCERTIFIED", f"Δ_{i}Υ(t^{i}_{a}) 를 인증하지 못함", {'i': i, 'a': str(a)})


def tau_matrix(c: TangleComplex, opts: Optional[SegmentOptions] = None) -> List[List[Optional[Fraction]]]:
    """
    (i, j) 성분 = 꼭짓점 t^i 에서 V^i_j 방향 단측 기울기 (= -τ(K_ij))

    Raises:
        UpsilonError: E_UNCERTIFIED
    """
    opts = opts or SegmentOptions()
    n = theta_size(c)
    matrix: List[List[Optional[Fraction]]] = [[None] * n for _ in range(n)]
    for i in range(1, n + 1):
        start = WeightVector(tuple(Fraction(2 if k == i else 0) for k in range(1, n + 1)))
        for j in range(1, n + 1):
            if j == i:
                continue
            eps = opts.tau_epsilon
            for attempt in range(opts.max_retries):
                end = WeightVector(tuple(
                    start[k - 1] + (-eps if k == i else eps if k == j else 0) for k in range(1, n + 1)
                ))
                f = reconstruct_segment(c, start, end, opts)[0]
                if f.piece_certified(0):
                    matrix[i - 1][j - 1] = f.slopes()[0] / eps
                    break
                logger.warning(f"D_V({i},{j}) 인증 실패 [{attempt + 1}/{opts.max_retries}], ε={eps} 를 절반으로")
                eps /= 2
            else:
                raise UpsilonError("E_UNCERTIFIED", f"t^{i} 에서 V^{i}_{j} 방향 기울기를 인증하지 못함", {'i': i, 'j': j})
    return matrix


def f_i_components(c: TangleComplex, i: int, count: int, opts: Optional[SegmentOptions] = None) -> List[Fraction]:
    """
    f_i 의 처음 count 개 성분: Δ_iΥ(t^i_{2/((2k+1)(n-1))}) / ((2k+1)(n-1))

    정수가 아닌 성분은 경고로 보고한다.
    """
    n = theta_size(c)
    if isinstance(count, bool) or not isinstance(count, int) or count < 1:
        raise UpsilonError("E_RANGE", f"K 는 양의 정수여야 함: {count}")
    components = []
    for k in range(1, count + 1):
        scale = (2 * k + 1) * (n - 1)
        jump = jump_delta_i(c, i, Fraction(2, scale), opts)
        value = jump.delta / scale
        if value.denominator != 1:
            logger.warning(f"❌ f_{i} 성분 {k} 가 정수가 아님: {value}")
        components.append(value)
    return components


def upsilon_vertex_values(c: TangleComplex) -> Dict[str, List[Fraction]]:
    """모든 매칭 꼭짓점에서의 Υ"""
    return {
        m.canonical_id: upsilon_at(c, matching_weight(c.graph, m))
        for m in enumerate_matchings(c.graph)
    }


def sample_rows(functions: Sequence[PLFunction], samples: int = 0) -> List[Tuple[Fraction, List[Fraction]]]:
    """꺾임점 합집합 (와 균등 표본점) 에서의 (s, Υ₁(s), …) 행"""
    points = {s for f in functions for s in f.breakpoints}
    if samples > 0:
        points |= {Fraction(k, samples) for k in range(samples + 1)}
    return [(s, [f.value_at(s) for f in functions]) for s in sorted(points)]
