import math
import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Tuple, Union

from .errors import UpsilonError
from .graph_core import WeightVector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EdgeMonomial:
    """F₂[u_1,…,u_κ] 의 단항식 (변별 지수)"""
    exponents: Tuple[int, ...]

    def __post_init__(self):
        if any(isinstance(e, bool) or not isinstance(e, int) or e < 0 for e in self.exponents):
            raise UpsilonError("E_EXPONENT", f"지수는 음이 아닌 정수여야 함: {self.exponents}")

    def __add__(self, other: "EdgeMonomial") -> "EdgeMonomial":
        if len(self.exponents) != len(other.exponents):
            raise UpsilonError("E_LENGTH", "단항식 길이가 다름")
        return EdgeMonomial(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __len__(self) -> int:
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    def __getitem__(self, index):
        return self.exponents[index]


@dataclass(frozen=True)
class HahnElement:
    """
    긴 멱급수 환 R 의 유한 지지 원소

    계수는 F₂ 라서 지지 집합(지수들)만 저장한다.
    """
    support: Tuple[Fraction, ...] = ()

    def __post_init__(self):
        if any(e < 0 for e in self.support):
            raise UpsilonError("E_EXPONENT", f"음수 지수: {self.support}")
        if any(a >= b for a, b in zip(self.support, self.support[1:])):
            raise UpsilonError("E_EXPONENT", f"지수가 정렬/서로 다르지 않음: {self.support}")

    @classmethod
    def monomial(cls, exponent: Union[int, Fraction]) -> "HahnElement":
        return cls((Fraction(exponent),))

    @classmethod
    def from_exponents(cls, exponents: Iterable[Union[int, Fraction]]) -> "HahnElement":
        """중복 지수는 F₂ 에서 상쇄된다"""
        counts = Counter(Fraction(e) for e in exponents)
        return cls(tuple(sorted(e for e, c in counts.items() if c % 2)))

    def is_zero(self) -> bool:
        return not self.support

    def is_monomial(self) -> bool:
        return len(self.support) == 1

    def __bool__(self) -> bool:
        return bool(self.support)

    def __add__(self, other: "HahnElement") -> "HahnElement":
        return hahn_add(self, other)

    def __mul__(self, other: "HahnElement") -> "HahnElement":
        return hahn_mul(self, other)

    def to_text(self) -> str:
        if not self.support:
            return "0"
        return "+".join(f"u^{{{e}}}" for e in self.support)

    def __str__(self) -> str:
        return self.to_text()


ZERO = HahnElement()
ONE = HahnElement.monomial(0)


def hahn_add(a: HahnElement, b: HahnElement) -> HahnElement:
    return HahnElement(tuple(sorted(set(a.support) ^ set(b.support))))


def hahn_mul(a: HahnElement, b: HahnElement) -> HahnElement:
    return HahnElement.from_exponents(x + y for x in a.support for y in b.support)


def valuation(a: HahnElement) -> Union[Fraction, float]:
    """최소 지수, 0 이면 +∞"""
    return a.support[0] if a.support else math.inf


def divide_by_monomial(a: HahnElement, exponent: Fraction) -> HahnElement:
    """
    a / u^e

    Args:
        a: 나눌 원소
        exponent: e (e ≤ valuation(a) 여야 R 안에 머문다)
    """
    if a.support and exponent > a.support[0]:
        raise UpsilonError(
            "E_RANGE",
            f"u^{{{exponent}}} 로 나눌 수 없음 (valuation {a.support[0]})",
        )
    return HahnElement(tuple(e - exponent for e in a.support))


def specialize(m: EdgeMonomial, t: WeightVector) -> HahnElement:
    """c_t 치환: u_i ↦ u^{t_i}"""
    if len(m) != len(t):
        raise UpsilonError("E_LENGTH", f"단항식 길이 {len(m)} ≠ 가중치 길이 {len(t)}")
    return HahnElement.monomial(sum((ti * ai for ti, ai in zip(t, m)), Fraction(0)))
