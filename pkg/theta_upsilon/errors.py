from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple


class UpsilonError(ValueError):
    """도메인 오류 (E_* 코드)"""

    def __init__(self, code: str, message: str, details: Optional[Dict] = None):
        """
        Args:
            code: 오류 코드 (예: "E_NOT_IN_POLYTOPE")
            message: 사람이 읽는 설명
            details: JSON 직렬화 가능한 부가 정보
        """
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict:
        return {
            'error': self.code,
            'message': self.message,
            'details': self.details,
        }


@dataclass(frozen=True)
class Violation:
    """검증 위반 한 건"""
    code: str
    message: str
    where: Tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> Dict:
        return {'code': self.code, 'message': self.message, 'where': list(self.where)}


class ComplexValidationError(UpsilonError):
    """validate_complex 보고서가 비어 있지 않을 때"""

    def __init__(self, report: List[Violation]):
        self.report = list(report)
        first = self.report[0]
        super().__init__(
            first.code,
            f"복합체 검증 실패 ({len(self.report)}건): {first.message}",
            {'violations': [v.to_dict() for v in self.report]},
        )
