"""Θ-그래프 사슬 복합체의 Upsilon 불변량 (정확한 유리수 계산)"""
from .errors import ComplexValidationError, UpsilonError

__all__ = ["UpsilonError", "ComplexValidationError"]
