import os
import sys
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional

from dotenv import load_dotenv

from .errors import UpsilonError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(__file__), "config.json")

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


@dataclass(frozen=True)
class Settings:
    """실행 설정 (config.json + 환경 변수)"""
    threads: int = 1
    max_depth: int = 20
    jump_bracket: Fraction = Fraction(1, 64)
    tau_epsilon: Fraction = Fraction(2)
    max_retries: int = 6
    log_level: str = "INFO"
    log_file: Optional[str] = None
    selftest: Dict = field(default_factory=dict)


def load_config(config_path: str = DEFAULT_CONFIG_PATH) -> dict:
    """설정 파일 로드"""
    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            config = json.load(f)
        logger.debug(f"설정 파일 로드 완료: {config_path}")
        return config
    except Exception as e:
        logger.error(f"설정 파일 로드 실패: {e}")
        raise


def _threads_from_env() -> int:
    raw = os.environ.get("THETA_UPSILON_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        threads = int(raw)
    except ValueError:
        raise UpsilonError("E_USAGE", f"THETA_UPSILON_THREADS 값이 정수가 아님: {raw!r}")
    if threads <= 0:
        raise UpsilonError("E_USAGE", f"THETA_UPSILON_THREADS 는 양의 정수여야 함: {threads}")
    return threads


def load_settings(config_path: str = DEFAULT_CONFIG_PATH) -> Settings:
    """
    설정 파일과 .env / 환경 변수를 합쳐 Settings 생성

    Args:
        config_path: 설정 파일 경로

    Returns:
        Settings
    """
    load_dotenv()
    config = load_config(config_path)

    system = config.get('system', {})
    upsilon = config.get('upsilon', {})
    paths = config.get('paths', {})

    log_level = os.environ.get("THETA_UPSILON_LOG_LEVEL") or system.get('log_level', "INFO")

    return Settings(
        threads=_threads_from_env(),
        max_depth=int(upsilon.get('max_depth', 20)),
        jump_bracket=Fraction(upsilon.get('jump_bracket', "1/64")),
        tau_epsilon=Fraction(upsilon.get('tau_epsilon', "2")),
        max_retries=int(system.get('max_retries', 6)),
        log_level=str(log_level).upper(),
        log_file=paths.get('log_file'),
        selftest=dict(config.get('selftest', {})),
    )


def setup_logging(level: str = "INFO", log_file: Optional[str] = None):
    """로깅 설정 (stdout 은 결과 출력 전용이라 stderr 로 보냄)"""
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))

    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
