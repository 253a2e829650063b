"""로깅 설정 모듈"""

import logging
import os
import sys
from typing import Optional

_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logger(name: str, level: Optional[str] = None) -> logging.Logger:
    """모듈별 로거 설정 (stdout은 JSON 출력용이므로 stderr로 기록)"""
    logger = logging.getLogger(name)

    # 이미 핸들러가 설정되어 있으면 중복 설정 방지
    if logger.handlers:
        return logger

    # 로그 레벨 설정 (인자 > 환경변수 > INFO)
    log_level = (level or os.getenv("LOG_LEVEL") or "INFO").upper()
    numeric_level = getattr(logging, log_level, logging.INFO)
    logger.setLevel(numeric_level)

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(numeric_level)
    handler.setFormatter(logging.Formatter(_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))

    logger.addHandler(handler)
    logger.propagate = False  # 상위 로거로의 전파 방지

    return logger


def set_global_log_level(level: Optional[str] = None) -> str:
    """전체 로그 레벨 설정 (nevdyn 로거 포함). 적용된 레벨 이름을 반환."""
    log_level = (level or os.getenv("LOG_LEVEL") or "INFO").upper()
    numeric_level = getattr(logging, log_level, logging.INFO)

    logging.getLogger().setLevel(numeric_level)
    for handler in logging.getLogger().handlers:
        handler.setLevel(numeric_level)

    # setup_logger로 만든 모듈 로거들도 갱신
    for name, candidate in logging.root.manager.loggerDict.items():
        if not name.startswith("src") or not isinstance(candidate, logging.Logger):
            continue
        candidate.setLevel(numeric_level)
        for handler in candidate.handlers:
            handler.setLevel(numeric_level)

    return logging.getLevelName(numeric_level)
