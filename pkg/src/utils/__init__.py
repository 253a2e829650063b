"""로깅 유틸리티 (stderr 출력)"""

from .logger import setup_logger, set_global_log_level

__all__ = ["setup_logger", "set_global_log_level"]
