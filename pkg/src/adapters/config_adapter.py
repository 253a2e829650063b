import os
from pathlib import Path
from typing import Optional, Type

from pydantic import BaseModel, ValidationError

from src.core.errors import ConfigError
from src.core.models import IConfigSource, M, RunConfig, SweepConfig


def _json_path(loc: tuple) -> str:
    path = "$"
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else f".{part}"
    return path


def describe_validation_error(source: Path, exc: ValidationError) -> str:
    """'<file>: <json path>: <message> (field '<name>')' 형태의 메시지."""
    first = exc.errors()[0]
    loc = tuple(first.get("loc", ()))
    if first.get("type") == "json_invalid":
        return f"{source}: malformed JSON: {first['msg']}"
    field = next((str(p) for p in reversed(loc) if isinstance(p, str)), "<root>")
    return f"{source}: {_json_path(loc)}: {first['msg']} (field '{field}')"


class JSONConfigSource(IConfigSource):
    """JSON 설정 파일 + 환경 변수 어댑터 - IConfigSource 구현."""

    def __init__(self, out_env: str = "NEVDYN_OUT", jobs_env: str = "NEVDYN_JOBS"):
        self.out_env = out_env
        self.jobs_env = jobs_env

    def _load(self, path: Path, model: Type[M]) -> M:
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError as exc:
            raise ConfigError(f"{path}: file not found") from exc
        except UnicodeDecodeError as exc:
            raise ConfigError(f"{path}: not UTF-8 text") from exc
        try:
            return model.model_validate_json(text)
        except ValidationError as exc:
            raise ConfigError(describe_validation_error(path, exc)) from exc

    def load_run_config(self, path: Path) -> RunConfig:
        return self._load(path, RunConfig)

    def load_sweep_config(self, path: Path) -> SweepConfig:
        return self._load(path, SweepConfig)

    def output_dir_override(self) -> Optional[str]:
        return os.getenv(self.out_env) or None

    def default_jobs(self) -> Optional[int]:
        raw = os.getenv(self.jobs_env)
        if not raw:
            return None
        try:
            jobs = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{self.jobs_env}={raw!r} is not an integer") from exc
        if jobs < 1:
            raise ConfigError(f"{self.jobs_env} must be >= 1, got {jobs}")
        return jobs

    @staticmethod
    def dump(config: BaseModel) -> str:
        """설정을 다시 읽을 수 있는 JSON으로 직렬화."""
        return config.model_dump_json(indent=2, exclude_none=True)
