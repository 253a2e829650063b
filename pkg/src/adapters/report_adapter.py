from pathlib import Path
from typing import Type

from pydantic import BaseModel, ValidationError

from src.core.errors import ConfigError
from src.core.models import M, IReportStore


class JSONReportStore(IReportStore):
    """JSON 문서 저장소 어댑터 - IReportStore 구현."""

    def __init__(self, indent: int = 2):
        self.indent = indent

    def save(self, document: BaseModel, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(document.model_dump_json(indent=self.indent) + "\n", encoding="utf-8")
        return path

    def load(self, path: Path, model: Type[M]) -> M:
        try:
            return model.model_validate_json(path.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"{path}: file not found") from exc
        except ValidationError as exc:
            raise ConfigError(f"{path}: {exc.errors()[0]['msg']}") from exc
