import csv
from pathlib import Path
from typing import Dict, List

import numpy as np

from src.core.errors import ConfigError
from src.core.models import (
    TRAJECTORY_COLUMNS,
    IRegimeMapWriter,
    ITrajectoryWriter,
    Regime,
    SweepResult,
    Trajectory,
)
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

REGIME_MAP_TAIL = (
    "regime",
    "terminal_x",
    "terminal_pi_F",
    "terminal_pi_E",
    "terminal_N",
    "peak_Pi",
    "error",
)


def format_number(value: float) -> str:
    """최단 왕복 십진 표현."""
    return repr(float(value))


class TrajectoryCSVWriter(ITrajectoryWriter):
    """궤적 CSV 어댑터 - ITrajectoryWriter 구현 (UTF-8, LF)."""

    def write(self, trajectory: Trajectory, path: Path, stride: int = 1) -> Path:
        if stride < 1:
            raise ConfigError(f"stride must be >= 1, got {stride}")

        columns = [trajectory.column(name) for name in TRAJECTORY_COLUMNS[:-1]]
        flags = trajectory.negative_pi_E

        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(TRAJECTORY_COLUMNS)
            for i in range(0, len(trajectory), stride):
                row = [format_number(column[i]) for column in columns]
                row.append("1" if flags[i] else "0")
                writer.writerow(row)

        logger.debug(f"📝 CSV {path}: {(len(trajectory) + stride - 1) // stride}개 행")
        return path


def read_trajectory_csv(path: Path) -> Dict[str, np.ndarray]:
    """TrajectoryCSV를 열 이름 -> 배열로 읽는다."""
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if tuple(header) != TRAJECTORY_COLUMNS:
            raise ConfigError(f"{path}: unexpected header {header}")
        rows: List[List[str]] = list(reader)

    table: Dict[str, np.ndarray] = {}
    for j, name in enumerate(TRAJECTORY_COLUMNS):
        if name == "neg_pi_E_flag":
            table[name] = np.array([row[j] == "1" for row in rows], dtype=bool)
        else:
            table[name] = np.array([float(row[j]) for row in rows], dtype=float)
    return table


class RegimeMapCSVWriter(IRegimeMapWriter):
    """스윕 레짐 맵 CSV 어댑터 - IRegimeMapWriter 구현."""

    def write(self, result: SweepResult, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["cell", *result.axes, *REGIME_MAP_TAIL])
            for cell in result.cells:
                row = [str(cell.index)]
                row.extend(format_number(cell.coordinates[axis]) for axis in result.axes)
                d = cell.diagnostics
                if d is None:
                    row.extend([Regime.UNCLASSIFIED.value, "", "", "", "", ""])
                else:
                    row.append(d.regime.value)
                    row.extend(
                        format_number(value)
                        for value in (
                            d.terminal_x,
                            d.terminal_pi_F,
                            d.terminal_pi_E,
                            d.terminal_N,
                            d.peak_Pi,
                        )
                    )
                row.append(cell.error or "")
                writer.writerow(row)

        logger.info(f"🗺️ 레짐 맵 {len(result.cells)}개 셀 기록: {path}")
        return path
