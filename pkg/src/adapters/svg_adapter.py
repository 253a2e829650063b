import io
import threading
from typing import Dict, Sequence

import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from src.core.errors import ConfigError, EmptyTrajectory
from src.core.models import CHART_CHANNELS, IChartRenderer, Trajectory

# matplotlib 전역 rcParams는 스레드 안전하지 않음
_RENDER_LOCK = threading.Lock()

_LABELS: Dict[str, str] = {
    "x": "x",
    "pi_F": "π_F",
    "pi_E": "π_E",
    "N": "N",
    "Pi": "Π",
}


class MatplotlibSVGRenderer(IChartRenderer):
    """matplotlib SVG 백엔드 차트 어댑터 - IChartRenderer 구현.

    채널마다 패널 하나를 세로로 쌓는다. 해시 솔트를 고정하고 날짜 메타데이터를
    빼서 같은 입력이면 같은 바이트를 만든다.
    """

    def __init__(self, panel_height: float = 1.8, width: float = 7.0, hashsalt: str = "nevdyn"):
        self.panel_height = panel_height
        self.width = width
        self.hashsalt = hashsalt

    def render(self, trajectory: Trajectory, channels: Sequence[str]) -> str:
        if len(trajectory) == 0:
            raise EmptyTrajectory("cannot chart a trajectory without records")
        unknown = [c for c in channels if c not in CHART_CHANNELS]
        if unknown or not channels:
            raise ConfigError(
                f"channels must be a non-empty subset of {list(CHART_CHANNELS)}, got {list(channels)}"
            )

        single = len(trajectory) == 1
        with _RENDER_LOCK, matplotlib.rc_context(
            {"svg.hashsalt": self.hashsalt, "svg.fonttype": "path"}
        ):
            figure = Figure(figsize=(self.width, self.panel_height * len(channels)))
            FigureCanvasSVG(figure)
            axes = figure.subplots(len(channels), 1, sharex=True, squeeze=False)[:, 0]

            for ax, channel in zip(axes, channels):
                series = trajectory.column(channel)
                ax.plot(
                    trajectory.times,
                    series,
                    color="tab:blue",
                    linewidth=1.2,
                    marker="o" if single else None,
                )
                ax.set_ylabel(_LABELS[channel])
                ax.set_xscale("linear")
                ax.set_yscale("linear")
                ax.grid(True, linewidth=0.3)
                ax.set_gid(f"panel-{channel}")
            axes[-1].set_xlabel("t")
            figure.tight_layout()

            buffer = io.BytesIO()
            figure.savefig(buffer, format="svg", metadata={"Date": None})
        return buffer.getvalue().decode("utf-8")
