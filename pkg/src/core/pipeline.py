import asyncio
from pathlib import Path
from typing import Dict, List, Optional, Sequence, TypedDict

from langgraph.graph import END, StateGraph

from .models import (
    CHART_CHANNELS,
    EmitFlags,
    IChartRenderer,
    IReportStore,
    ITrajectoryWriter,
    RegimeDiagnostics,
    RegimeThresholds,
    RunOutcome,
    RunSummary,
    ScenarioSpec,
    Trajectory,
)
from .scenarios import diagnose as diagnose_trajectory
from .errors import RegimeMismatch
from .integrator import integrate as integrate_trajectory
from ..utils.logger import setup_logger

logger = setup_logger(__name__)


class PipelineState(TypedDict, total=False):
    """파이프라인 상태 정의."""

    spec: ScenarioSpec
    output_dir: Optional[Path]
    stride: int
    emit: EmitFlags
    channels: List[str]
    thresholds: RegimeThresholds
    check_expected: bool
    trajectory: Trajectory
    diagnostics: RegimeDiagnostics
    artifacts: Dict[str, str]


class SimulationPipeline:
    """integrate -> diagnose -> emit_artifacts. 포트 인터페이스에만 의존."""

    def __init__(
        self,
        trajectory_writer: ITrajectoryWriter,
        chart_renderer: IChartRenderer,
        report_store: IReportStore,
    ):
        """모든 의존성은 인터페이스로 주입받음."""
        self.trajectory_writer = trajectory_writer
        self.chart_renderer = chart_renderer
        self.report_store = report_store
        self.graph = self._build_graph()

    def _build_graph(self):
        """LangGraph 워크플로우 구성."""
        workflow = StateGraph(PipelineState)

        workflow.add_node("integrate", self.integrate)
        workflow.add_node("diagnose", self.diagnose)
        workflow.add_node("emit_artifacts", self.emit_artifacts)

        workflow.set_entry_point("integrate")
        workflow.add_edge("integrate", "diagnose")
        workflow.add_edge("diagnose", "emit_artifacts")
        workflow.add_edge("emit_artifacts", END)

        return workflow.compile()

    async def integrate(self, state: PipelineState) -> PipelineState:
        """적분 (CPU 작업은 워커 스레드에서)."""
        spec = state["spec"]
        logger.info(f"🚗 시나리오 실행: {spec.name}")
        state["trajectory"] = await asyncio.to_thread(
            integrate_trajectory, spec.params, spec.initial, spec.integration
        )
        return state

    async def diagnose(self, state: PipelineState) -> PipelineState:
        """종단 레짐 진단 및 (회귀 모드) 기대 레짐 비교."""
        spec = state["spec"]
        diagnostics = diagnose_trajectory(state["trajectory"], state.get("thresholds"))
        state["diagnostics"] = diagnostics

        negatives = int(state["trajectory"].negative_pi_E.sum())
        if negatives:
            logger.warning(f"⚠️ pi_E < 0 레코드 {negatives}개 (플래그 기록)")

        if state.get("check_expected") and spec.expected_regime is not None:
            if diagnostics.regime is not spec.expected_regime:
                raise RegimeMismatch(
                    f"{spec.name}: expected {spec.expected_regime.value}, got {diagnostics.regime.value}"
                )
        logger.info(f"📊 {spec.name}: regime={diagnostics.regime.value}, x(T)={diagnostics.terminal_x:.6g}")
        return state

    async def emit_artifacts(self, state: PipelineState) -> PipelineState:
        """CSV / SVG / report JSON 기록."""
        artifacts: Dict[str, str] = {}
        output_dir = state.get("output_dir")
        if output_dir is None:
            state["artifacts"] = artifacts
            return state

        output_dir.mkdir(parents=True, exist_ok=True)
        spec = state["spec"]
        trajectory = state["trajectory"]
        emit = state.get("emit") or EmitFlags()

        if emit.csv:
            path = self.trajectory_writer.write(
                trajectory, output_dir / f"{spec.name}.csv", state.get("stride", 10)
            )
            artifacts["csv"] = str(path)
        if emit.svg:
            svg = await asyncio.to_thread(
                self.chart_renderer.render, trajectory, state.get("channels") or list(CHART_CHANNELS)
            )
            path = output_dir / f"{spec.name}.svg"
            path.write_text(svg, encoding="utf-8")
            artifacts["svg"] = str(path)
        if emit.report:
            path = output_dir / f"{spec.name}.report.json"
            artifacts["report"] = str(path)
            self.report_store.save(self._summary(state, artifacts), path)

        for kind, path_str in artifacts.items():
            logger.info(f"💾 {kind}: {path_str}")
        state["artifacts"] = artifacts
        return state

    @staticmethod
    def _summary(state: PipelineState, artifacts: Dict[str, str]) -> RunSummary:
        trajectory = state["trajectory"]
        return RunSummary(
            scenario=state["spec"],
            diagnostics=state["diagnostics"],
            record_count=len(trajectory),
            negative_pi_E_records=int(trajectory.negative_pi_E.sum()),
            artifacts=dict(artifacts),
        )

    def summarize(self, outcome: RunOutcome, spec: ScenarioSpec) -> RunSummary:
        """실행 결과를 출력용 문서로 변환."""
        return self._summary(
            {"spec": spec, "trajectory": outcome.trajectory, "diagnostics": outcome.diagnostics},
            outcome.artifacts,
        )

    async def run(
        self,
        spec: ScenarioSpec,
        output_dir: Optional[Path] = None,
        stride: int = 10,
        emit: Optional[EmitFlags] = None,
        channels: Optional[Sequence[str]] = None,
        thresholds: Optional[RegimeThresholds] = None,
        check_expected: bool = False,
    ) -> RunOutcome:
        """파이프라인 실행."""
        initial_state: PipelineState = {
            "spec": spec,
            "output_dir": output_dir,
            "stride": stride,
            "emit": emit or EmitFlags(),
            "channels": list(channels or CHART_CHANNELS),
            "thresholds": thresholds or RegimeThresholds(),
            "check_expected": check_expected,
        }

        final_state = await self.graph.ainvoke(initial_state)
        return RunOutcome(
            scenario=spec.name,
            trajectory=final_state["trajectory"],
            diagnostics=final_state["diagnostics"],
            artifacts=final_state.get("artifacts", {}),
        )
