"""Main entry point - Dependency Injection and Assembly."""

import argparse
import asyncio
import json
import os
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

from dotenv import load_dotenv
from pydantic import ValidationError

# Core domain (인터페이스만 사용)
from .core.errors import ConfigError, NevDynError, UsageError
from .core.models import (
    Dimensionality,
    EquilibriaReport,
    IChartRenderer,
    IConfigSource,
    IRegimeMapWriter,
    IReportStore,
    ITrajectoryWriter,
    InlineRun,
    RunConfig,
    RunSummary,
    ScenarioSpec,
    SelfCheckReport,
    StabilityReport,
    SweepResult,
    SweepSpec,
    SystemState,
)
from .core.pipeline import SimulationPipeline
from .core.scenarios import PRESET_NAMES, preset, run_sweep_async
from .core.selfcheck import run_selfcheck
from .core.stability import classify_equilibrium, find_all_fixed_points, find_fixed_point

# Concrete implementations (어댑터)
from .adapters.config_adapter import JSONConfigSource
from .adapters.csv_adapter import RegimeMapCSVWriter, TrajectoryCSVWriter
from .adapters.report_adapter import JSONReportStore
from .adapters.svg_adapter import MatplotlibSVGRenderer
from .utils.logger import set_global_log_level, setup_logger

logger = setup_logger(__name__)


class DependencyContainer:
    """의존성 컨테이너 - 구체적인 구현체를 생성하고 주입."""

    def __init__(self, config: dict):
        self.config = config
        self._instances: Dict[str, Any] = {}

    def get_trajectory_writer(self) -> ITrajectoryWriter:
        """궤적 CSV writer 인스턴스 반환."""
        if "trajectory_writer" not in self._instances:
            self._instances["trajectory_writer"] = TrajectoryCSVWriter()
        return self._instances["trajectory_writer"]

    def get_regime_map_writer(self) -> IRegimeMapWriter:
        """레짐 맵 writer 인스턴스 반환."""
        if "regime_map_writer" not in self._instances:
            self._instances["regime_map_writer"] = RegimeMapCSVWriter()
        return self._instances["regime_map_writer"]

    def get_chart_renderer(self) -> IChartRenderer:
        """SVG 차트 렌더러 인스턴스 반환."""
        if "chart_renderer" not in self._instances:
            self._instances["chart_renderer"] = MatplotlibSVGRenderer(
                hashsalt=self.config.get("svg_hashsalt", "nevdyn")
            )
        return self._instances["chart_renderer"]

    def get_report_store(self) -> IReportStore:
        """JSON 보고서 저장소 인스턴스 반환."""
        if "report_store" not in self._instances:
            self._instances["report_store"] = JSONReportStore()
        return self._instances["report_store"]

    def get_config_source(self) -> IConfigSource:
        """설정 소스 인스턴스 반환."""
        if "config_source" not in self._instances:
            self._instances["config_source"] = JSONConfigSource()
        return self._instances["config_source"]

    def build_pipeline(self) -> SimulationPipeline:
        """파이프라인 조립 - 모든 의존성 주입."""
        return SimulationPipeline(
            trajectory_writer=self.get_trajectory_writer(),
            chart_renderer=self.get_chart_renderer(),
            report_store=self.get_report_store(),
        )


class NevDynLab:
    """TFV/NEV 동역학 실험실 - 최상위 조립."""

    def __init__(self, config: Optional[dict] = None):
        self.config = config or self._get_default_config()
        self.container = DependencyContainer(self.config)
        self.pipeline = self.container.build_pipeline()
        self.config_source = self.container.get_config_source()

    def _get_default_config(self) -> dict:
        """기본 설정."""
        return {
            "default_output_dir": "out",
            "svg_hashsalt": "nevdyn",
        }

    # ----- configuration helpers -----

    def resolve_output_dir(self, cli_out: Optional[str], config_out: Optional[str] = None) -> Path:
        """--out > NEVDYN_OUT > 설정 output_dir > ./out."""
        chosen = (
            cli_out
            or self.config_source.output_dir_override()
            or config_out
            or self.config["default_output_dir"]
        )
        return Path(chosen)

    def resolve_jobs(self, cli_jobs: Optional[int]) -> int:
        """--jobs > NEVDYN_JOBS > CPU 수."""
        if cli_jobs is not None:
            if cli_jobs < 1:
                raise UsageError(f"--jobs must be >= 1, got {cli_jobs}")
            return cli_jobs
        return self.config_source.default_jobs() or os.cpu_count() or 1

    @staticmethod
    def spec_from_source(preset_name: Optional[str], inline: Optional[InlineRun]) -> ScenarioSpec:
        if preset_name is not None:
            return preset(preset_name)
        assert inline is not None
        return ScenarioSpec(
            name="inline",
            params=inline.params,
            initial=inline.initial,
            integration=inline.integration,
        )

    def load_run_config(self, path: str) -> Tuple[RunConfig, ScenarioSpec]:
        config = self.config_source.load_run_config(Path(path))
        return config, self.spec_from_source(config.preset, config.inline)

    # ----- operations -----

    async def simulate(self, config_path: str, out: Optional[str] = None) -> RunSummary:
        """설정 파일의 시나리오를 적분하고 산출물을 기록."""
        config, spec = self.load_run_config(config_path)
        outcome = await self.pipeline.run(
            spec,
            output_dir=self.resolve_output_dir(out, config.output_dir),
            stride=config.stride,
            emit=config.emit,
            channels=config.channels,
        )
        return self.pipeline.summarize(outcome, spec)

    async def scenario(
        self,
        name: str,
        out: Optional[str] = None,
        stride: int = 10,
        check_expected: bool = False,
    ) -> RunSummary:
        """프리셋 실행 + 진단."""
        spec = preset(name)
        outcome = await self.pipeline.run(
            spec,
            output_dir=self.resolve_output_dir(out),
            stride=stride,
            check_expected=check_expected,
        )
        return self.pipeline.summarize(outcome, spec)

    async def sweep(
        self, config_path: str, jobs: Optional[int] = None, out: Optional[str] = None
    ) -> Tuple[Path, SweepResult]:
        """파라미터 격자 스윕 후 레짐 맵 CSV 기록."""
        config = self.config_source.load_sweep_config(Path(config_path))
        base = self.spec_from_source(config.preset, config.inline)
        try:
            sweep = SweepSpec(
                base=base,
                axes=config.axes,
                max_cells=config.max_cells,
                thresholds=config.thresholds,
            )
        except ValidationError as exc:
            raise ConfigError(f"{config_path}: {exc.errors()[0]['msg']}") from exc

        result = await run_sweep_async(sweep, self.resolve_jobs(jobs))
        output_dir = self.resolve_output_dir(out, config.output_dir)
        path = self.container.get_regime_map_writer().write(
            result, output_dir / f"{base.name}.regime_map.csv"
        )
        return path, result

    def equilibria(
        self, config_path: str, grid: int = 1001, dims: Dimensionality = Dimensionality.THREE_D
    ) -> EquilibriaReport:
        """격자 스캔 + 이분법 + Newton으로 모든 고정점을 찾고 분류."""
        _, spec = self.load_run_config(config_path)
        points = find_all_fixed_points(spec.params, dims, grid=grid, N=spec.initial.N)
        reports = [classify_equilibrium(spec.params, fp) for fp in points]
        return EquilibriaReport(dimensionality=dims, grid=grid, reports=reports)

    def stability(
        self,
        config_path: str,
        at: Tuple[float, float, float],
        dims: Dimensionality = Dimensionality.THREE_D,
    ) -> StabilityReport:
        """--at 근처의 고정점을 찾아 안정성 보고."""
        _, spec = self.load_run_config(config_path)
        x, pi_F, pi_E = at
        try:
            guess = SystemState(x=x, pi_F=pi_F, pi_E=pi_E, N=spec.initial.N)
        except ValidationError as exc:
            raise UsageError(f"--at: {exc.errors()[0]['msg']}") from exc
        fp = find_fixed_point(spec.params, guess, dims)
        return classify_equilibrium(spec.params, fp)

    def selfcheck(self) -> SelfCheckReport:
        """내장 불변식 검사."""
        return run_selfcheck()


# ============= Command line =============


class CLIArgumentParser(argparse.ArgumentParser):
    """사용 오류를 UsageError(종료 코드 1)로 바꾸는 파서."""

    def error(self, message: str):  # type: ignore[override]
        raise UsageError(message)


def _parse_point(raw: str) -> Tuple[float, float, float]:
    parts = raw.split(",")
    if len(parts) != 3:
        raise UsageError(f"--at expects 'x,piF,piE', got '{raw}'")
    try:
        x, pi_F, pi_E = (float(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"--at expects three numbers, got '{raw}'") from exc
    return x, pi_F, pi_E


def build_parser() -> CLIArgumentParser:
    parser = CLIArgumentParser(prog="nevdyn", description="TFV/NEV adoption dynamics laboratory")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CLIArgumentParser)

    simulate = sub.add_parser("simulate", help="integrate a configured run and write artifacts")
    simulate.add_argument("--config", required=True)
    simulate.add_argument("--out", default=None)

    scenario = sub.add_parser("scenario", help="run a named preset")
    scenario.add_argument("--name", required=True, choices=PRESET_NAMES)
    scenario.add_argument("--out", default=None)
    scenario.add_argument("--stride", type=int, default=10)
    scenario.add_argument("--check", action="store_true", help="fail if the regime differs from the preset's")

    sweep = sub.add_parser("sweep", help="parameter sweep to a regime-map CSV")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--jobs", type=int, default=None)
    sweep.add_argument("--out", default=None)

    dims_choices = [Dimensionality.TWO_D.value, Dimensionality.THREE_D.value, Dimensionality.FOUR_D.value]

    equilibria = sub.add_parser("equilibria", help="all fixed points by bracketing and Newton")
    equilibria.add_argument("--config", required=True)
    equilibria.add_argument("--grid", type=int, default=1001)
    equilibria.add_argument("--dims", choices=dims_choices, default="3d")

    stability = sub.add_parser("stability", help="stability report near a point")
    stability.add_argument("--config", required=True)
    stability.add_argument("--at", required=True, type=str)
    stability.add_argument("--dims", choices=dims_choices, default="3d")

    sub.add_parser("selfcheck", help="built-in invariant suite")
    return parser


def _emit(document: Any) -> None:
    if hasattr(document, "model_dump_json"):
        print(document.model_dump_json(indent=2))
    else:
        print(json.dumps(document, indent=2))


async def _dispatch(lab: NevDynLab, args: argparse.Namespace) -> int:
    if args.command == "simulate":
        _emit(await lab.simulate(args.config, args.out))
    elif args.command == "scenario":
        if args.stride < 1:
            raise UsageError("--stride must be >= 1")
        _emit(await lab.scenario(args.name, args.out, args.stride, args.check))
    elif args.command == "sweep":
        path, result = await lab.sweep(args.config, args.jobs, args.out)
        failed = [cell.index for cell in result.cells if cell.error is not None]
        _emit({"regime_map": str(path), "cells": len(result.cells), "failed_cells": failed})
    elif args.command == "equilibria":
        _emit(lab.equilibria(args.config, args.grid, Dimensionality(args.dims)))
    elif args.command == "stability":
        _emit(lab.stability(args.config, _parse_point(args.at), Dimensionality(args.dims)))
    elif args.command == "selfcheck":
        report = lab.selfcheck()
        _emit(report)
        return 0 if report.passed else 2
    return 0


def cli(argv: Optional[Sequence[str]] = None) -> int:
    """명령행 진입점. 0 성공, 1 사용 오류, 2 수치 오류."""
    load_dotenv()
    try:
        args = build_parser().parse_args(list(argv) if argv is not None else None)
        if args.log_level:
            set_global_log_level(args.log_level)
        return asyncio.run(_dispatch(NevDynLab(), args))
    except NevDynError as exc:
        print(f"error: {exc.name}: {exc}", file=sys.stderr)
        return exc.exit_code
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
