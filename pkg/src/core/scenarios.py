"""정책 시나리오 프리셋, 레짐 진단, 파라미터 스윕."""

import asyncio
import itertools
import math
import os
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from ..utils.logger import setup_logger
from .errors import ConfigError, NevDynError, RegimeMismatch, UnknownPreset
from .integrator import integrate
from .models import (
    FixedGrowth,
    IntegrationConfig,
    ModelParams,
    Regime,
    RegimeDiagnostics,
    RegimeThresholds,
    RegulatedGrowth,
    ScenarioSpec,
    SweepCell,
    SweepResult,
    SweepSpec,
    SystemState,
    Trajectory,
)

logger = setup_logger(__name__)

PRESET_VERSION = "2"

# 공통 파라미터: N0=10, gamma_F=0.9, theta_E=0.2, v=0.6, alpha1=0.03, alpha2=0.07
_BASE_PARAMS: Dict[str, float] = {
    "v": 0.6,
    "gamma_F": 0.9,
    "theta_E": 0.2,
    "alpha1": 0.03,
    "alpha2": 0.07,
}
_INITIAL = SystemState(x=-0.1, pi_F=0.0, pi_E=0.0, N=10.0)

# 성장이 없는 경우 [0, 200] 고정 스텝 RK4
_STATIC_HORIZON = IntegrationConfig(t0=0.0, t_end=200.0, dt=0.01)
# 한쪽 정책(a3=0)은 성장해도 [0, 200] step-halving RK4로 끝까지 간다
_ONE_SIDED_HORIZON = IntegrationConfig(t0=0.0, t_end=200.0, dt=0.01, adaptive=True, rel_tol=1e-8)
# a3 < 0 이면 theta_E*N 되먹임으로 [0, 200] 안에서 |s|가 상한을 넘으므로 [0, 60]
_GROWTH_HORIZON = IntegrationConfig(t0=0.0, t_end=60.0, dt=0.01, adaptive=True, rel_tol=1e-8)


def _spec(
    name: str,
    coefficients: Dict[str, Any],
    integration: IntegrationConfig,
    expected: Optional[Regime] = None,
) -> ScenarioSpec:
    return ScenarioSpec(
        name=name,
        params=ModelParams(**_BASE_PARAMS, **coefficients),
        initial=_INITIAL,
        integration=integration,
        expected_regime=expected,
        version=PRESET_VERSION,
    )


def _laissez_faire(name: str, a1: float, expected: Regime) -> ScenarioSpec:
    return _spec(
        name,
        {"a0": 0.0, "a1": a1, "a2": 0.0, "a3": 0.0, "growth_policy": FixedGrowth(g_N=0.0)},
        _STATIC_HORIZON,
        expected,
    )


def _comprehensive(name: str, a0: float, growth: Any) -> ScenarioSpec:
    return _spec(
        name,
        {"a0": a0, "a1": 1.5, "a2": 0.5, "a3": -0.5, "growth_policy": growth},
        _GROWTH_HORIZON,
    )


_PRESETS: Dict[str, Callable[[], ScenarioSpec]] = {
    "S1_strong": lambda: _laissez_faire("S1_strong", 1.5, Regime.TFV_DOMINANT),
    "S1_weak": lambda: _laissez_faire("S1_weak", 0.5, Regime.COEXISTENCE),
    "S2_one_sided": lambda: _spec(
        "S2_one_sided",
        {"a0": 1.0, "a1": 1.5, "a2": 0.5, "a3": 0.0, "growth_policy": FixedGrowth(g_N=0.1)},
        _ONE_SIDED_HORIZON,
        Regime.NEV_DOMINANT,
    ),
    "S3_low": lambda: _comprehensive("S3_low", 0.5, FixedGrowth(g_N=0.1)),
    "S3_mid": lambda: _comprehensive("S3_mid", 2.5, FixedGrowth(g_N=0.1)),
    "S3_high": lambda: _comprehensive("S3_high", 4.5, FixedGrowth(g_N=0.1)),
    "Macro_fixed": lambda: _comprehensive(
        "Macro_fixed", 2.5, FixedGrowth(g_N=0.1, k1=0.01, k2=0.01)
    ),
    "Macro_regulated": lambda: _comprehensive(
        "Macro_regulated", 2.5, RegulatedGrowth(g_bar=0.1, k1=0.01, k2=0.01)
    ),
}

PRESET_NAMES: Tuple[str, ...] = tuple(_PRESETS)


def preset(name: str) -> ScenarioSpec:
    """이름으로 프리셋 조회. 호출마다 동일한 (불변) 스펙을 새로 만든다."""
    try:
        return _PRESETS[name]()
    except KeyError:
        raise UnknownPreset(f"unknown preset '{name}'; expected one of {', '.join(PRESET_NAMES)}") from None


# ============= Diagnostics =============


def classify_terminal_x(x: float, thresholds: RegimeThresholds) -> Regime:
    if not math.isfinite(x):
        return Regime.UNCLASSIFIED
    if x > thresholds.nev:
        return Regime.NEV_DOMINANT
    if x < thresholds.tfv:
        return Regime.TFV_DOMINANT
    return Regime.COEXISTENCE


def diagnose(
    trajectory: Trajectory, thresholds: Optional[RegimeThresholds] = None
) -> RegimeDiagnostics:
    """종단 상태, 최대 Π, 레짐."""
    thresholds = thresholds or RegimeThresholds()
    terminal = trajectory.states[-1]
    return RegimeDiagnostics(
        terminal_x=float(terminal[0]),
        terminal_pi_F=float(terminal[1]),
        terminal_pi_E=float(terminal[2]),
        terminal_N=float(terminal[3]),
        peak_Pi=float(trajectory.aggregate.max()),
        regime=classify_terminal_x(float(terminal[0]), thresholds),
        thresholds=thresholds,
    )


def run_scenario(
    spec: ScenarioSpec,
    thresholds: Optional[RegimeThresholds] = None,
    check_expected: bool = False,
) -> Tuple[Trajectory, RegimeDiagnostics]:
    """적분 후 레짐 분류. check_expected이면 expected_regime과 비교한다."""
    trajectory = integrate(spec.params, spec.initial, spec.integration)
    diagnostics = diagnose(trajectory, thresholds)
    logger.info(
        f"📊 {spec.name}: x(T)={diagnostics.terminal_x:.6g}, regime={diagnostics.regime.value}"
    )
    if check_expected and spec.expected_regime is not None:
        if diagnostics.regime is not spec.expected_regime:
            raise RegimeMismatch(
                f"{spec.name}: expected {spec.expected_regime.value}, got {diagnostics.regime.value}"
            )
    return trajectory, diagnostics


# ============= Sweeps =============

_SECTIONS = ("params", "initial", "integration")


def _split_path(path: str) -> List[str]:
    parts = path.split(".")
    if parts[0] not in _SECTIONS:
        parts = ["params"] + parts
    return parts


def _check_path(spec: ScenarioSpec, path: str) -> None:
    node: Any = spec.model_dump(mode="json")
    for part in _split_path(path):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"sweep path '{path}' does not name a field of the base scenario")
        node = node[part]
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(f"sweep path '{path}' does not name a numeric field")


def apply_parameter(spec: ScenarioSpec, path: str, value: float) -> ScenarioSpec:
    """점 경로(예: 'a0', 'growth_policy.g_bar', 'initial.x')의 값을 바꾼 새 스펙."""
    _check_path(spec, path)
    document = spec.model_dump(mode="json")
    node = document
    *parents, leaf = _split_path(path)
    for part in parents:
        node = node[part]
    node[leaf] = value
    try:
        return ScenarioSpec.model_validate(document)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigError(f"{path}={value!r} is invalid: {first['msg']}") from exc


def sweep_coordinates(sweep: SweepSpec) -> List[Dict[str, float]]:
    """행 우선 순서의 격자 좌표 (첫 축이 가장 느리게 변함)."""
    paths = [axis.path for axis in sweep.axes]
    return [
        dict(zip(paths, values))
        for values in itertools.product(*[axis.values for axis in sweep.axes])
    ]


def evaluate_cell(sweep: SweepSpec, index: int, coordinates: Dict[str, float]) -> SweepCell:
    """셀 하나 실행. 도메인 오류는 셀에 기록하고 스윕은 계속된다."""
    try:
        spec = sweep.base
        for path, value in coordinates.items():
            spec = apply_parameter(spec, path, value)
        _, diagnostics = run_scenario(spec, sweep.thresholds)
        return SweepCell(index=index, coordinates=coordinates, diagnostics=diagnostics)
    except NevDynError as exc:
        logger.warning(f"⚠️ 셀 {index} 실패 {coordinates}: {exc.name}: {exc}")
        return SweepCell(index=index, coordinates=coordinates, error=f"{exc.name}: {exc}")


async def run_sweep_async(sweep: SweepSpec, jobs: Optional[int] = None) -> SweepResult:
    """Semaphore로 병렬도를 제한해 셀을 스레드에서 실행하고 인덱스 순으로 정렬."""
    jobs = max(1, jobs or os.cpu_count() or 1)
    for axis in sweep.axes:
        _check_path(sweep.base, axis.path)

    coordinates = sweep_coordinates(sweep)
    total = len(coordinates)
    step = max(1, total // 10)
    semaphore = asyncio.Semaphore(jobs)
    done = 0

    logger.info(f"🧮 스윕 시작: {total}개 셀, jobs={jobs}")

    async def run_cell(index: int, coords: Dict[str, float]) -> SweepCell:
        nonlocal done
        async with semaphore:
            cell = await asyncio.to_thread(evaluate_cell, sweep, index, coords)
        done += 1
        if done % step == 0 or done == total:
            logger.info(f"⏳ 스윕 진행: {done}/{total}")
        return cell

    cells = await asyncio.gather(*[run_cell(i, c) for i, c in enumerate(coordinates)])
    failed = sum(1 for cell in cells if cell.error is not None)
    if failed:
        logger.warning(f"⚠️ 실패한 셀 {failed}/{total}")

    return SweepResult(
        axes=[axis.path for axis in sweep.axes],
        cells=sorted(cells, key=lambda cell: cell.index),
    )


def run_sweep(sweep: SweepSpec, jobs: Optional[int] = None) -> SweepResult:
    """동기 진입점."""
    return asyncio.run(run_sweep_async(sweep, jobs))


def regime_ranks_monotone(regimes: Sequence[Regime]) -> bool:
    """분류된 레짐 순위가 비감소인지 (TFV < Coexistence < NEV)."""
    ranks = [regime.rank for regime in regimes if regime is not Regime.UNCLASSIFIED]
    return all(a <= b for a, b in zip(ranks, ranks[1:]))
