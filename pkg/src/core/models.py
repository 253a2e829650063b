"""Core domain models and port interfaces for the TFV/NEV dynamics lab."""

from abc import ABC, abstractmethod
from enum import Enum
from pathlib import Path
from typing import Annotated, Dict, List, Literal, Optional, Sequence, Type, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

STATE_FIELDS = ("x", "pi_F", "pi_E", "N")
TRAJECTORY_COLUMNS = ("t", "x", "pi_F", "pi_E", "N", "s", "g_eff", "Pi", "neg_pi_E_flag")
CHART_CHANNELS = ("x", "pi_F", "pi_E", "N", "Pi")
# exp(700) < 배정밀도 최대값 (~exp(709.78))
OPINION_CAP_LIMIT = 700.0

Channel = Literal["x", "pi_F", "pi_E", "N", "Pi"]


# ============= Domain Models: dynamics =============


class FixedGrowth(BaseModel):
    """고정 성장률 정책. k1, k2는 Π 진단에만 쓰인다."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    kind: Literal["fixed"] = "fixed"
    g_N: float = 0.0
    k1: float = Field(default=0.01, ge=0.0)
    k2: float = Field(default=0.01, ge=0.0)


class RegulatedGrowth(BaseModel):
    """외부효과 규제 성장률 g_N = g_bar * exp(-(k1*pi_F + k2*pi_E))."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    kind: Literal["regulated"] = "regulated"
    g_bar: float = Field(ge=0.0)
    k1: float = Field(default=0.01, ge=0.0)
    k2: float = Field(default=0.01, ge=0.0)


GrowthPolicy = Annotated[Union[FixedGrowth, RegulatedGrowth], Field(discriminator="kind")]


class ModelParams(BaseModel):
    """의견 지수, 전환 속도, 외부효과, 정화율, 성장 정책 계수."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    a0: float = 0.0
    a1: float = 0.0
    a2: float = 0.0
    a3: float = 0.0
    v: float = Field(default=0.6, gt=0.0)
    gamma_F: float = Field(default=0.9, ge=0.0)
    theta_E: float = Field(default=0.2, ge=0.0)
    alpha1: float = Field(default=0.03, gt=0.0)
    alpha2: float = Field(default=0.07, gt=0.0)
    growth_policy: GrowthPolicy = Field(default_factory=FixedGrowth)
    opinion_cap: float = Field(default=500.0, gt=0.0, le=OPINION_CAP_LIMIT)


class SystemState(BaseModel):
    """상태 벡터 (x, pi_F, pi_E, N). 전체 차량 수는 2N."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    x: float = Field(default=0.0, ge=-1.0, le=1.0)
    pi_F: float = 0.0
    pi_E: float = 0.0
    N: float = Field(default=10.0, gt=0.0)

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.pi_F, self.pi_E, self.N], dtype=float)

    @classmethod
    def from_array(cls, y: Sequence[float]) -> "SystemState":
        return cls(x=float(y[0]), pi_F=float(y[1]), pi_E=float(y[2]), N=float(y[3]))


class Derivative(BaseModel):
    """SystemState의 시간 미분."""

    model_config = ConfigDict(frozen=True)

    dx_dt: float
    dpi_F_dt: float
    dpi_E_dt: float
    dN_dt: float

    def to_array(self) -> np.ndarray:
        return np.array([self.dx_dt, self.dpi_F_dt, self.dpi_E_dt, self.dN_dt], dtype=float)


# ============= Domain Models: integration =============


class IntegrationMethod(str, Enum):
    RK4 = "rk4"
    EULER = "euler"


class IntegrationConfig(BaseModel):
    """적분 구간, 스텝, 방식, step-halving 설정."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    t0: float = 0.0
    t_end: float = 200.0
    dt: float = Field(default=0.01, gt=0.0)
    method: IntegrationMethod = IntegrationMethod.RK4
    adaptive: bool = False
    rel_tol: float = Field(default=1e-8, gt=0.0)
    dt_min: Optional[float] = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def _check_window(self) -> "IntegrationConfig":
        if self.t_end <= self.t0:
            raise ValueError("t_end must be greater than t0")
        if self.dt > self.t_end - self.t0:
            raise ValueError("dt must not exceed t_end - t0")
        return self

    @property
    def min_step(self) -> float:
        return self.dt_min if self.dt_min is not None else self.dt / 1024.0


class TrajectoryRecord(BaseModel):
    """궤적의 한 시점."""

    model_config = ConfigDict(frozen=True)

    t: float
    x: float
    pi_F: float
    pi_E: float
    N: float
    s: float
    g_eff: float
    Pi: float
    neg_pi_E_flag: bool


class Trajectory(BaseModel):
    """시간순 상태 열과 파생 열(s, g_eff, Pi, 음수 pi_E 플래그)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    params: ModelParams
    integration: IntegrationConfig
    times: np.ndarray
    states: np.ndarray
    opinion: np.ndarray
    growth: np.ndarray
    aggregate: np.ndarray
    negative_pi_E: np.ndarray

    def __len__(self) -> int:
        return int(self.times.shape[0])

    @property
    def x(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def pi_F(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def pi_E(self) -> np.ndarray:
        return self.states[:, 2]

    @property
    def N(self) -> np.ndarray:
        return self.states[:, 3]

    def column(self, name: str) -> np.ndarray:
        columns = {
            "t": self.times,
            "x": self.x,
            "pi_F": self.pi_F,
            "pi_E": self.pi_E,
            "N": self.N,
            "s": self.opinion,
            "g_eff": self.growth,
            "Pi": self.aggregate,
            "neg_pi_E_flag": self.negative_pi_E,
        }
        if name not in columns:
            raise KeyError(f"unknown trajectory column: {name}")
        return columns[name]

    def record(self, i: int) -> TrajectoryRecord:
        return TrajectoryRecord(
            t=float(self.times[i]),
            x=float(self.states[i, 0]),
            pi_F=float(self.states[i, 1]),
            pi_E=float(self.states[i, 2]),
            N=float(self.states[i, 3]),
            s=float(self.opinion[i]),
            g_eff=float(self.growth[i]),
            Pi=float(self.aggregate[i]),
            neg_pi_E_flag=bool(self.negative_pi_E[i]),
        )

    def state_at(self, i: int) -> SystemState:
        return SystemState.from_array(self.states[i])

    @property
    def terminal_state(self) -> SystemState:
        return self.state_at(len(self) - 1)


# ============= Domain Models: stability =============


class Dimensionality(str, Enum):
    TWO_D = "2d"
    THREE_D = "3d"
    FOUR_D = "4d"

    @property
    def size(self) -> int:
        return {"2d": 2, "3d": 3, "4d": 4}[self.value]

    @classmethod
    def from_size(cls, n: int) -> "Dimensionality":
        return {2: cls.TWO_D, 3: cls.THREE_D, 4: cls.FOUR_D}[n]


class FixedPoint(BaseModel):
    """수렴한 고정점."""

    model_config = ConfigDict(frozen=True)

    state: SystemState
    residual_norm: float
    dimensionality: Dimensionality


class EigenValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    real: float
    imag: float

    def as_complex(self) -> complex:
        return complex(self.real, self.imag)

    @classmethod
    def from_complex(cls, z: complex) -> "EigenValue":
        return cls(real=float(z.real), imag=float(z.imag))


class RHCondition(BaseModel):
    """이름 붙은 Routh-Hurwitz 조건과 평가된 좌변."""

    model_config = ConfigDict(frozen=True)

    name: str
    lhs: float
    holds: bool


class RouthHurwitzVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    dims: int
    trace: float
    det: float
    minors: List[float] = Field(default_factory=list)
    conditions: List[RHCondition]
    stable: bool
    reference_trace: Optional[float] = None
    reference_det: Optional[float] = None


class Classification(str, Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"


class StabilityReport(BaseModel):
    """고정점 + 야코비안 + 고유값 + RH 판정 + 분류."""

    model_config = ConfigDict(frozen=True)

    fixed_point: FixedPoint
    jacobian: List[List[float]]
    jacobian_source: Literal["analytic", "finite_difference"]
    eigenvalues: List[EigenValue]
    trace: float
    det: float
    rh: Optional[RouthHurwitzVerdict] = None
    classification: Classification
    margin: float


# ============= Domain Models: scenarios =============


class Regime(str, Enum):
    TFV_DOMINANT = "TFVDominant"
    COEXISTENCE = "Coexistence"
    NEV_DOMINANT = "NEVDominant"
    UNCLASSIFIED = "Unclassified"

    @property
    def rank(self) -> int:
        return {"TFVDominant": 0, "Coexistence": 1, "NEVDominant": 2, "Unclassified": -1}[self.value]


class RegimeThresholds(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    nev: float = 0.5
    tfv: float = -0.5

    @model_validator(mode="after")
    def _ordered(self) -> "RegimeThresholds":
        if self.tfv >= self.nev:
            raise ValueError("tfv threshold must be below nev threshold")
        return self


class RegimeDiagnostics(BaseModel):
    """종단 상태와 레짐 분류."""

    model_config = ConfigDict(frozen=True)

    terminal_x: float
    terminal_pi_F: float
    terminal_pi_E: float
    terminal_N: float
    peak_Pi: float
    regime: Regime
    thresholds: RegimeThresholds = Field(default_factory=RegimeThresholds)


class ScenarioSpec(BaseModel):
    """이름 붙은 정책 시나리오 프리셋."""

    model_config = ConfigDict(frozen=True)

    name: str
    params: ModelParams
    initial: SystemState
    integration: IntegrationConfig = Field(default_factory=IntegrationConfig)
    expected_regime: Optional[Regime] = None
    version: str = "1"


class SweepAxis(BaseModel):
    model_config = ConfigDict(frozen=True)

    path: str
    values: List[float] = Field(min_length=1)


class SweepSpec(BaseModel):
    """기준 시나리오 + 파라미터 격자."""

    model_config = ConfigDict(frozen=True)

    base: ScenarioSpec
    axes: List[SweepAxis] = Field(min_length=1)
    max_cells: int = Field(default=1_000_000, gt=0)
    thresholds: RegimeThresholds = Field(default_factory=RegimeThresholds)

    @property
    def cell_count(self) -> int:
        count = 1
        for axis in self.axes:
            count *= len(axis.values)
        return count

    @model_validator(mode="after")
    def _check_cells(self) -> "SweepSpec":
        paths = [axis.path for axis in self.axes]
        if len(set(paths)) != len(paths):
            raise ValueError("sweep axes must have distinct paths")
        if self.cell_count > self.max_cells:
            raise ValueError(f"sweep has {self.cell_count} cells, cap is {self.max_cells}")
        return self


class SweepCell(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int
    coordinates: Dict[str, float]
    diagnostics: Optional[RegimeDiagnostics] = None
    error: Optional[str] = None


class SweepResult(BaseModel):
    """정렬된 레짐 맵."""

    model_config = ConfigDict(frozen=True)

    axes: List[str]
    cells: List[SweepCell]


# ============= Domain Models: configuration & outcomes =============


class InlineRun(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: ModelParams
    initial: SystemState
    integration: IntegrationConfig = Field(default_factory=IntegrationConfig)


class EmitFlags(BaseModel):
    model_config = ConfigDict(frozen=True)

    csv: bool = True
    svg: bool = True
    report: bool = True


class RunConfig(BaseModel):
    """simulate/equilibria/stability 설정: 프리셋 또는 인라인 중 하나."""

    model_config = ConfigDict(frozen=True)

    preset: Optional[str] = None
    inline: Optional[InlineRun] = None
    output_dir: Optional[str] = None
    stride: int = Field(default=10, ge=1)
    emit: EmitFlags = Field(default_factory=EmitFlags)
    channels: List[Channel] = Field(default_factory=lambda: list(CHART_CHANNELS))

    @model_validator(mode="after")
    def _exactly_one_source(self) -> "RunConfig":
        if (self.preset is None) == (self.inline is None):
            raise ValueError("exactly one of 'preset' or 'inline' must be given")
        return self


class SweepConfig(BaseModel):
    """sweep 설정: 기준(프리셋 또는 인라인) + 축."""

    model_config = ConfigDict(frozen=True)

    preset: Optional[str] = None
    inline: Optional[InlineRun] = None
    axes: List[SweepAxis] = Field(min_length=1)
    max_cells: int = Field(default=1_000_000, gt=0)
    thresholds: RegimeThresholds = Field(default_factory=RegimeThresholds)
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def _exactly_one_source(self) -> "SweepConfig":
        if (self.preset is None) == (self.inline is None):
            raise ValueError("exactly one of 'preset' or 'inline' must be given")
        return self


class RunOutcome(BaseModel):
    """파이프라인 실행 결과."""

    model_config = ConfigDict(frozen=True)

    scenario: str
    trajectory: Trajectory
    diagnostics: RegimeDiagnostics
    artifacts: Dict[str, str] = Field(default_factory=dict)


class EquilibriaReport(BaseModel):
    """equilibria 출력: 찾은 모든 고정점과 각 안정성 보고."""

    model_config = ConfigDict(frozen=True)

    dimensionality: Dimensionality
    grid: int
    reports: List[StabilityReport]


class RunSummary(BaseModel):
    """scenario/simulate 결과 문서 (report JSON, stdout)."""

    model_config = ConfigDict(frozen=True)

    scenario: ScenarioSpec
    diagnostics: RegimeDiagnostics
    record_count: int
    negative_pi_E_records: int = 0
    artifacts: Dict[str, str] = Field(default_factory=dict)


class CheckResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""


class SelfCheckReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


# ============= Port Interfaces (Abstractions) =============

M = TypeVar("M", bound=BaseModel)


class ITrajectoryWriter(ABC):
    """궤적 직렬화 인터페이스."""

    @abstractmethod
    def write(self, trajectory: Trajectory, path: Path, stride: int = 1) -> Path:
        """stride번째 레코드마다 기록."""
        pass


class IRegimeMapWriter(ABC):
    """스윕 레짐 맵 직렬화 인터페이스."""

    @abstractmethod
    def write(self, result: SweepResult, path: Path) -> Path:
        """레짐 맵 기록."""
        pass


class IChartRenderer(ABC):
    """궤적 차트 렌더링 인터페이스."""

    @abstractmethod
    def render(self, trajectory: Trajectory, channels: Sequence[str]) -> str:
        """채널별 시계열 차트 문서 반환."""
        pass


class IReportStore(ABC):
    """구조화 문서(JSON) 저장소 인터페이스."""

    @abstractmethod
    def save(self, document: BaseModel, path: Path) -> Path:
        """문서 저장."""
        pass

    @abstractmethod
    def load(self, path: Path, model: Type[M]) -> M:
        """문서 로드."""
        pass


class IConfigSource(ABC):
    """설정 소스 인터페이스."""

    @abstractmethod
    def load_run_config(self, path: Path) -> RunConfig:
        """실행 설정 로드."""
        pass

    @abstractmethod
    def load_sweep_config(self, path: Path) -> SweepConfig:
        """스윕 설정 로드."""
        pass

    @abstractmethod
    def output_dir_override(self) -> Optional[str]:
        """환경 변수 기반 출력 디렉터리."""
        pass

    @abstractmethod
    def default_jobs(self) -> Optional[int]:
        """환경 변수 기반 기본 병렬도."""
        pass
