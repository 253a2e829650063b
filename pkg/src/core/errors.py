"""도메인 예외 계층.

UsageError 계열은 CLI 종료 코드 1, NumericalError 계열은 종료 코드 2로 매핑된다.
"""


class NevDynError(Exception):
    """nevdyn 공통 예외."""

    exit_code = 2

    @property
    def name(self) -> str:
        return type(self).__name__


# ============= Usage Errors =============


class UsageError(NevDynError):
    """잘못된 사용(설정, 인자)."""

    exit_code = 1


class ConfigError(UsageError):
    """설정 파일 파싱/검증 실패."""


class UnknownPreset(UsageError):
    """존재하지 않는 시나리오 프리셋."""


class WrongDims(UsageError):
    """요청한 차원에서 정의되지 않는 연산."""


# ============= Numerical Errors =============


class NumericalError(NevDynError):
    """수치 계산 실패."""

    exit_code = 2


class OpinionOverflow(NumericalError):
    """|s|가 설정된 상한을 초과 (파라미터 폭주)."""


class GrowthOverflow(NumericalError):
    """exp(-Π)가 배정밀도 범위를 벗어남 (큰 음의 외부효과)."""


class StepUnderflow(NumericalError):
    """dt_min에 도달했지만 rel_tol을 만족하지 못함."""


class InvariantBreach(NumericalError):
    """x가 [-1, 1]을 허용 오차 이상 벗어났거나 상태가 유한하지 않음."""


class NoConvergence(NumericalError):
    """Newton과 이분법 모두 고정점을 찾지 못함."""


class NoRootConvergence(NumericalError):
    """특성다항식 근 반복이 수렴하지 않음."""


class VerdictMismatch(NumericalError):
    """Routh-Hurwitz 판정과 고유값 판정 불일치 (구현 버그)."""


class EmptyTrajectory(NumericalError):
    """레코드가 없는 궤적."""


class RegimeMismatch(NumericalError):
    """회귀 모드에서 기대 레짐과 다른 결과."""
