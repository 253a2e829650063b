"""TFV/NEV 선택 동역학의 벡터장.

상태 y = [x, pi_F, pi_E, N]. 2D/3D 축약계는 N을 파라미터로 고정한다.
"""

import math
from typing import Optional, Tuple, TypeVar

import numpy as np

from .errors import GrowthOverflow, OpinionOverflow, WrongDims
from .models import (
    Derivative,
    Dimensionality,
    FixedGrowth,
    ModelParams,
    RegulatedGrowth,
    SystemState,
)


# 스칼라 또는 궤적 열
Externality = TypeVar("Externality", float, np.ndarray)


def _guard_opinion(params: ModelParams, s: float) -> float:
    if not math.isfinite(s) or abs(s) > params.opinion_cap:
        raise OpinionOverflow(f"|s|={abs(s):.6g} exceeds cap {params.opinion_cap:g}")
    return s


def opinion_index(params: ModelParams, state: SystemState) -> float:
    """의견 형성 지수 s = a0 + a1*x + a2*pi_F + a3*pi_E."""
    return params.a0 + params.a1 * state.x + params.a2 * state.pi_F + params.a3 * state.pi_E


def transition_probabilities(params: ModelParams, s: float) -> Tuple[float, float]:
    """전환 확률 (p_plus, p_minus) = (v*e^s, v*e^-s)."""
    _guard_opinion(params, s)
    return params.v * math.exp(s), params.v * math.exp(-s)


def _x_rate(v: float, x: float, s: float) -> float:
    return v * ((1.0 - x) * math.exp(s) - (1.0 + x) * math.exp(-s))


def x_rate(params: ModelParams, state: SystemState) -> float:
    """dx/dt = v[(1-x)e^s - (1+x)e^-s]."""
    s = _guard_opinion(params, opinion_index(params, state))
    return _x_rate(params.v, state.x, s)


def x_rate_closed_form(params: ModelParams, state: SystemState) -> float:
    """dx/dt = 2v[tanh(s) - x]cosh(s). x_rate와 같은 값의 다른 대수 형태."""
    s = _guard_opinion(params, opinion_index(params, state))
    return 2.0 * params.v * (math.tanh(s) - state.x) * math.cosh(s)


def aggregate_externality(params: ModelParams, pi_F: Externality, pi_E: Externality) -> Externality:
    """Π = k1*pi_F + k2*pi_E (성장 정책의 가중치 사용)."""
    policy = params.growth_policy
    return policy.k1 * pi_F + policy.k2 * pi_E


def _growth(params: ModelParams, pi_F: float, pi_E: float) -> float:
    policy = params.growth_policy
    if isinstance(policy, RegulatedGrowth):
        aggregate = aggregate_externality(params, pi_F, pi_E)
        try:
            return policy.g_bar * math.exp(-aggregate)
        except OverflowError:
            raise GrowthOverflow(f"exp(-Pi) overflows at Pi={aggregate:.6g}") from None
    return policy.g_N


def effective_growth(params: ModelParams, state: SystemState) -> float:
    """Fixed(g) -> g, Regulated -> g_bar*exp(-Π)."""
    return _growth(params, state.pi_F, state.pi_E)


def has_frozen_growth(params: ModelParams) -> bool:
    policy = params.growth_policy
    return isinstance(policy, FixedGrowth) and policy.g_N == 0.0


def _field(
    params: ModelParams, x: float, pi_F: float, pi_E: float, N: float, g: float
) -> Tuple[float, float, float, float]:
    s = _guard_opinion(
        params, params.a0 + params.a1 * x + params.a2 * pi_F + params.a3 * pi_E
    )
    dx = _x_rate(params.v, x, s)
    dpi_F = params.gamma_F * N * (1.0 - x) - params.alpha1 * pi_F
    dN = g * N
    # dx, dN은 같은 호출에서 계산된 값을 사용
    dpi_E = params.theta_E * (dN * (1.0 + x) + dx * N) - params.alpha2 * pi_E
    return dx, dpi_F, dpi_E, dN


def vector_field(params: ModelParams, state: SystemState) -> Derivative:
    """4D 벡터장. Fixed(0) 성장에서는 3D 기준계와 정확히 일치."""
    g = effective_growth(params, state)
    dx, dpi_F, dpi_E, dN = _field(params, state.x, state.pi_F, state.pi_E, state.N, g)
    return Derivative(dx_dt=dx, dpi_F_dt=dpi_F, dpi_E_dt=dpi_E, dN_dt=dN)


def rhs(params: ModelParams, y: np.ndarray) -> np.ndarray:
    """배열 기반 4D 우변 (적분기 내부 루프용, 검증 생략)."""
    x, pi_F, pi_E, N = float(y[0]), float(y[1]), float(y[2]), float(y[3])
    return np.array(_field(params, x, pi_F, pi_E, N, _growth(params, pi_F, pi_E)))


def subsystem_rhs(
    params: ModelParams,
    y: np.ndarray,
    dims: Dimensionality,
    N: Optional[float] = None,
) -> np.ndarray:
    """축약계 우변.

    - TWO_D: y = [x, pi_F], pi_E = 0 고정
    - THREE_D: y = [x, pi_F, pi_E]
    - FOUR_D: y = [x, pi_F, pi_E, N], 성장 정책 적용

    2D/3D에서는 N이 고정 파라미터이므로 반드시 전달해야 한다.
    """
    if len(y) != dims.size:
        raise WrongDims(f"state of length {len(y)} does not match {dims.value}")
    if dims is Dimensionality.FOUR_D:
        return rhs(params, y)
    if N is None:
        raise WrongDims(f"{dims.value} subsystem needs a frozen N")

    pi_E = float(y[2]) if dims is Dimensionality.THREE_D else 0.0
    dx, dpi_F, dpi_E, _ = _field(params, float(y[0]), float(y[1]), pi_E, N, 0.0)
    if dims is Dimensionality.TWO_D:
        return np.array([dx, dpi_F])
    return np.array([dx, dpi_F, dpi_E])


# ============= Trajectory derived series =============


def opinion_series(params: ModelParams, states: np.ndarray) -> np.ndarray:
    return (
        params.a0
        + params.a1 * states[:, 0]
        + params.a2 * states[:, 1]
        + params.a3 * states[:, 2]
    )


def aggregate_series(params: ModelParams, states: np.ndarray) -> np.ndarray:
    return aggregate_externality(params, states[:, 1], states[:, 2])


def growth_series(params: ModelParams, states: np.ndarray) -> np.ndarray:
    policy = params.growth_policy
    if isinstance(policy, RegulatedGrowth):
        return policy.g_bar * np.exp(-aggregate_series(params, states))
    return np.full(states.shape[0], policy.g_N, dtype=float)
