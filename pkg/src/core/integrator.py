"""고정 스텝 / step-halving 시간 적분."""

import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..utils.logger import setup_logger
from .dynamics import aggregate_series, growth_series, opinion_series, rhs
from .errors import InvariantBreach, OpinionOverflow, StepUnderflow
from .models import (
    IntegrationConfig,
    IntegrationMethod,
    ModelParams,
    SystemState,
    Trajectory,
)

logger = setup_logger(__name__)

X_OVERSHOOT_TOL = 1e-12

Stepper = Callable[[ModelParams, np.ndarray, float], np.ndarray]


def _rk4(params: ModelParams, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(params, y)
    k2 = rhs(params, y + 0.5 * dt * k1)
    k3 = rhs(params, y + 0.5 * dt * k2)
    k4 = rhs(params, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _euler(params: ModelParams, y: np.ndarray, dt: float) -> np.ndarray:
    return y + dt * rhs(params, y)


_STEPPERS: Dict[IntegrationMethod, Stepper] = {
    IntegrationMethod.RK4: _rk4,
    IntegrationMethod.EULER: _euler,
}


def enforce_invariants(params: ModelParams, y: np.ndarray, t: float) -> np.ndarray:
    """스텝 결과 검사. x의 1e-12 이내 초과만 [-1, 1]로 잘라낸다."""
    if not np.all(np.isfinite(y)):
        raise InvariantBreach(f"non-finite state at t={t!r}: {y.tolist()}")

    x = float(y[0])
    if abs(x) > 1.0:
        if abs(x) - 1.0 > X_OVERSHOOT_TOL:
            raise InvariantBreach(f"x={x!r} left [-1, 1] at t={t!r}")
        y = y.copy()
        y[0] = math.copysign(1.0, x)

    if y[3] <= 0.0:
        raise InvariantBreach(f"N={float(y[3])!r} is not positive at t={t!r}")

    s = params.a0 + params.a1 * y[0] + params.a2 * y[1] + params.a3 * y[2]
    if abs(s) > params.opinion_cap:
        raise OpinionOverflow(f"|s|={abs(s):.6g} exceeds cap {params.opinion_cap:g} at t={t!r}")
    return y


def step_rk4(params: ModelParams, state: SystemState, dt: float) -> SystemState:
    """고전 4단 Runge-Kutta 한 스텝."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    y = enforce_invariants(params, _rk4(params, state.to_array(), dt), dt)
    return SystemState.from_array(y)


def step_euler(params: ModelParams, state: SystemState, dt: float) -> SystemState:
    """전진 Euler 한 스텝 (교차 검증용)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    y = enforce_invariants(params, _euler(params, state.to_array(), dt), dt)
    return SystemState.from_array(y)


def fixed_time_grid(config: IntegrationConfig) -> np.ndarray:
    """t_k = min(t0 + k*dt, t_end), 마지막 점은 정확히 t_end."""
    n = math.ceil((config.t_end - config.t0) / config.dt - 1e-9)
    grid = np.minimum(config.t0 + config.dt * np.arange(n + 1, dtype=float), config.t_end)
    grid[-1] = config.t_end
    return grid


def _integrate_fixed(
    params: ModelParams, y0: np.ndarray, config: IntegrationConfig, stepper: Stepper
) -> Tuple[np.ndarray, np.ndarray]:
    grid = fixed_time_grid(config)
    states = np.empty((grid.shape[0], 4), dtype=float)
    states[0] = y0
    y = y0
    for k in range(1, grid.shape[0]):
        y = enforce_invariants(params, stepper(params, y, grid[k] - grid[k - 1]), grid[k])
        states[k] = y
    return grid, states


def _integrate_adaptive(
    params: ModelParams, y0: np.ndarray, config: IntegrationConfig, stepper: Stepper
) -> Tuple[np.ndarray, np.ndarray]:
    times: List[float] = [config.t0]
    states: List[np.ndarray] = [y0]
    t, y, h = config.t0, y0, config.dt
    rejections = 0
    last_overflow: Optional[OpinionOverflow] = None

    while t < config.t_end:
        remaining = config.t_end - t
        h_try = min(h, remaining)
        try:
            full = stepper(params, y, h_try)
            half = stepper(params, stepper(params, y, 0.5 * h_try), 0.5 * h_try)
            accepted = bool(
                np.all(np.abs(full - half) <= config.rel_tol * np.maximum(1.0, np.abs(half)))
            )
        except OpinionOverflow as exc:
            last_overflow = exc
            accepted = False

        if not accepted:
            rejections += 1
            h = 0.5 * h_try
            logger.debug("step rejected at t=%r, retry with dt=%r", t, h)
            if h < config.min_step:
                if last_overflow is not None:
                    raise last_overflow
                raise StepUnderflow(
                    f"rel_tol={config.rel_tol:g} not met at t={t!r} with dt_min={config.min_step:g}"
                )
            continue

        last_overflow = None
        t = config.t_end if h_try >= remaining else t + h_try
        y = enforce_invariants(params, half, t)
        times.append(t)
        states.append(y)
        h = min(2.0 * h, config.dt)

    if rejections:
        logger.debug("adaptive run: %d accepted, %d rejected steps", len(times) - 1, rejections)
    return np.array(times), np.vstack(states)


def build_trajectory(
    params: ModelParams,
    config: IntegrationConfig,
    times: np.ndarray,
    states: np.ndarray,
) -> Trajectory:
    """저장된 상태에서 파생 열(s, g_eff, Pi, 플래그)을 다시 계산."""
    return Trajectory(
        params=params,
        integration=config,
        times=times,
        states=states,
        opinion=opinion_series(params, states),
        growth=growth_series(params, states),
        aggregate=aggregate_series(params, states),
        negative_pi_E=states[:, 2] < 0.0,
    )


def integrate(
    params: ModelParams, initial: SystemState, config: IntegrationConfig
) -> Trajectory:
    """초기 상태에서 [t0, t_end] 구간 적분. 모든 수락 스텝을 기록한다."""
    logger.info(
        f"⏱️ 적분 시작: method={config.method.value}, t=[{config.t0:g}, {config.t_end:g}], "
        f"dt={config.dt:g}, adaptive={config.adaptive}"
    )
    stepper = _STEPPERS[config.method]
    y0 = enforce_invariants(params, initial.to_array(), config.t0)

    if config.adaptive:
        times, states = _integrate_adaptive(params, y0, config, stepper)
    else:
        times, states = _integrate_fixed(params, y0, config, stepper)

    trajectory = build_trajectory(params, config, times, states)
    logger.info(f"✅ 적분 완료: {len(trajectory)}개 레코드, x(T)={states[-1, 0]:.6g}")
    return trajectory
