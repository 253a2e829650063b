"""내장 불변식 검사 묶음 (cli `selfcheck`)."""

import math
from typing import List, Tuple

import numpy as np

from ..utils.logger import setup_logger
from .dynamics import x_rate, x_rate_closed_form
from .integrator import integrate
from .models import (
    CheckResult,
    Dimensionality,
    IntegrationConfig,
    ModelParams,
    SelfCheckReport,
    SystemState,
)
from .stability import (
    eigenvalues_small,
    find_fixed_point,
    jacobian_analytic_3d,
    jacobian_fd,
    routh_hurwitz_3d,
    special_case_params,
)

logger = setup_logger(__name__)

SCENARIO_ONE = ModelParams(a1=1.5, v=0.6, gamma_F=0.9, theta_E=0.2, alpha1=0.03, alpha2=0.07)


def random_spectrum_matrix(rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """알려진 스펙트럼을 갖는 3x3 행렬 P*B*P^-1 과 그 고유값."""
    real_parts = rng.uniform(0.1, 3.0, 3) * rng.choice([-1.0, 1.0], 3)
    if rng.random() < 0.5:
        block = np.diag(real_parts)
        spectrum = real_parts.astype(complex)
    else:
        omega = rng.uniform(0.1, 3.0)
        a, c = real_parts[0], real_parts[2]
        block = np.array([[a, omega, 0.0], [-omega, a, 0.0], [0.0, 0.0, c]])
        spectrum = np.array([complex(a, omega), complex(a, -omega), complex(c, 0.0)])

    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    p = q @ np.diag(rng.uniform(0.5, 2.0, 3))
    return p @ block @ np.linalg.inv(p), spectrum


def check_form_equivalence(rng: np.random.Generator, samples: int = 10_000) -> CheckResult:
    worst = 0.0
    for _ in range(samples):
        v = float(rng.uniform(0.05, 2.0))
        x = float(rng.uniform(-1.0, 1.0))
        s = float(rng.uniform(-20.0, 20.0))
        params = ModelParams(a0=s, v=v)
        state = SystemState(x=x)
        exp_form = x_rate(params, state)
        closed = x_rate_closed_form(params, state)
        scale = v * ((1.0 - x) * math.exp(s) + (1.0 + x) * math.exp(-s))
        worst = max(worst, abs(exp_form - closed) / max(scale, 1e-300))
    return CheckResult(
        name="x_rate_form_equivalence",
        passed=worst <= 1e-10,
        measured=worst,
        threshold=1e-10,
        detail=f"{samples} random (v, x, s) with |s| <= 20",
    )


def check_jacobian(rng: np.random.Generator, samples: int = 100) -> CheckResult:
    worst = 0.0
    for _ in range(samples):
        params = ModelParams(
            a0=float(rng.uniform(-1.0, 1.0)),
            a1=float(rng.uniform(0.0, 2.0)),
            a2=float(rng.uniform(0.0, 0.1)),
            a3=float(rng.uniform(-0.1, 0.0)),
        )
        state = SystemState(
            x=float(rng.uniform(-0.95, 0.95)),
            pi_F=float(rng.uniform(0.0, 10.0)),
            pi_E=float(rng.uniform(-5.0, 5.0)),
            N=float(rng.uniform(1.0, 15.0)),
        )
        analytic = jacobian_analytic_3d(params, state)
        numeric = jacobian_fd(params, state, Dimensionality.THREE_D)
        deviation = np.abs(numeric - analytic) / np.maximum(np.abs(analytic), 1.0)
        worst = max(worst, float(deviation.max()))
    return CheckResult(
        name="jacobian_fd_vs_analytic",
        passed=worst < 1e-6,
        measured=worst,
        threshold=1e-6,
        detail=f"{samples} random 3D states",
    )


def check_routh_hurwitz(rng: np.random.Generator, samples: int = 1_000) -> CheckResult:
    mismatches = 0
    for _ in range(samples):
        matrix, spectrum = random_spectrum_matrix(rng)
        expected = bool(np.all(spectrum.real < 0.0))
        by_rh = routh_hurwitz_3d(matrix).stable
        by_eigen = all(z.real < 0.0 for z in eigenvalues_small(matrix))
        if by_rh != expected or by_eigen != expected:
            mismatches += 1
    return CheckResult(
        name="routh_hurwitz_vs_eigenvalues",
        passed=mismatches == 0,
        measured=float(mismatches),
        threshold=0.0,
        detail=f"{samples} random 3x3 matrices with constructed spectra",
    )


def rk4_decay_error(dt: float, alpha1: float = 0.5, t_end: float = 2.0) -> float:
    """gamma_F=theta_E=0 의 pi_F 감쇠를 적분한 전역 오차."""
    params = ModelParams(gamma_F=0.0, theta_E=0.0, alpha1=alpha1)
    config = IntegrationConfig(t0=0.0, t_end=t_end, dt=dt)
    trajectory = integrate(params, SystemState(x=0.0, pi_F=1.0, pi_E=0.0, N=10.0), config)
    return abs(float(trajectory.pi_F[-1]) - math.exp(-alpha1 * t_end))


def check_rk4_order() -> CheckResult:
    coarse, fine = rk4_decay_error(0.2), rk4_decay_error(0.1)
    order = math.log2(coarse / fine)
    return CheckResult(
        name="rk4_convergence_order",
        passed=order >= 3.9,
        measured=order,
        threshold=3.9,
        detail=f"global error {coarse:.3e} at dt=0.2, {fine:.3e} at dt=0.1",
    )


def check_special_fixed_point() -> CheckResult:
    params, state = special_case_params(SCENARIO_ONE)
    fp = find_fixed_point(params, state, Dimensionality.THREE_D)
    return CheckResult(
        name="special_case_fixed_point",
        passed=fp.residual_norm < 1e-10 and abs(fp.state.x) < 1e-9,
        measured=fp.residual_norm,
        threshold=1e-10,
        detail=f"x*={fp.state.x:.3g}, pi_F*={fp.state.pi_F:.12g}",
    )


def run_selfcheck(seed: int = 20240611) -> SelfCheckReport:
    """모든 검사를 고정 시드로 실행."""
    rng = np.random.default_rng(seed)
    checks: List[CheckResult] = [
        check_form_equivalence(rng),
        check_jacobian(rng),
        check_routh_hurwitz(rng),
        check_rk4_order(),
        check_special_fixed_point(),
    ]
    for check in checks:
        icon = "✅" if check.passed else "❌"
        logger.info(f"{icon} {check.name}: measured={check.measured:.3g} (threshold {check.threshold:g})")
    return SelfCheckReport(checks=checks)
