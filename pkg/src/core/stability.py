"""고정점 탐색, 야코비안, Routh-Hurwitz 판정, 고유값, 평형점 분류."""

import cmath
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect

from ..utils.logger import setup_logger
from .dynamics import has_frozen_growth, opinion_index, subsystem_rhs
from .errors import (
    NoConvergence,
    NoRootConvergence,
    OpinionOverflow,
    UsageError,
    VerdictMismatch,
    WrongDims,
)
from .models import (
    Classification,
    Dimensionality,
    EigenValue,
    FixedGrowth,
    FixedPoint,
    ModelParams,
    RHCondition,
    RouthHurwitzVerdict,
    StabilityReport,
    SystemState,
)

logger = setup_logger(__name__)

NEWTON_TOL = 1e-10
MAX_NEWTON_ITER = 100
MAX_HALVINGS = 50
FD_REL_STEP = 1e-6
DEFAULT_MARGIN = 1e-9
ROOT_TOL = 1e-10
MAX_ROOT_ITER = 500
ROOT_STALL = 1e-15
CLUSTER_RADIUS = 1e-2
MULTIPLICITY_TOL = 1e-10
DEFAULT_SCAN_GRID = 1001

Residual = Callable[[np.ndarray], np.ndarray]


# ============= Reduced-state helpers =============


def _require_frozen_growth(params: ModelParams, what: str) -> None:
    if not has_frozen_growth(params):
        raise WrongDims(f"{what} needs frozen fleet growth (Fixed g_N=0)")


def reduced_vector(state: SystemState, dims: Dimensionality) -> np.ndarray:
    return state.to_array()[: dims.size]


def _state_from_reduced(y: np.ndarray, dims: Dimensionality, N: float) -> SystemState:
    full = [float(y[0]), float(y[1]), 0.0, N]
    if dims.size >= 3:
        full[2] = float(y[2])
    if dims.size == 4:
        full[3] = float(y[3])
    full[0] = min(1.0, max(-1.0, full[0]))
    return SystemState.from_array(full)


# ============= Jacobians =============


def _opinion_row(params: ModelParams, x: float, s: float) -> np.ndarray:
    if abs(s) > params.opinion_cap:
        raise OpinionOverflow(f"|s|={abs(s):.6g} exceeds cap {params.opinion_cap:g}")
    c, sh = math.cosh(s), math.sinh(s)
    return np.array(
        [
            2.0 * params.v * (params.a1 * c - c - params.a1 * x * sh),
            2.0 * params.v * params.a2 * (c - x * sh),
            2.0 * params.v * params.a3 * (c - x * sh),
        ]
    )


def _jacobian_2d(params: ModelParams, x: float, pi_F: float, N: float) -> np.ndarray:
    row1 = _opinion_row(params, x, params.a0 + params.a1 * x + params.a2 * pi_F)
    return np.array(
        [
            [row1[0], row1[1]],
            [-params.gamma_F * N, -params.alpha1],
        ]
    )


def _jacobian_3d(params: ModelParams, x: float, pi_F: float, pi_E: float, N: float) -> np.ndarray:
    row1 = _opinion_row(params, x, params.a0 + params.a1 * x + params.a2 * pi_F + params.a3 * pi_E)
    row2 = np.array([-params.gamma_F * N, -params.alpha1, 0.0])
    row3 = params.theta_E * N * row1
    row3[2] -= params.alpha2
    return np.vstack([row1, row2, row3])


def jacobian_analytic_2d(params: ModelParams, state: SystemState) -> np.ndarray:
    """(x, pi_F) 축약계의 야코비안. pi_E = 0으로 둔다."""
    _require_frozen_growth(params, "jacobian_analytic_2d")
    return _jacobian_2d(params, state.x, state.pi_F, state.N)


def jacobian_analytic_3d(params: ModelParams, state: SystemState) -> np.ndarray:
    """3D 기준계 야코비안. 셋째 행은 theta_E*N*(첫째 행) + [0, 0, -alpha2]."""
    _require_frozen_growth(params, "jacobian_analytic_3d")
    return _jacobian_3d(params, state.x, state.pi_F, state.pi_E, state.N)


def jacobian_fd(
    params: ModelParams, state: SystemState, dims: Dimensionality
) -> np.ndarray:
    """중심 차분 야코비안, h_j = 1e-6*max(1, |y_j|)."""
    y = reduced_vector(state, dims)
    n = dims.size
    jac = np.empty((n, n), dtype=float)
    for j in range(n):
        h = FD_REL_STEP * max(1.0, abs(float(y[j])))
        plus, minus = y.copy(), y.copy()
        plus[j] += h
        minus[j] -= h
        f_plus = subsystem_rhs(params, plus, dims, state.N)
        f_minus = subsystem_rhs(params, minus, dims, state.N)
        jac[:, j] = (f_plus - f_minus) / (2.0 * h)
    return jac


def _analytic_jacobian(
    params: ModelParams, dims: Dimensionality, N: float
) -> Callable[[np.ndarray], np.ndarray]:
    if dims is Dimensionality.TWO_D:
        return lambda y: _jacobian_2d(params, float(y[0]), float(y[1]), N)
    return lambda y: _jacobian_3d(params, float(y[0]), float(y[1]), float(y[2]), N)


# ============= Fixed points =============


def _residual_norm(f: Residual, y: np.ndarray) -> float:
    try:
        value = f(y)
    except OpinionOverflow:
        return math.inf
    norm = float(np.linalg.norm(value))
    return norm if math.isfinite(norm) else math.inf


def damped_newton(
    f: Residual,
    jac: Callable[[np.ndarray], np.ndarray],
    y0: np.ndarray,
    tol: float = NEWTON_TOL,
    max_iter: int = MAX_NEWTON_ITER,
) -> Tuple[np.ndarray, float]:
    """잔차가 줄어들 때까지 스텝을 반감하는 Newton 반복."""
    y = np.array(y0, dtype=float)
    r = _residual_norm(f, y)
    if not math.isfinite(r):
        raise NoConvergence("residual is not finite at the initial guess")

    for _ in range(max_iter):
        if r < tol:
            return y, r
        try:
            delta = np.linalg.solve(jac(y), -f(y))
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular Jacobian at {y.tolist()}") from exc

        lam = 1.0
        for _ in range(MAX_HALVINGS + 1):
            candidate = y + lam * delta
            r_candidate = _residual_norm(f, candidate)
            if r_candidate < r:
                break
            lam *= 0.5
        else:
            raise NoConvergence(f"line search stalled at residual {r:.3g}")
        y, r = candidate, r_candidate

    if r < tol:
        return y, r
    raise NoConvergence(f"Newton did not reach {tol:g} in {max_iter} iterations (residual {r:.3g})")


def scalar_core(params: ModelParams, N: float) -> Callable[[float], float]:
    """h(x) = tanh(a0 + a1*x + a2*gamma_F*N*(1-x)/alpha1) - x. 근은 고정점의 x."""
    slope = params.a2 * params.gamma_F * N / params.alpha1

    def h(x: float) -> float:
        return math.tanh(params.a0 + params.a1 * x + slope * (1.0 - x)) - x

    return h


def _core_brackets(h: Callable[[float], float], grid: int) -> Tuple[List[float], List[Tuple[float, float]]]:
    xs = np.linspace(-1.0, 1.0, grid)
    signs = np.sign([h(float(x)) for x in xs])
    exact = [float(xs[i]) for i in range(grid) if signs[i] == 0.0]
    brackets = [
        (float(xs[i]), float(xs[i + 1]))
        for i in range(grid - 1)
        if signs[i] * signs[i + 1] < 0.0
    ]
    return exact, brackets


def _core_point(params: ModelParams, x: float, dims: Dimensionality, N: float) -> np.ndarray:
    pi_F = params.gamma_F * N * (1.0 - x) / params.alpha1
    if dims is Dimensionality.TWO_D:
        return np.array([x, pi_F])
    return np.array([x, pi_F, 0.0])


def _polish(
    params: ModelParams, x: float, dims: Dimensionality, N: float
) -> Tuple[np.ndarray, float]:
    f = lambda y: subsystem_rhs(params, y, dims, N)  # noqa: E731
    start = _core_point(params, x, dims, N)
    try:
        return damped_newton(f, _analytic_jacobian(params, dims, N), start)
    except NoConvergence:
        r = _residual_norm(f, start)
        if r < NEWTON_TOL:
            return start, r
        raise


def _check_fixed_point_dims(params: ModelParams, dims: Dimensionality) -> None:
    if dims is Dimensionality.FOUR_D:
        raise WrongDims("the 4D system has no finite fixed point in general; use 2d or 3d")
    _require_frozen_growth(params, "find_fixed_point")


def find_fixed_point(
    params: ModelParams,
    guess: SystemState,
    dims: Dimensionality,
    grid: int = DEFAULT_SCAN_GRID,
) -> FixedPoint:
    """감쇠 Newton으로 고정점 탐색. 실패 시 h(x)의 이분법으로 전환."""
    _check_fixed_point_dims(params, dims)
    N = guess.N
    f = lambda y: subsystem_rhs(params, y, dims, N)  # noqa: E731

    try:
        y, r = damped_newton(f, _analytic_jacobian(params, dims, N), reduced_vector(guess, dims))
        if abs(float(y[0])) <= 1.0:
            return FixedPoint(state=_state_from_reduced(y, dims, N), residual_norm=r, dimensionality=dims)
    except NoConvergence as exc:
        logger.info(f"🔁 Newton 실패, 이분법으로 전환: {exc}")

    h = scalar_core(params, N)
    exact, brackets = _core_brackets(h, grid)
    candidates = exact + [
        bisect(h, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200) for a, b in brackets
    ]
    if not candidates:
        raise NoConvergence("no sign change of the reduced core on [-1, 1]")

    x_star = min(candidates, key=lambda c: abs(c - guess.x))
    y, r = _polish(params, x_star, dims, N)
    return FixedPoint(state=_state_from_reduced(y, dims, N), residual_norm=r, dimensionality=dims)


def find_all_fixed_points(
    params: ModelParams,
    dims: Dimensionality,
    grid: int = DEFAULT_SCAN_GRID,
    N: float = 10.0,
) -> List[FixedPoint]:
    """[-1, 1] 격자 스캔 + 부호 변화마다 이분법 + Newton 보정. x 오름차순."""
    _check_fixed_point_dims(params, dims)
    if grid < 2:
        raise UsageError("grid must contain at least two points")

    h = scalar_core(params, N)
    exact, brackets = _core_brackets(h, grid)
    roots = exact + [
        bisect(h, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200) for a, b in brackets
    ]

    points: List[FixedPoint] = []
    for x in sorted(roots):
        y, r = _polish(params, x, dims, N)
        if any(abs(p.state.x - float(y[0])) < 1e-8 for p in points):
            continue
        points.append(
            FixedPoint(state=_state_from_reduced(y, dims, N), residual_norm=r, dimensionality=dims)
        )
    logger.info(f"📍 고정점 {len(points)}개 발견 (dims={dims.value}, grid={grid})")
    return sorted(points, key=lambda p: p.state.x)


# ============= Routh-Hurwitz =============


def _as_square(J: Sequence[Sequence[float]], n: int) -> np.ndarray:
    arr = np.asarray(J, dtype=float)
    if arr.shape != (n, n):
        raise WrongDims(f"expected a {n}x{n} matrix, got shape {arr.shape}")
    return arr


def routh_hurwitz_2d(J: Sequence[Sequence[float]]) -> RouthHurwitzVerdict:
    """stable <=> Det > 0 and Tr < 0."""
    m = _as_square(J, 2)
    det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    trace = float(m[0, 0] + m[1, 1])
    conditions = [
        RHCondition(name="Det>0", lhs=det, holds=det > 0.0),
        RHCondition(name="Tr<0", lhs=trace, holds=trace < 0.0),
    ]
    return RouthHurwitzVerdict(
        dims=2,
        trace=trace,
        det=det,
        conditions=conditions,
        stable=all(c.holds for c in conditions),
    )


def routh_hurwitz_3d(J: Sequence[Sequence[float]]) -> RouthHurwitzVerdict:
    """네 조건 Det<0, Tr<0, J1+J2+J3>0, -Tr*(J1+J2+J3)+Det>0.

    J1, J2, J3는 {2,3}, {1,3}, {1,2} 행/열의 주소행렬식.
    """
    m = _as_square(J, 3)
    trace = float(m[0, 0] + m[1, 1] + m[2, 2])
    j1 = float(m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
    j2 = float(m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0])
    j3 = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    det = float(
        m[0, 0] * j1
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )
    minor_sum = j1 + j2 + j3
    hurwitz = -trace * minor_sum + det

    conditions = [
        RHCondition(name="Det<0", lhs=det, holds=det < 0.0),
        RHCondition(name="Tr<0", lhs=trace, holds=trace < 0.0),
        RHCondition(name="J1+J2+J3>0", lhs=minor_sum, holds=minor_sum > 0.0),
        RHCondition(name="-Tr*(J1+J2+J3)+Det>0", lhs=hurwitz, holds=hurwitz > 0.0),
    ]
    stable = all(c.holds for c in conditions)

    # 표준형 l^3 + c2*l^2 + c1*l + c0 판정과 일치해야 한다
    c2, c1, c0 = -trace, minor_sum, -det
    if stable != (c2 > 0.0 and c0 > 0.0 and c2 * c1 > c0):
        raise VerdictMismatch(f"Routh-Hurwitz forms disagree for {m.tolist()}")

    return RouthHurwitzVerdict(
        dims=3,
        trace=trace,
        det=det,
        minors=[j1, j2, j3],
        conditions=conditions,
        stable=stable,
    )


# ============= Eigenvalues =============


def characteristic_coefficients(J: Sequence[Sequence[float]]) -> np.ndarray:
    """Faddeev-LeVerrier. 최고차항부터 [1, c_{n-1}, ..., c_0]."""
    m = np.asarray(J, dtype=float)
    n = m.shape[0]
    identity = np.eye(n)
    coeffs = [1.0]
    acc = np.zeros((n, n))
    for k in range(1, n + 1):
        acc = m @ acc + coeffs[-1] * identity
        coeffs.append(-float(np.trace(m @ acc)) / k)
    return np.array(coeffs)


def _durand_kerner_sweep(coeffs: np.ndarray, z: np.ndarray) -> float:
    """Weierstrass 갱신 한 번. 가장 큰 상대 이동량을 돌려준다."""
    n = z.shape[0]
    largest = 0.0
    for i in range(n):
        value = np.polyval(coeffs, z[i])
        if value == 0:
            continue
        denom = complex(1.0)
        for j in range(n):
            if j != i:
                gap = z[i] - z[j]
                denom *= gap if gap != 0 else complex(1e-300)
        update = value / denom
        z[i] -= update
        largest = max(largest, abs(update) / max(1.0, abs(z[i])))
    return largest


def _residual_ok(coeffs: np.ndarray, z: np.ndarray) -> bool:
    residual = np.abs(np.polyval(coeffs, z))
    scale = np.polyval(np.abs(coeffs), np.abs(z))
    return bool(np.all(residual <= ROOT_TOL * scale))


def _multiple_root(coeffs: np.ndarray, cluster: Sequence[complex]) -> Optional[complex]:
    """근 묶음을 m중근 하나로 본다. 검증에 실패하면 None."""
    m = len(cluster)
    center = complex(np.mean(cluster))
    if abs(center.imag) <= 1e-8 * max(1.0, abs(center)):
        center = complex(center.real, 0.0)

    # m중근은 (m-1)계 도함수의 단순근
    simple = np.polyder(coeffs, m - 1)
    slope = np.polyder(simple)
    for _ in range(MAX_NEWTON_ITER):
        d = complex(np.polyval(slope, center))
        if d == 0:
            break
        step = complex(np.polyval(simple, center)) / d
        center -= step
        if abs(step) <= 1e-16 * max(1.0, abs(center)):
            break
    if not cmath.isfinite(center):
        return None
    if abs(center.imag) <= 1e-8 * max(1.0, abs(center)):
        center = complex(center.real, 0.0)

    derivative = coeffs
    for _ in range(m):
        value = abs(complex(np.polyval(derivative, center)))
        if value > MULTIPLICITY_TOL * float(np.polyval(np.abs(derivative), abs(center))):
            return None
        derivative = np.polyder(derivative)
    return center


def _merge_clusters(coeffs: np.ndarray, roots: Sequence[complex]) -> List[complex]:
    # 중근 근처에서 Durand-Kerner는 eps^(1/m) 정도로 흩어진다
    remaining = [complex(z) for z in roots]
    merged: List[complex] = []
    while remaining:
        z = remaining.pop(0)
        near = sorted(
            (w for w in remaining if abs(w - z) <= CLUSTER_RADIUS * max(1.0, abs(z))),
            key=lambda w: abs(w - z),
        )
        # 큰 묶음부터 시도하고 실패하면 가장 먼 근을 뺀다
        for size in range(len(near), 0, -1):
            center = _multiple_root(coeffs, [z, *near[:size]])
            if center is not None:
                for w in near[:size]:
                    remaining.remove(w)
                merged.extend([center] * (size + 1))
                break
        else:
            merged.append(z)
    return merged


def _polynomial_roots(coeffs: np.ndarray) -> List[complex]:
    n = coeffs.shape[0] - 1
    radius = 1.0 + float(np.max(np.abs(coeffs[1:])))
    z = np.array([(0.4 + 0.9j) ** k for k in range(n)], dtype=complex) * radius

    # 잔차 기준을 통과한 뒤에도 이동량이 멈출 때까지 계속한다
    converged = False
    for _ in range(MAX_ROOT_ITER):
        moved = _durand_kerner_sweep(coeffs, z)
        if not np.all(np.isfinite(z)):
            converged = False
            break
        converged = _residual_ok(coeffs, z)
        if converged and moved <= ROOT_STALL:
            break
    if not converged:
        raise NoRootConvergence(f"characteristic roots did not converge for coefficients {coeffs.tolist()}")
    return _merge_clusters(coeffs, list(z))


def _pair_conjugates(roots: List[complex]) -> List[complex]:
    # 실계수 다항식: 켤레쌍은 같은 실수부를 갖도록 맞춘다
    remaining = list(roots)
    paired: List[complex] = []
    while remaining:
        z = remaining.pop(0)
        if z.imag == 0.0 or not remaining:
            paired.append(z)
            continue
        j = min(range(len(remaining)), key=lambda k: abs(remaining[k] - z.conjugate()))
        w = remaining[j]
        if abs(w - z.conjugate()) > 1e-6 * max(1.0, abs(z)):
            paired.append(z)
            continue
        remaining.pop(j)
        re, im = 0.5 * (z.real + w.real), 0.5 * (abs(z.imag) + abs(w.imag))
        paired.extend([complex(re, im), complex(re, -im)])
    return paired


def _sort_roots(roots: Sequence[complex]) -> List[complex]:
    cleaned = []
    for z in roots:
        z = complex(z)
        if abs(z.imag) <= 1e-12 * max(1.0, abs(z)):
            z = complex(z.real, 0.0)
        cleaned.append(z)
    return sorted(_pair_conjugates(cleaned), key=lambda z: (-z.real, -z.imag))


def eigenvalues_small(J: Sequence[Sequence[float]]) -> List[complex]:
    """n <= 4 행렬의 고유값 (실수부 내림차순)."""
    m = np.asarray(J, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 3, 4):
        raise WrongDims(f"eigenvalues_small supports 2x2..4x4 matrices, got shape {m.shape}")

    if m.shape[0] == 2:
        trace = m[0, 0] + m[1, 1]
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        root = cmath.sqrt(trace * trace - 4.0 * det)
        return _sort_roots([(trace + root) / 2.0, (trace - root) / 2.0])

    return _sort_roots(list(_polynomial_roots(characteristic_coefficients(m))))


def classify_eigenvalues(eigenvalues: Sequence[complex], margin: float = DEFAULT_MARGIN) -> Classification:
    max_real = max(z.real for z in eigenvalues)
    if max_real < -margin:
        return Classification.STABLE
    if max_real > margin:
        return Classification.UNSTABLE
    return Classification.MARGINAL


# ============= Closed-form reference values =============


def special_point_2d(params: ModelParams, N: float) -> Tuple[float, float]:
    """s=0, x=0 특수점의 (Det, Tr) 기호식."""
    det = -2.0 * params.v * params.alpha1 * (params.a1 - 1.0) + 2.0 * params.v * params.a2 * params.gamma_F * N
    trace = -params.alpha1 + 2.0 * params.v * (params.a1 - 1.0)
    return det, trace


def special_point_det_3d(params: ModelParams, N: float) -> float:
    """3D 특수점 Det의 게재된 표현식 값 (비교용, 수치 Det와 같다고 가정하지 않음)."""
    v, th, g = params.v, params.theta_E, params.gamma_F
    a1, al1, al2 = params.a1, params.alpha1, params.alpha2
    return (-al2 - 2.0 * v * N * th) * (-2.0 * v * al1 * (a1 - 1.0) + 2.0 * g * N * v) - 2.0 * v * (
        -2.0 * g * N**2 * th * v * th + al1 * th * (2.0 * v * N * (a1 - 1.0))
    )


def special_case_params(
    base: ModelParams,
    N: float = 10.0,
    a2: float = 1.0,
    a3: float = -1.0,
) -> Tuple[ModelParams, SystemState]:
    """a0 = -a2*gamma_F*N/alpha1 로 x=0에서 s=0이 되는 파라미터와 그 고정점."""
    pi_F = base.gamma_F * N / base.alpha1
    params = base.model_copy(
        update={"a0": -a2 * pi_F, "a2": a2, "a3": a3, "growth_policy": FixedGrowth(g_N=0.0)}
    )
    return params, SystemState(x=0.0, pi_F=pi_F, pi_E=0.0, N=N)


def laissez_faire_trace_det(params: ModelParams, x: float) -> Tuple[float, float, List[float]]:
    """a0=a2=a3=0 일 때 (Tr, Det, [J1, J2, J3]) 닫힌 형태."""
    s = params.a1 * x
    F = params.a1 * math.cosh(s) - math.cosh(s) - params.a1 * x * math.sinh(s)
    v, al1, al2 = params.v, params.alpha1, params.alpha2
    trace = 2.0 * v * F - al1 - al2
    det = 2.0 * al1 * al2 * v * F
    return trace, det, [al1 * al2, -2.0 * al2 * v * F, -2.0 * al1 * v * F]


def _is_special_point(params: ModelParams, state: SystemState) -> bool:
    return (
        abs(state.x) <= 1e-9
        and abs(state.pi_E) <= 1e-9
        and abs(opinion_index(params, state)) <= 1e-9
    )


# ============= Classification =============


def classify_equilibrium(
    params: ModelParams,
    fp: FixedPoint,
    margin: float = DEFAULT_MARGIN,
) -> StabilityReport:
    """야코비안 + 고유값 + RH 판정 + 분류. RH와 고유값 판정은 일치해야 한다."""
    dims = fp.dimensionality
    state = fp.state

    source = "finite_difference"
    if dims is Dimensionality.TWO_D and has_frozen_growth(params):
        jac = jacobian_analytic_2d(params, state)
        source = "analytic"
    elif dims is Dimensionality.THREE_D and has_frozen_growth(params):
        jac = jacobian_analytic_3d(params, state)
        source = "analytic"
    else:
        jac = jacobian_fd(params, state, dims)

    eigenvalues = eigenvalues_small(jac)
    classification = classify_eigenvalues(eigenvalues, margin)

    rh: Optional[RouthHurwitzVerdict] = None
    if dims is Dimensionality.TWO_D:
        rh = routh_hurwitz_2d(jac)
        if _is_special_point(params, state):
            ref_det, ref_trace = special_point_2d(params, state.N)
            rh = rh.model_copy(update={"reference_det": ref_det, "reference_trace": ref_trace})
    elif dims is Dimensionality.THREE_D:
        rh = routh_hurwitz_3d(jac)
        if _is_special_point(params, state):
            rh = rh.model_copy(update={"reference_det": special_point_det_3d(params, state.N)})

    if rh is not None and classification is not Classification.MARGINAL:
        if rh.stable != (classification is Classification.STABLE):
            raise VerdictMismatch(
                f"Routh-Hurwitz says stable={rh.stable} but eigenvalues say {classification.value}"
            )

    logger.info(
        f"🧭 평형점 분류: x*={state.x:.6g}, dims={dims.value}, {classification.value} "
        f"(max Re={max(z.real for z in eigenvalues):.3g})"
    )
    return StabilityReport(
        fixed_point=fp,
        jacobian=jac.tolist(),
        jacobian_source=source,
        eigenvalues=[EigenValue.from_complex(z) for z in eigenvalues],
        trace=float(np.trace(jac)),
        det=float(np.linalg.det(jac)) if rh is None else rh.det,
        rh=rh,
        classification=classification,
        margin=margin,
    )
