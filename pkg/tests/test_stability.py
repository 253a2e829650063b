import math

import numpy as np
import pytest
from scipy.optimize import bisect

from src.core.dynamics import subsystem_rhs
from src.core.errors import NoConvergence, VerdictMismatch, WrongDims
from src.core.integrator import integrate
from src.core.models import (
    Classification,
    Dimensionality,
    FixedGrowth,
    FixedPoint,
    IntegrationConfig,
    ModelParams,
    SystemState,
)
from src.core.selfcheck import SCENARIO_ONE, random_spectrum_matrix
from src.core.stability import (
    characteristic_coefficients,
    classify_eigenvalues,
    classify_equilibrium,
    damped_newton,
    eigenvalues_small,
    find_all_fixed_points,
    find_fixed_point,
    jacobian_analytic_2d,
    jacobian_analytic_3d,
    jacobian_fd,
    laissez_faire_trace_det,
    routh_hurwitz_2d,
    routh_hurwitz_3d,
    special_case_params,
    special_point_2d,
)

# tanh(1.5x) = x 의 양의 근
X_BAR = bisect(lambda x: math.tanh(1.5 * x) - x, 0.1, 1.0, xtol=1e-15)


class TestJacobian:
    """야코비안 테스트."""

    def test_three_dim_structure(self):
        """셋째 행 = theta_E*N*(첫째 행) - alpha2*e3, J[1][2] = 0."""
        params = ModelParams(a0=0.3, a1=1.2, a2=0.02, a3=-0.01)
        state = SystemState(x=0.2, pi_F=10.0, pi_E=2.0, N=10.0)
        J = jacobian_analytic_3d(params, state)
        theta_N = params.theta_E * state.N
        assert J[2, 0] == theta_N * J[0, 0]
        assert J[2, 1] == theta_N * J[0, 1]
        assert J[2, 2] == theta_N * J[0, 2] - params.alpha2
        assert J[1, 2] == 0.0
        assert J[1, 0] == -params.gamma_F * state.N
        assert J[1, 1] == -params.alpha1

    def test_special_case_matrix(self):
        """특수점 (0, 300, 0)에서의 알려진 야코비안."""
        params, state = special_case_params(SCENARIO_ONE)
        J = jacobian_analytic_3d(params, state)
        expected = np.array([[0.6, 1.2, -1.2], [-9.0, -0.03, 0.0], [1.2, 2.4, -2.47]])
        assert np.allclose(J, expected, rtol=0.0, atol=1e-12)

    def test_analytic_matches_finite_difference(self):
        """중심 차분과 상대 오차 1e-6 이내."""
        rng = np.random.default_rng(11)
        for _ in range(20):
            params = ModelParams(
                a0=float(rng.uniform(-1.0, 1.0)),
                a1=float(rng.uniform(0.0, 2.0)),
                a2=float(rng.uniform(0.0, 0.1)),
                a3=float(rng.uniform(-0.1, 0.0)),
            )
            state = SystemState(
                x=float(rng.uniform(-0.9, 0.9)),
                pi_F=float(rng.uniform(0.0, 10.0)),
                pi_E=float(rng.uniform(-5.0, 5.0)),
                N=float(rng.uniform(1.0, 15.0)),
            )
            analytic = jacobian_analytic_3d(params, state)
            numeric = jacobian_fd(params, state, Dimensionality.THREE_D)
            assert np.all(np.abs(numeric - analytic) <= 1e-6 * np.maximum(np.abs(analytic), 1.0))

    def test_two_dim_matches_finite_difference(self):
        """2D 축약계 야코비안."""
        params = ModelParams(a0=0.1, a1=0.5, a2=0.01)
        state = SystemState(x=-0.3, pi_F=4.0, N=10.0)
        analytic = jacobian_analytic_2d(params, state)
        numeric = jacobian_fd(params, state, Dimensionality.TWO_D)
        assert analytic.shape == (2, 2)
        assert np.allclose(numeric, analytic, rtol=1e-6, atol=1e-6)

    def test_analytic_requires_frozen_growth(self):
        """성장하는 N에서는 해석적 3D 야코비안이 정의되지 않음."""
        params = ModelParams(growth_policy=FixedGrowth(g_N=0.1))
        with pytest.raises(WrongDims):
            jacobian_analytic_3d(params, SystemState())

    def test_four_dim_finite_difference(self):
        """4D는 유한 차분만."""
        params = ModelParams(a0=0.2, a1=1.0, growth_policy=FixedGrowth(g_N=0.1))
        J = jacobian_fd(params, SystemState(x=0.1, pi_F=1.0, pi_E=0.5, N=10.0), Dimensionality.FOUR_D)
        assert J.shape == (4, 4)
        assert J[3, 3] == pytest.approx(0.1, rel=1e-6)


class TestRouthHurwitz:
    """Routh-Hurwitz 판정 테스트."""

    def test_two_dim_special_point_symbols(self):
        """2D 특수점: Det = 10.818, Tr = -0.63."""
        base = ModelParams(v=0.6, alpha1=0.03, a1=0.5, gamma_F=0.9)
        params, state = special_case_params(base, N=10.0, a2=1.0, a3=0.0)
        det, trace = special_point_2d(params, 10.0)
        assert det == pytest.approx(10.818)
        assert trace == pytest.approx(-0.63)

        verdict = routh_hurwitz_2d(jacobian_analytic_2d(params, state))
        assert verdict.det == pytest.approx(det, abs=1e-12)
        assert verdict.trace == pytest.approx(trace, abs=1e-12)
        assert verdict.stable

    def test_three_dim_special_point(self):
        """3D 특수점: Det = -0.75474, Tr = -1.9, 안정."""
        params, state = special_case_params(SCENARIO_ONE)
        verdict = routh_hurwitz_3d(jacobian_analytic_3d(params, state))
        assert verdict.det == pytest.approx(-0.75474, abs=1e-9)
        assert verdict.trace == pytest.approx(-1.9, abs=1e-12)
        assert verdict.minors == pytest.approx([0.0741, -0.042, 10.782], abs=1e-9)
        assert [c.name for c in verdict.conditions] == [
            "Det<0",
            "Tr<0",
            "J1+J2+J3>0",
            "-Tr*(J1+J2+J3)+Det>0",
        ]
        assert verdict.stable

    def test_agrees_with_constructed_spectra(self):
        """알려진 스펙트럼 행렬 200개에서 판정이 일치."""
        rng = np.random.default_rng(3)
        for _ in range(200):
            matrix, spectrum = random_spectrum_matrix(rng)
            expected = bool(np.all(spectrum.real < 0.0))
            assert routh_hurwitz_3d(matrix).stable == expected
            assert bool(np.all(np.linalg.eigvals(matrix).real < 0.0)) == expected

    def test_laissez_faire_closed_form(self):
        """a0=a2=a3=0 의 Tr, Det, 주소행렬식 닫힌 형태."""
        params = ModelParams(a1=1.5, growth_policy=FixedGrowth(g_N=0.0))
        state = SystemState(x=X_BAR, pi_F=300.0 * (1.0 - X_BAR), pi_E=0.0, N=10.0)
        verdict = routh_hurwitz_3d(jacobian_analytic_3d(params, state))
        trace, det, minors = laissez_faire_trace_det(params, X_BAR)
        assert verdict.trace == pytest.approx(trace, rel=1e-10)
        assert verdict.det == pytest.approx(det, rel=1e-8)
        assert verdict.minors == pytest.approx(minors, rel=1e-8, abs=1e-12)

    def test_wrong_shape(self):
        """크기가 다른 행렬은 WrongDims."""
        with pytest.raises(WrongDims):
            routh_hurwitz_3d(np.eye(2))


class TestEigenvalues:
    """고유값 테스트."""

    def test_characteristic_coefficients(self):
        """대각 행렬의 특성다항식."""
        coeffs = characteristic_coefficients(np.diag([1.0, 2.0, 3.0]))
        assert coeffs.tolist() == pytest.approx([1.0, -6.0, 11.0, -6.0])

    def test_matches_numpy(self):
        """독립적인 numpy 고유값과 일치."""
        rng = np.random.default_rng(5)
        for n in (2, 3, 4):
            for _ in range(25):
                matrix = rng.normal(size=(n, n))
                ours = np.array(eigenvalues_small(matrix))
                reference = np.linalg.eigvals(matrix)
                for z in reference:
                    assert np.min(np.abs(ours - z)) < 1e-6 * max(1.0, abs(z))

    def test_sorted_by_real_part(self):
        """실수부 내림차순, 켤레쌍은 허수부 내림차순."""
        matrix = np.array([[0.0, 2.0, 0.0], [-2.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
        values = eigenvalues_small(matrix)
        assert values[0] == pytest.approx(complex(0.0, 2.0), abs=1e-9)
        assert values[1] == pytest.approx(complex(0.0, -2.0), abs=1e-9)
        assert values[2] == pytest.approx(-1.0, abs=1e-9)

    @pytest.mark.parametrize("n", [3, 4])
    def test_repeated_real_root_is_exact(self, n):
        """-I 행렬의 n중근은 정확히 -1 (허수부 없음)."""
        values = eigenvalues_small(-np.eye(n))
        assert len(values) == n
        for z in values:
            assert z.real == pytest.approx(-1.0, abs=1e-12)
            assert z.imag == 0.0

    def test_repeated_root_in_similar_matrix(self):
        """P*diag(-1, -1, -2)*P^-1 의 중근도 실수로 복원."""
        P = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0]])
        matrix = P @ np.diag([-1.0, -1.0, -2.0]) @ np.linalg.inv(P)
        values = eigenvalues_small(matrix)
        assert [z.imag for z in values] == [0.0, 0.0, 0.0]
        assert [z.real for z in values] == pytest.approx([-1.0, -1.0, -2.0], abs=1e-10)

    def test_repeated_conjugate_pair(self):
        """회전 블록 두 개: +i, +i, -i, -i."""
        block = np.array([[0.0, 1.0], [-1.0, 0.0]])
        matrix = np.block([[block, np.zeros((2, 2))], [np.zeros((2, 2)), block]])
        values = eigenvalues_small(matrix)
        expected = [1j, 1j, -1j, -1j]
        for z, w in zip(values, expected):
            assert abs(z - w) < 1e-12

    def test_unsupported_size(self):
        """5x5는 WrongDims."""
        with pytest.raises(WrongDims):
            eigenvalues_small(np.eye(5))

    def test_classification_margin(self):
        """|max Re| <= margin 이면 Marginal."""
        assert classify_eigenvalues([complex(-0.1, 0.0), complex(-2.0, 0.0)]) is Classification.STABLE
        assert classify_eigenvalues([complex(1e-12, 1.0)]) is Classification.MARGINAL
        assert classify_eigenvalues([complex(0.2, 0.0), complex(-5.0, 0.0)]) is Classification.UNSTABLE


class TestFixedPoints:
    """고정점 탐색 테스트."""

    def test_damped_newton_on_scalar_system(self):
        """y^3 = 8 의 근."""
        root, residual = damped_newton(
            lambda y: np.array([y[0] ** 3 - 8.0]),
            lambda y: np.array([[3.0 * y[0] ** 2]]),
            np.array([5.0]),
        )
        assert root[0] == pytest.approx(2.0, abs=1e-10)
        assert residual < 1e-10

    def test_damped_newton_singular(self):
        """특이 야코비안은 NoConvergence."""
        with pytest.raises(NoConvergence):
            damped_newton(
                lambda y: np.array([y[0] ** 2 + 1.0]),
                lambda y: np.array([[0.0]]),
                np.array([0.0]),
            )

    def test_special_case_fixed_point(self):
        """근처 추정값에서 (0, 300, 0)으로 수렴."""
        params, _ = special_case_params(SCENARIO_ONE)
        guess = SystemState(x=0.05, pi_F=290.0, pi_E=0.0, N=10.0)
        fp = find_fixed_point(params, guess, Dimensionality.THREE_D)
        assert fp.state.x == pytest.approx(0.0, abs=1e-9)
        assert fp.state.pi_F == pytest.approx(300.0, abs=1e-6)
        assert fp.state.pi_E == pytest.approx(0.0, abs=1e-9)
        assert fp.residual_norm < 1e-10

    def test_special_case_is_stationary_under_integration(self):
        """고정점에서 [0, 100] 적분 시 이동 < 1e-6."""
        params, state = special_case_params(SCENARIO_ONE)
        config = IntegrationConfig(t0=0.0, t_end=100.0, dt=0.01)
        trajectory = integrate(params, state, config)
        drift = np.max(np.abs(trajectory.states - state.to_array()))
        assert drift < 1e-6

    def test_weak_conformity_single_equilibrium(self):
        """a1 < 1 이면 x* = 0 하나, 안정."""
        params = ModelParams(a1=0.5)
        points = find_all_fixed_points(params, Dimensionality.THREE_D)
        assert len(points) == 1
        assert points[0].state.x == pytest.approx(0.0, abs=1e-10)
        assert points[0].state.pi_F == pytest.approx(300.0, abs=1e-6)
        report = classify_equilibrium(params, points[0])
        assert report.classification is Classification.STABLE

    def test_strong_conformity_three_equilibria(self):
        """a1 > 1 이면 -x̄, 0, +x̄. 0은 불안정, ±x̄는 안정."""
        params = ModelParams(a1=1.5)
        points = find_all_fixed_points(params, Dimensionality.THREE_D)
        xs = [p.state.x for p in points]
        assert xs == pytest.approx([-X_BAR, 0.0, X_BAR], abs=1e-9)

        classes = [classify_equilibrium(params, p).classification for p in points]
        assert classes == [Classification.STABLE, Classification.UNSTABLE, Classification.STABLE]

    def test_two_dim_fixed_points(self):
        """2D 축약계도 같은 x*."""
        params = ModelParams(a1=1.5)
        points = find_all_fixed_points(params, Dimensionality.TWO_D)
        assert len(points) == 3
        assert all(p.state.pi_E == 0.0 for p in points)
        for p in points:
            y = np.array([p.state.x, p.state.pi_F])
            assert np.linalg.norm(subsystem_rhs(params, y, Dimensionality.TWO_D, N=10.0)) < 1e-10

    def test_four_dim_and_growing_fleet_rejected(self):
        """4D 또는 성장하는 N은 WrongDims."""
        with pytest.raises(WrongDims):
            find_fixed_point(ModelParams(), SystemState(), Dimensionality.FOUR_D)
        with pytest.raises(WrongDims):
            find_all_fixed_points(
                ModelParams(growth_policy=FixedGrowth(g_N=0.1)), Dimensionality.THREE_D
            )


class TestClassification:
    """평형점 분류 보고서 테스트."""

    def test_special_point_report(self):
        """특수점 보고서: 해석적 야코비안, RH 안정, 기준 Det 포함."""
        params, state = special_case_params(SCENARIO_ONE)
        fp = FixedPoint(state=state, residual_norm=0.0, dimensionality=Dimensionality.THREE_D)
        report = classify_equilibrium(params, fp)
        assert report.jacobian_source == "analytic"
        assert report.classification is Classification.STABLE
        assert report.rh is not None and report.rh.stable
        assert report.rh.reference_det is not None
        assert report.trace == pytest.approx(-1.9)
        assert max(e.real for e in report.eigenvalues) < 0.0

    def test_growing_fleet_uses_finite_difference(self):
        """성장 정책이 있으면 4D 유한 차분, RH 없음."""
        params = ModelParams(a1=0.5, growth_policy=FixedGrowth(g_N=0.1))
        fp = FixedPoint(
            state=SystemState(x=0.0, pi_F=300.0, pi_E=0.0, N=10.0),
            residual_norm=0.0,
            dimensionality=Dimensionality.FOUR_D,
        )
        report = classify_equilibrium(params, fp)
        assert report.jacobian_source == "finite_difference"
        assert report.rh is None
        assert len(report.eigenvalues) == 4
        assert report.classification is Classification.UNSTABLE

    def test_verdict_mismatch_is_exported(self):
        """판정 불일치 예외는 NumericalError 계열."""
        assert VerdictMismatch("x").exit_code == 2
