import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.core.dynamics import (
    aggregate_externality,
    aggregate_series,
    effective_growth,
    has_frozen_growth,
    opinion_index,
    rhs,
    subsystem_rhs,
    transition_probabilities,
    vector_field,
    x_rate,
    x_rate_closed_form,
)
from src.core.errors import GrowthOverflow, OpinionOverflow, WrongDims
from src.core.models import (
    OPINION_CAP_LIMIT,
    Dimensionality,
    FixedGrowth,
    ModelParams,
    RegulatedGrowth,
    SystemState,
)


class TestOpinion:
    """의견 지수와 전환 확률 테스트."""

    def test_opinion_index_is_linear(self):
        """s = a0 + a1*x + a2*pi_F + a3*pi_E."""
        params = ModelParams(a0=0.5, a1=1.5, a2=0.1, a3=-0.2)
        state = SystemState(x=0.4, pi_F=3.0, pi_E=2.0)
        assert opinion_index(params, state) == pytest.approx(0.5 + 0.6 + 0.3 - 0.4)

    def test_transition_probabilities(self):
        """p+ = v*e^s, p- = v*e^-s 이고 곱은 v^2."""
        params = ModelParams(v=0.6)
        p_plus, p_minus = transition_probabilities(params, 0.7)
        assert p_plus == pytest.approx(0.6 * math.exp(0.7))
        assert p_plus * p_minus == pytest.approx(0.36)

    def test_opinion_cap(self):
        """|s| > cap 이면 OpinionOverflow."""
        params = ModelParams(a0=600.0)
        with pytest.raises(OpinionOverflow):
            x_rate(params, SystemState())
        with pytest.raises(OpinionOverflow):
            transition_probabilities(ModelParams(opinion_cap=10.0), -10.5)

    def test_opinion_cap_upper_bound(self):
        """상한은 exp가 배정밀도 안에 있는 700 이하."""
        assert ModelParams(opinion_cap=OPINION_CAP_LIMIT).opinion_cap == 700.0
        with pytest.raises(ValidationError):
            ModelParams(opinion_cap=1000.0)


class TestXRate:
    """dx/dt 두 대수 형태 테스트."""

    def test_forms_agree_on_random_samples(self):
        """지수형과 tanh*cosh형이 일치."""
        rng = np.random.default_rng(7)
        for _ in range(500):
            v = float(rng.uniform(0.05, 2.0))
            x = float(rng.uniform(-1.0, 1.0))
            s = float(rng.uniform(-20.0, 20.0))
            params = ModelParams(a0=s, v=v)
            state = SystemState(x=x)
            scale = v * ((1.0 - x) * math.exp(s) + (1.0 + x) * math.exp(-s))
            diff = abs(x_rate(params, state) - x_rate_closed_form(params, state))
            assert diff <= 1e-10 * scale

    def test_forms_agree_at_reference_point(self):
        """v=0.6, x=0.3, s=0.7 에서 상대 1e-12."""
        params = ModelParams(a0=0.7, v=0.6)
        state = SystemState(x=0.3)
        assert x_rate(params, state) == pytest.approx(
            x_rate_closed_form(params, state), rel=1e-12
        )

    def test_boundaries_point_inward(self):
        """x=1에서 dx/dt <= 0, x=-1에서 dx/dt >= 0."""
        for s in (-3.0, 0.0, 3.0):
            params = ModelParams(a0=s)
            assert x_rate(params, SystemState(x=1.0)) <= 0.0
            assert x_rate(params, SystemState(x=-1.0)) >= 0.0

    def test_odd_symmetry_without_policy(self):
        """a0=a2=a3=0 이면 (x, pi_E) -> (-x, -pi_E) 에서 dx/dt 부호 반전."""
        rng = np.random.default_rng(11)
        for _ in range(200):
            params = ModelParams(a1=float(rng.uniform(0.0, 3.0)), v=float(rng.uniform(0.1, 1.0)))
            x = float(rng.uniform(-1.0, 1.0))
            pi_F = float(rng.uniform(0.0, 100.0))
            pi_E = float(rng.uniform(-50.0, 50.0))
            forward = x_rate(params, SystemState(x=x, pi_F=pi_F, pi_E=pi_E))
            mirrored = x_rate(params, SystemState(x=-x, pi_F=pi_F, pi_E=-pi_E))
            assert mirrored == pytest.approx(-forward, rel=1e-12, abs=1e-15)

    def test_zero_opinion_pulls_to_origin(self):
        """s=0 이면 dx/dt = -2v*x."""
        params = ModelParams(v=0.6)
        assert x_rate(params, SystemState(x=0.3)) == pytest.approx(-0.36)


class TestGrowth:
    """성장 정책과 외부효과 테스트."""

    def test_fixed_growth(self):
        """Fixed(g)는 상수."""
        params = ModelParams(growth_policy=FixedGrowth(g_N=0.1))
        assert effective_growth(params, SystemState(pi_F=100.0)) == 0.1
        assert not has_frozen_growth(params)
        assert has_frozen_growth(ModelParams())

    def test_regulated_growth_decays_with_externality(self):
        """g_eff = g_bar*exp(-Π), Π = k1*pi_F + k2*pi_E."""
        params = ModelParams(growth_policy=RegulatedGrowth(g_bar=0.1, k1=0.01, k2=0.02))
        state = SystemState(pi_F=50.0, pi_E=25.0)
        aggregate = aggregate_externality(params, state.pi_F, state.pi_E)
        assert aggregate == pytest.approx(1.0)
        assert effective_growth(params, state) == pytest.approx(0.1 * math.exp(-1.0))
        assert not has_frozen_growth(params)

    def test_regulated_growth_overflow(self):
        """큰 음의 외부효과로 exp(-Π)가 넘치면 GrowthOverflow."""
        params = ModelParams(growth_policy=RegulatedGrowth(g_bar=0.1, k1=0.01, k2=0.01))
        with pytest.raises(GrowthOverflow):
            effective_growth(params, SystemState(pi_E=-1e6))

    def test_aggregate_series_matches_scalar(self):
        """궤적 열 Π는 스칼라 Π와 같은 식."""
        params = ModelParams(growth_policy=FixedGrowth(g_N=0.1, k1=0.02, k2=0.03))
        states = np.array([[0.0, 10.0, 5.0, 10.0], [0.5, 3.0, -1.0, 11.0]])
        expected = [aggregate_externality(params, pi_F, pi_E) for pi_F, pi_E in states[:, 1:3]]
        assert aggregate_series(params, states).tolist() == pytest.approx(expected, rel=1e-15)


class TestVectorField:
    """4D 벡터장 및 축약계 테스트."""

    def test_pi_F_equation(self):
        """dpi_F/dt = gamma_F*N*(1-x) - alpha1*pi_F."""
        params = ModelParams()
        state = SystemState(x=0.2, pi_F=40.0, pi_E=0.0, N=10.0)
        derivative = vector_field(params, state)
        assert derivative.dpi_F_dt == pytest.approx(0.9 * 10.0 * 0.8 - 0.03 * 40.0)

    def test_pi_E_uses_same_call_rates(self):
        """dpi_E/dt = theta_E*(dN*(1+x) + dx*N) - alpha2*pi_E."""
        params = ModelParams(a0=0.3, growth_policy=FixedGrowth(g_N=0.1))
        state = SystemState(x=-0.2, pi_F=5.0, pi_E=3.0, N=12.0)
        d = vector_field(params, state)
        assert d.dN_dt == pytest.approx(1.2)
        expected = 0.2 * (d.dN_dt * 0.8 + d.dx_dt * 12.0) - 0.07 * 3.0
        assert d.dpi_E_dt == pytest.approx(expected, rel=1e-14)

    def test_frozen_growth_reduces_to_three_dims(self):
        """Fixed(0)에서 dN = 0 이고 dpi_E = theta_E*dx*N - alpha2*pi_E."""
        params = ModelParams(a0=0.5, a1=1.2, a2=0.01, a3=-0.02)
        state = SystemState(x=0.1, pi_F=20.0, pi_E=4.0, N=10.0)
        d = vector_field(params, state)
        assert d.dN_dt == 0.0
        assert d.dpi_E_dt == pytest.approx(0.2 * d.dx_dt * 10.0 - 0.07 * 4.0, rel=1e-14)

        reduced = subsystem_rhs(params, state.to_array()[:3], Dimensionality.THREE_D, N=10.0)
        assert np.allclose(reduced, d.to_array()[:3], rtol=0.0, atol=0.0)

    def test_array_and_model_paths_agree(self):
        """rhs(배열)와 vector_field(모델)가 동일."""
        params = ModelParams(a0=1.0, a1=1.5, a2=0.5, growth_policy=RegulatedGrowth(g_bar=0.1))
        state = SystemState(x=0.3, pi_F=2.0, pi_E=1.0, N=11.0)
        assert rhs(params, state.to_array()).tolist() == vector_field(params, state).to_array().tolist()

    def test_two_dim_subsystem_pins_pi_E(self):
        """2D 축약계는 pi_E = 0."""
        params = ModelParams(a0=0.2, a1=0.5, a2=0.01, a3=5.0)
        y = np.array([0.1, 3.0])
        reduced = subsystem_rhs(params, y, Dimensionality.TWO_D, N=10.0)
        full = vector_field(params, SystemState(x=0.1, pi_F=3.0, pi_E=0.0, N=10.0))
        assert reduced.tolist() == [full.dx_dt, full.dpi_F_dt]

    def test_subsystem_shape_checks(self):
        """길이 불일치와 N 누락은 WrongDims."""
        params = ModelParams()
        with pytest.raises(WrongDims):
            subsystem_rhs(params, np.zeros(3), Dimensionality.TWO_D, N=10.0)
        with pytest.raises(WrongDims):
            subsystem_rhs(params, np.zeros(3), Dimensionality.THREE_D)
