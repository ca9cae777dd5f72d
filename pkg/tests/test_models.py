import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from nhstab.errors import SingularDenominator, WrongDimension
from nhstab.models import (
    PerturbationParams,
    TunnelingComplexElementModel,
    TunnelingDetuningModel,
    model1_analytic,
    model1_analytic_literal,
    model1_hamiltonian,
    model1_pure_state,
    model2_analytic,
    model2_denominator,
    model2_hamiltonian,
    model2_pure_state,
    model2_singularity_time,
    perturbed_initial,
)
from nhstab.observables import linear_entropy, purity
from nhstab.qmatrix import SIGMA_X, SIGMA_Y, SIGMA_Z

DELTAS = (-0.02, -0.01, 0.0, 0.01, 0.02)


def omega_oracle(H, rho0, taus, omega=1.0):
    """Integrate the linear Omega equation with scipy and normalize."""
    a = -(1j * H.H_plus.data + H.Gamma.data) / H.hbar
    d = a.shape[0]

    def f(t, y):
        om = y.reshape(d, d)
        return (a @ om + om @ a.conj().T).ravel()

    sol = solve_ivp(f, (0, taus[-1] / omega), np.asarray(rho0, dtype=complex).ravel(), method="DOP853",
                    t_eval=np.asarray(taus) / omega, rtol=1e-13, atol=1e-15)
    out = []
    for y in sol.y.T:
        om = y.reshape(d, d)
        out.append(om / np.trace(om))
    return out


def bisect(f, a, b):
    fa = f(a)
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


class TestParameters:
    def test_ratios(self):
        m = TunnelingDetuningModel.from_ratio(0.5, omega=2.0)
        assert m.lam == 1.0 and m.lambda_tilde == 0.5
        m2 = TunnelingComplexElementModel.from_ratio(-2.0, omega=0.5)
        assert m2.eta == -1.0 and m2.eta_tilde == -2.0

    @pytest.mark.parametrize("cls", [TunnelingDetuningModel, TunnelingComplexElementModel])
    def test_invalid(self, cls):
        with pytest.raises(ValueError):
            cls(omega=0.0)
        with pytest.raises(ValueError):
            cls(hbar=-1.0)

    def test_perturbation(self):
        p = PerturbationParams(0.01, -0.02)
        assert p.p1 == pytest.approx(1.02) and p.p2 == pytest.approx(0.96)
        assert np.array_equal(p.matrix, [[-0.02, 0.01], [0.01, 0.02]])
        with pytest.raises(ValueError):
            PerturbationParams(float("inf"), 0)


class TestHamiltonians:
    def test_model1(self):
        H = model1_hamiltonian(TunnelingDetuningModel(1.0, 0.5))
        assert np.allclose(H.H_plus.data, [[0, -1], [-1, 0]])
        assert np.allclose(H.Gamma.data, np.diag([0.5, -0.5]))
        assert model1_hamiltonian(TunnelingDetuningModel(1.0, 0.0)).is_hermitian
        assert np.allclose(model1_hamiltonian(TunnelingDetuningModel(1.0, -2.0)).Gamma.data, np.diag([-2, 2]))

    def test_model2(self):
        assert np.allclose(model2_hamiltonian(TunnelingComplexElementModel(1.0, 2.0)).Gamma.data, 2 * SIGMA_X)
        assert model2_hamiltonian(TunnelingComplexElementModel(1.0, 0.0)).is_hermitian
        assert np.allclose(model2_hamiltonian(TunnelingComplexElementModel(1.0, -2.0)).Gamma.data, -2 * SIGMA_X)

    def test_hbar_scaling(self):
        H = model1_hamiltonian(TunnelingDetuningModel(1.5, 0.3, hbar=2.0))
        assert np.allclose(H.H_plus.data, -3.0 * SIGMA_X)
        assert np.allclose(H.Gamma.data, 0.6 * SIGMA_Z)


class TestPureStates:
    def test_model1(self):
        rp = model1_pure_state()
        assert rp.is_pure()
        assert purity(rp) == 1.0
        H = model1_hamiltonian(TunnelingDetuningModel(1.0, 0.7))
        assert np.trace(rp.data @ H.Gamma.data).real == pytest.approx(0.7)

    def test_model2(self):
        rp = model2_pure_state()
        assert rp.is_pure()
        assert np.trace(rp.data @ SIGMA_X).real == pytest.approx(1.0)
        H = model2_hamiltonian(TunnelingComplexElementModel(1.0, -1.3))
        assert np.trace(rp.data @ H.Gamma.data).real == pytest.approx(-1.3)

    def test_perturbed_initial(self):
        rp = model1_pure_state()
        assert perturbed_initial(rp, PerturbationParams()) == rp
        s0 = linear_entropy(perturbed_initial(rp, PerturbationParams(0.01, 0.0)))
        assert s0 == pytest.approx(-2e-4, abs=1e-16)
        r = perturbed_initial(model2_pure_state(), PerturbationParams(-0.02, 0.01))
        assert np.allclose(r.data, [[0.51, 0.48], [0.48, 0.49]])
        with pytest.raises(WrongDimension):
            perturbed_initial(np.eye(3) / 3, PerturbationParams())


class TestModel1Analytic:
    @pytest.mark.parametrize("lt", [0.5, 2.0, -0.5, -2.0, 1.0, -1.0, 0.0])
    def test_initial_condition(self, lt):
        p = PerturbationParams(0.01, -0.02)
        m = TunnelingDetuningModel.from_ratio(lt)
        assert np.allclose(model1_analytic(m, p, 0.0).data, model1_pure_state().data + p.matrix, atol=1e-15)

    @pytest.mark.parametrize("lt", [0.5, 2.0, -0.5, -2.0, 1.0, -1.0, 0.3, 3.0])
    @pytest.mark.parametrize("d2", [-0.02, 0.0, 0.02])
    def test_against_integration_oracle(self, lt, d2):
        p = PerturbationParams(0.01, d2)
        m = TunnelingDetuningModel.from_ratio(lt)
        H = model1_hamiltonian(m)
        taus = np.linspace(0, 5, 51)
        ref = omega_oracle(H, model1_pure_state().data + p.matrix, taus)
        err = max(np.max(np.abs(model1_analytic(m, p, t).data - r)) for t, r in zip(taus, ref))
        assert err < 1e-10

    @pytest.mark.parametrize("lt", [0.5, 2.0, -0.5, -2.0])
    def test_literal_transcription(self, lt):
        p = PerturbationParams(0.01, 0.02)
        m = TunnelingDetuningModel.from_ratio(lt)
        for t in np.linspace(0, 5, 11):
            assert np.allclose(model1_analytic(m, p, t).data, model1_analytic_literal(m, p, t).data, atol=1e-13)

    def test_branch_continuity(self):
        p = PerturbationParams(0.01, 0.01)
        for t in (0.5, 2.0, 5.0):
            lo = model1_analytic(TunnelingDetuningModel.from_ratio(1 - 1e-6), p, t).data
            hi = model1_analytic(TunnelingDetuningModel.from_ratio(1 + 1e-6), p, t).data
            mid = model1_analytic(TunnelingDetuningModel.from_ratio(1.0), p, t).data
            assert np.max(np.abs(lo - hi)) < 1e-4
            assert np.max(np.abs(lo - mid)) < 1e-4

    def test_asymptotic_limit(self):
        m = TunnelingDetuningModel.from_ratio(-2.0)
        rho = model1_analytic(m, PerturbationParams(0.01, 0.01), 30.0).data
        expected = np.eye(2) / 2 + SIGMA_Y / 4 + np.sqrt(3) / 4 * SIGMA_Z
        assert np.allclose(rho, expected, atol=1e-12)
        assert purity(rho) == pytest.approx(1.0, abs=1e-12)

    def test_oscillation_period(self):
        m = TunnelingDetuningModel.from_ratio(0.5)
        p = PerturbationParams(0.01, 0.0)
        period = math.pi / math.sqrt(1 - 0.25)
        assert period == pytest.approx(3.6276, abs=1e-4)
        for t in np.linspace(0, 4, 9):
            a = linear_entropy(model1_analytic(m, p, t))
            b = linear_entropy(model1_analytic(m, p, t + period))
            assert a == pytest.approx(b, abs=1e-14)

    @settings(max_examples=100)
    @given(d1=st.floats(-0.05, 0.05), d2=st.floats(-0.05, 0.05))
    def test_initial_purity(self, d1, d2):
        p = PerturbationParams(d1, d2)
        s = linear_entropy(model1_analytic(TunnelingDetuningModel.from_ratio(2.0), p, 0.0))
        assert s == pytest.approx(-2 * (d1**2 + d2**2 + d2), abs=1e-12)

    def test_singular_denominator(self):
        # at lt = 1 the reduced denominator is 1 + 2 tau^2 - 2 p2 tau; p2 = 2 gives a root
        m = TunnelingDetuningModel.from_ratio(1.0)
        p = PerturbationParams(0.0, 0.5)
        with pytest.raises(SingularDenominator):
            model1_analytic(m, p, (2 - math.sqrt(2)) / 2)


class TestModel2Analytic:
    @pytest.mark.parametrize("et", [-2.0, 2.0, 0.0])
    def test_initial_condition(self, et):
        p = PerturbationParams(-0.02, 0.01)
        m = TunnelingComplexElementModel.from_ratio(et)
        assert np.allclose(model2_analytic(m, p, 0.0).data, model2_pure_state().data + p.matrix, atol=1e-15)

    @pytest.mark.parametrize("et", [-2.0, 2.0, 0.5])
    @pytest.mark.parametrize("d1", DELTAS)
    def test_against_integration_oracle(self, et, d1):
        p = PerturbationParams(d1, 0.01)
        m = TunnelingComplexElementModel.from_ratio(et)
        ts = model2_singularity_time(m, p)
        t_end = min(2.0, ts - 0.05) if ts else 2.0
        taus = np.linspace(0, t_end, 41)
        ref = omega_oracle(model2_hamiltonian(m), model2_pure_state().data + p.matrix, taus)
        for t, r in zip(taus, ref):
            got = model2_analytic(m, p, t).data
            assert np.max(np.abs(got - r)) <= 1e-9 * max(1.0, np.max(np.abs(r)))

    def test_suppression(self):
        m = TunnelingComplexElementModel.from_ratio(-2.0)
        for d1 in DELTAS:
            rho = model2_analytic(m, PerturbationParams(d1, 0.01), 10.0)
            assert np.allclose(rho.data, model2_pure_state().data, atol=1e-12)
            assert abs(linear_entropy(rho)) < 1e-12

    @settings(max_examples=100)
    @given(d1=st.floats(-0.05, 0.05), d2=st.floats(-0.05, 0.05))
    def test_initial_purity(self, d1, d2):
        p = PerturbationParams(d1, d2)
        s = linear_entropy(model2_analytic(TunnelingComplexElementModel.from_ratio(2.0), p, 0.0))
        assert s == pytest.approx(-2 * (d1**2 + d2**2 + d1), abs=1e-12)

    def test_denominator(self):
        m = TunnelingComplexElementModel.from_ratio(2.0)
        p = PerturbationParams(0.01, 0.01)
        for t in (0.0, 0.3, 1.0):
            assert model2_denominator(m, p, t) == pytest.approx(np.cosh(4 * t) - 1.02 * np.sinh(4 * t), rel=1e-10)

    def test_singularity_raises(self):
        m = TunnelingComplexElementModel.from_ratio(2.0)
        p = PerturbationParams(0.01, 0.01)
        with pytest.raises(SingularDenominator):
            model2_analytic(m, p, model2_singularity_time(m, p))


class TestSingularityTime:
    def test_fig2_value(self):
        m = TunnelingComplexElementModel.from_ratio(2.0)
        p = PerturbationParams(0.01, 0.01)
        t = model2_singularity_time(m, p)
        root = bisect(lambda x: np.cosh(4 * x) - 1.02 * np.sinh(4 * x), 0.1, 1.0)
        assert t == pytest.approx(root, abs=1e-12)
        assert t == pytest.approx(0.57689, abs=1e-5)

    def test_absent(self):
        assert model2_singularity_time(TunnelingComplexElementModel.from_ratio(-2.0), PerturbationParams(0.01, 0)) is None
        assert model2_singularity_time(TunnelingComplexElementModel.from_ratio(2.0), PerturbationParams(0.0, 0)) is None
        assert model2_singularity_time(TunnelingComplexElementModel.from_ratio(2.0), PerturbationParams(-0.01, 0)) is None
        assert model2_singularity_time(TunnelingComplexElementModel.from_ratio(0.0), PerturbationParams(0.01, 0)) is None

    @settings(max_examples=100)
    @given(et=st.floats(-3, 3).filter(lambda x: abs(x) > 0.05), d1=st.floats(-2.0, 2.0).filter(lambda x: abs(x) > 1e-3))
    def test_root_property(self, et, d1):
        m = TunnelingComplexElementModel.from_ratio(et)
        p = PerturbationParams(d1, 0.0)
        t = model2_singularity_time(m, p)
        if t is None:
            grid = np.linspace(0, 20, 2001)
            vals = [model2_denominator(m, p, x) for x in grid]
            assert all(v > 0 for v in vals) or all(v < 0 for v in vals[1:])
        else:
            assert t > 0
            scale = math.exp(2 * abs(et) * t)
            assert abs(model2_denominator(m, p, t)) <= 1e-9 * scale
