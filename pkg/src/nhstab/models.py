"""Exactly solvable two-level models and their closed-form solutions.

Both families share the tunneling Hamiltonian H_plus = -hbar*omega*sx.

* Model 1 ("non-Hermitian detuning"): Gamma = hbar*lambda*sz, reference
  state |e><e| = diag(1, 0).
* Model 2 ("complex tunneling element", omega -> omega + i*eta):
  Gamma = hbar*eta*sx, reference state (1/2)[[1, 1], [1, 1]].

Time in this module is the dimensionless tau = omega*t; parameters are
also exposed through their ratios lambda/omega and eta/omega.
Perturbations are Delta = [[d2, d1], [d1, -d2]] with arbitrary real d1, d2;
positivity of the perturbed state is not required.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import NHHamiltonian
from .errors import SingularDenominator, WrongDimension
from .qmatrix import IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z, DensityMatrix, as_array

TOL_DENOM = 1e-12


@dataclass(frozen=True)
class TunnelingDetuningModel:
    omega: float = 1.0
    lam: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")

    @classmethod
    def from_ratio(cls, lambda_tilde: float, omega: float = 1.0, hbar: float = 1.0):
        return cls(omega, lambda_tilde * omega, hbar)

    @property
    def lambda_tilde(self) -> float:
        return self.lam / self.omega


@dataclass(frozen=True)
class TunnelingComplexElementModel:
    omega: float = 1.0
    eta: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")

    @classmethod
    def from_ratio(cls, eta_tilde: float, omega: float = 1.0, hbar: float = 1.0):
        return cls(omega, eta_tilde * omega, hbar)

    @property
    def eta_tilde(self) -> float:
        return self.eta / self.omega


@dataclass(frozen=True)
class PerturbationParams:
    delta1: float = 0.0
    delta2: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.delta1) and math.isfinite(self.delta2)):
            raise ValueError("perturbation components must be finite")

    @property
    def p1(self) -> float:
        return 2 * self.delta1 + 1

    @property
    def p2(self) -> float:
        return 2 * self.delta2 + 1

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.delta2, self.delta1], [self.delta1, -self.delta2]], dtype=complex)


def model1_hamiltonian(m: TunnelingDetuningModel) -> NHHamiltonian:
    return NHHamiltonian(-m.hbar * m.omega * SIGMA_X, m.hbar * m.lam * SIGMA_Z, m.hbar)


def model2_hamiltonian(m: TunnelingComplexElementModel) -> NHHamiltonian:
    return NHHamiltonian(-m.hbar * m.omega * SIGMA_X, m.hbar * m.eta * SIGMA_X, m.hbar)


def model1_pure_state() -> DensityMatrix:
    return DensityMatrix(np.array([[1, 0], [0, 0]], dtype=complex))


def model2_pure_state() -> DensityMatrix:
    return DensityMatrix(np.full((2, 2), 0.5, dtype=complex))


def perturbed_initial(rho_p, p: PerturbationParams) -> DensityMatrix:
    rp = as_array(rho_p)
    if rp.shape[0] != 2:
        raise WrongDimension("the two-parameter perturbation is defined for dim = 2")
    return DensityMatrix(rp + p.matrix)


def _bloch_state(cx, cy, cz) -> DensityMatrix:
    return DensityMatrix(cx * SIGMA_X + cy * SIGMA_Y + cz * SIGMA_Z + 0.5 * IDENTITY_2)


def _sinhc(mu: complex, x: float) -> complex:
    """sinh(mu x) / mu, analytic through mu = 0."""
    z = mu * x
    if abs(z) < 1e-4:
        z2 = z * z
        return x * (1 + z2 / 6 + z2 * z2 / 120)
    return cmath.sinh(z) / mu


def model1_analytic(m: TunnelingDetuningModel, p: PerturbationParams, tau: float) -> DensityMatrix:
    """Closed-form rho(tau) for model 1 started from |e><e| + Delta.

    With mu = sqrt(lt^2 - 1) (lt = lambda/omega, complex when |lt| < 1)
    the state is (fx sx + fy sy + fz sz / 2) / F + I/2 where

        fx = d1 mu^2
        fy = sinh(mu tau) [mu p2 cosh(mu tau) - lt sinh(mu tau)]
        fz = mu [mu p2 cosh(2 mu tau) - lt sinh(2 mu tau)]
        F  = lt^2 cosh(2 mu tau) - p2 mu lt sinh(2 mu tau) - 1

    Numerators and F all carry a common factor mu^2; it is divided out
    analytically (using sinh(x)/x and lt^2 - 1 = mu^2) so that |lt| = 1
    needs no special branch.
    """
    lt = m.lambda_tilde
    mu = cmath.sqrt(complex(lt * lt - 1.0))
    p2 = p.p2
    c1 = cmath.cosh(mu * tau)
    c2 = cmath.cosh(2 * mu * tau)
    s1 = _sinhc(mu, tau)
    s2 = _sinhc(mu, 2 * tau)
    fx = p.delta1
    fy = s1 * (p2 * c1 - lt * s1)
    fz = p2 * c2 - lt * s2
    # (lt^2 cosh(2 mu tau) - 1) / mu^2 = c2 + 2 sinh(mu tau)^2 / mu^2
    big_f = c2 + 2 * s1 * s1 - p2 * lt * s2
    if abs(big_f) <= TOL_DENOM:
        raise SingularDenominator(f"F(tau) vanishes at tau={tau}")
    coeffs = np.array([fx / big_f, fy / big_f, fz / (2 * big_f)])
    if np.max(np.abs(coeffs.imag)) > 1e-12 * max(1.0, float(np.max(np.abs(coeffs)))):
        raise ArithmeticError("model 1 closed form produced a complex Bloch vector")
    cx, cy, cz = coeffs.real
    return _bloch_state(cx, cy, cz)


def model1_analytic_literal(m: TunnelingDetuningModel, p: PerturbationParams, tau: float) -> DensityMatrix:
    """Direct transcription of the closed form, without removing mu^2.

    Undefined at |lambda/omega| = 1; kept as an independent check of
    :func:`model1_analytic`.
    """
    lt = m.lambda_tilde
    mu = cmath.sqrt(complex(lt * lt - 1.0))
    p2 = p.p2
    sh, ch = cmath.sinh(mu * tau), cmath.cosh(mu * tau)
    sh2, ch2 = cmath.sinh(2 * mu * tau), cmath.cosh(2 * mu * tau)
    fx = p.delta1 * mu * mu
    fy = sh * (mu * p2 * ch - lt * sh)
    fz = mu * (mu * p2 * ch2 - lt * sh2)
    big_f = lt * lt * ch2 - p2 * mu * lt * sh2 - 1
    return _bloch_state((fx / big_f).real, (fy / big_f).real, (fz / (2 * big_f)).real)


def _model2_terms(eta_tilde: float, p: PerturbationParams, tau: float):
    """(gx, gy, gz, G) all scaled by a common positive factor.

    cosh(x) - p1 sinh(x) = -d1 e^x + (1 + d1) e^-x cancels catastrophically
    when written with cosh/sinh, so the exponential form is used, scaled by
    e^-|x| to avoid overflow.
    """
    d1, d2 = p.delta1, p.delta2
    x = 2 * eta_tilde * tau
    small = math.exp(-2 * abs(x))
    scale = math.exp(-abs(x))
    if x >= 0:
        big_g = -d1 + (1 + d1) * small
        gx = d1 + (1 + d1) * small
    else:
        big_g = -d1 * small + (1 + d1)
        gx = d1 * small + (1 + d1)
    gy = d2 * math.sin(2 * tau) * scale
    gz = d2 * math.cos(2 * tau) * scale
    return gx, gy, gz, big_g, scale


def model2_denominator(m: TunnelingComplexElementModel, p: PerturbationParams, tau: float) -> float:
    """G(tau) = cosh(2 et tau) - p1 sinh(2 et tau), et = eta/omega."""
    *_, big_g, scale = _model2_terms(m.eta_tilde, p, tau)
    return big_g / scale


def model2_analytic(m: TunnelingComplexElementModel, p: PerturbationParams, tau: float) -> DensityMatrix:
    """Closed-form rho(tau) for model 2 started from rho_p^(2) + Delta.

    rho = gx/(2G) sx + gy/G sy + gz/G sz + I/2 with
    gx = p1 cosh(2 et tau) - sinh(2 et tau), gy = d2 sin(2 tau),
    gz = d2 cos(2 tau), G = cosh(2 et tau) - p1 sinh(2 et tau).
    """
    gx, gy, gz, big_g, scale = _model2_terms(m.eta_tilde, p, tau)
    if abs(big_g) <= TOL_DENOM * scale:
        raise SingularDenominator(f"G(tau) vanishes at tau={tau}")
    return _bloch_state(gx / (2 * big_g), gy / big_g, gz / big_g)


def model2_singularity_time(m: TunnelingComplexElementModel, p: PerturbationParams) -> float | None:
    """First tau > 0 with G(tau) = 0, or None if G never vanishes.

    G = 0 means e^(4 et tau) = (1 + d1) / d1 = (p1 + 1) / (p1 - 1), i.e.
    tau* = artanh(1/p1) / (2 et). A positive root needs et > 0 with p1 > 1,
    or et < 0 with p1 < -1.
    """
    et, d1 = m.eta_tilde, p.delta1
    if et == 0 or d1 == 0 or d1 == -1:
        return None
    ratio = (1 + d1) / d1
    if ratio <= 0:
        return None
    tau = math.log(ratio) / (4 * et)
    return tau if tau > 0 else None
