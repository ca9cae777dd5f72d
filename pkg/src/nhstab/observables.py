"""Purity, linear entropy and the related operators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import NHHamiltonian, _check_dims
from .qmatrix import ComplexSquareMatrix, HermitianMatrix, _same_dim, as_array


@dataclass(frozen=True)
class PuritySnapshot:
    purity: float
    purity_rate: float

    @property
    def linear_entropy(self) -> float:
        return 1.0 - self.purity


def purity(rho) -> float:
    """tr(rho^2); the imaginary part must vanish to round-off."""
    r = as_array(rho)
    p = np.trace(r @ r)
    if abs(p.imag) > 1e-10 * max(1.0, abs(p.real)):
        raise ValueError(f"tr(rho^2) has imaginary part {p.imag:.3e}; rho is not Hermitian")
    return float(p.real)


def linear_entropy(rho) -> float:
    return 1.0 - purity(rho)


def purity_rate(H: NHHamiltonian, rho) -> float:
    """Exact dP/dt = (4/hbar) [<Gamma> P - tr(rho^2 Gamma)]."""
    r = as_array(rho)
    _check_dims(H, r)
    g = H.Gamma.data
    rho2 = r @ r
    mean_g = np.trace(r @ g).real
    return float((4.0 / H.hbar) * (mean_g * np.trace(rho2).real - np.trace(rho2 @ g).real))


def snapshot(H: NHHamiltonian, rho) -> PuritySnapshot:
    return PuritySnapshot(purity(rho), purity_rate(H, rho))


def nonpurity_operator(rho) -> HermitianMatrix:
    """M = rho - rho^2, whose trace is the linear entropy."""
    r = as_array(rho)
    return HermitianMatrix(r - r @ r, tol=1e-10)


def gamma_reduced(Gamma, A) -> ComplexSquareMatrix:
    """A^(Gamma) = Gamma A - tr(Gamma A) I."""
    g, a = as_array(Gamma), as_array(A)
    _same_dim(g, a)
    ga = g @ a
    return ComplexSquareMatrix(ga - np.trace(ga) * np.eye(g.shape[0]))
