"""Stability of pure states against purity-changing ("mixing") fluctuations.

The state is split as rho = rho_p + Delta around a pure reference rho_p.
The exact (nonlinear) right-hand sides for Delta, for the non-purity
operator M = Delta - {rho_p, Delta} - Delta^2 and for the linear entropy
S_L = tr M are provided together with their first-order linearizations.

The linear map delta_rho -> d(delta_M)/dt vanishes on variations tangent to
the manifold of pure states, so it factors through delta_M. Its matrix in
coordinates of delta_M (a real space of dimension (dim - 1)^2) is the
characteristic matrix; the signs of its eigenvalues' real parts decide
local stability.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dynamics import NHHamiltonian, _check_dims
from .errors import NonFiniteInput, NotPureReference, SingularLyapunov, WrongDimension
from .qmatrix import (
    DensityMatrix,
    HermitianMatrix,
    VariationMatrix,
    as_array,
    traceless_hermitian_basis,
)

TOL_PURE = 1e-10
TOL_MARGIN = 1e-9


def _anti(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def _comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def _reduced(g: np.ndarray, a: np.ndarray) -> np.ndarray:
    ga = g @ a
    return ga - np.trace(ga) * np.eye(g.shape[0])


def _require_pure(rho_p: np.ndarray) -> None:
    dev = float(np.max(np.abs(rho_p @ rho_p - rho_p)))
    if dev > TOL_PURE:
        raise NotPureReference(f"reference state is not idempotent: max|rho^2 - rho| = {dev:.3e}")


@dataclass(frozen=True)
class PureReference:
    """Pure state rho_p and <Gamma>_p = tr(rho_p Gamma)."""

    rho_p: DensityMatrix
    gamma_mean_p: float

    def __post_init__(self):
        if not isinstance(self.rho_p, DensityMatrix):
            object.__setattr__(self, "rho_p", DensityMatrix(self.rho_p))
        _require_pure(self.rho_p.data)

    @classmethod
    def for_hamiltonian(cls, rho_p, H: NHHamiltonian) -> PureReference:
        rp = rho_p if isinstance(rho_p, DensityMatrix) else DensityMatrix(rho_p)
        _check_dims(H, rp.data)
        _require_pure(rp.data)
        return cls(rp, float(np.trace(rp.data @ H.Gamma.data).real))

    @property
    def dim(self) -> int:
        return self.rho_p.dim


def decompose_state(rho, rho_p) -> VariationMatrix:
    r, rp = as_array(rho), as_array(rho_p)
    _require_pure(rp)
    return VariationMatrix(r - rp)


def _parts(H: NHHamiltonian, ref: PureReference, delta):
    d = as_array(delta)
    _check_dims(H, d)
    _check_dims(H, ref.rho_p.data)
    return H.H_plus.data, H.Gamma.data, H.hbar, ref.rho_p.data, ref.gamma_mean_p, d


def variation_rhs(H: NHHamiltonian, ref: PureReference, Delta) -> VariationMatrix:
    """Exact dDelta/dt for a reference that follows its own pure trajectory."""
    hp, g, hbar, rp, gp, d = _parts(H, ref, Delta)
    gd = np.trace(d @ g).real
    out = -1j * _comm(hp, d) - _anti(g, d) + 2 * gd * rp + 2 * (gp + gd) * d
    return VariationMatrix(out / hbar)


def nonpurity_from_variation(rho_p, Delta) -> np.ndarray:
    """M = Delta - {rho_p, Delta} - Delta^2 (valid for idempotent rho_p)."""
    rp, d = as_array(rho_p), as_array(Delta)
    return d - _anti(rp, d) - d @ d


def nonpurity_rhs(H: NHHamiltonian, ref: PureReference, Delta) -> HermitianMatrix:
    """Exact dM/dt expressed through rho_p and Delta."""
    hp, g, hbar, rp, gp, d = _parts(H, ref, Delta)
    gd = np.trace(d @ g).real
    m = nonpurity_from_variation(rp, d)
    out = (
        -1j * _comm(hp, m)
        - _anti(g, m)
        + 4 * (gp + gd) * m
        + 2 * ((rp + d) @ _reduced(g, d) + d @ _reduced(g, rp))
    )
    return HermitianMatrix(out / hbar, tol=1e-10)


def entropy_rate(H: NHHamiltonian, ref: PureReference, Delta) -> float:
    """dS_L/dt = (4/hbar) [(<G>_p + <G>_Delta) S_L - tr(Gamma M)]."""
    hp, g, hbar, rp, gp, d = _parts(H, ref, Delta)
    gd = np.trace(d @ g).real
    m = nonpurity_from_variation(rp, d)
    s_l = np.trace(m).real
    return float((4.0 / hbar) * ((gp + gd) * s_l - np.trace(g @ m).real))


def linearized_variation_rhs(H: NHHamiltonian, ref: PureReference, drho) -> VariationMatrix:
    hp, g, hbar, rp, gp, d = _parts(H, ref, drho)
    out = -1j * _comm(hp, d) - _anti(g, d) + 2 * (gp * d + rp * np.trace(d @ g).real)
    return VariationMatrix(out / hbar)


def linearized_nonpurity(rho_p, drho) -> np.ndarray:
    """delta_M = delta_rho - {rho_p, delta_rho}."""
    rp, d = as_array(rho_p), as_array(drho)
    return d - _anti(rp, d)


def _lin_nonpurity_rhs(hp, g, hbar, rp, gp, d) -> np.ndarray:
    dm = d - _anti(rp, d)
    # Order d @ rp^(Gamma) (not rp^(Gamma) @ d) keeps the result Hermitian
    # and equal to the first-order part of the exact dM/dt.
    out = -1j * _comm(hp, dm) - _anti(g, dm) + 2 * (2 * gp * dm + rp @ _reduced(g, d) + d @ _reduced(g, rp))
    return out / hbar


def linearized_nonpurity_rhs(H: NHHamiltonian, ref: PureReference, drho) -> HermitianMatrix:
    return HermitianMatrix(_lin_nonpurity_rhs(*_parts(H, ref, drho)), tol=1e-10)


def linearized_entropy_rate(H: NHHamiltonian, ref: PureReference, drho) -> float:
    """d(delta S_L)/dt with delta S_L = -2 tr(rho_p delta_rho)."""
    hp, g, hbar, rp, gp, d = _parts(H, ref, drho)
    ds = -2.0 * np.trace(rp @ d).real
    dm = d - _anti(rp, d)
    return float((4.0 / hbar) * (gp * ds - np.trace(g @ dm).real))


def tls_exponent(ref: PureReference, Gamma, hbar: float = 1.0) -> float:
    """Characteristic exponent (2/hbar)(2 <Gamma>_p - tr Gamma) of a two-level system."""
    g = as_array(Gamma)
    if g.shape[0] != 2 or ref.dim != 2:
        raise WrongDimension("the scalar characteristic exponent is defined for dim = 2 only")
    gp = np.trace(ref.rho_p.data @ g).real
    return float((2.0 / hbar) * (2.0 * gp - np.trace(g).real))


def _full_basis(dim: int) -> list[np.ndarray]:
    return [np.eye(dim, dtype=complex) / np.sqrt(dim)] + list(traceless_hermitian_basis(dim))


def _coords(basis, m: np.ndarray) -> np.ndarray:
    return np.array([np.trace(m @ e).real for e in basis])


def characteristic_matrix_general(H: NHHamiltonian, ref: PureReference) -> np.ndarray:
    """Characteristic matrix by probing the linearized map on a basis.

    Works for any dimension (including 2). Coordinates are an orthonormal
    basis of the space of attainable delta_M, found from the SVD of the
    map delta_rho -> delta_M.
    """
    hp, g, hbar, rp, gp = H.H_plus.data, H.Gamma.data, H.hbar, ref.rho_p.data, ref.gamma_mean_p
    _check_dims(H, rp)
    _require_pure(rp)
    dim = H.dim
    full = _full_basis(dim)
    probes = full[1:]
    k_cols = np.column_stack([_coords(full, linearized_nonpurity(rp, e)) for e in probes])
    l_cols = np.column_stack([_coords(full, _lin_nonpurity_rhs(hp, g, hbar, rp, gp, e)) for e in probes])
    u, s, _ = np.linalg.svd(k_cols)
    rank = int(np.sum(s > 1e-10 * s[0]))
    if rank != (dim - 1) ** 2:
        raise NotPureReference(f"delta_M space has rank {rank}, expected {(dim - 1) ** 2}")
    ur = u[:, :rank]
    return ur.T @ l_cols @ np.linalg.pinv(k_cols) @ ur


def build_characteristic_matrix(H: NHHamiltonian, ref: PureReference) -> np.ndarray:
    """Matrix Lambda of d X/dt = Lambda X, X the independent components of delta_M.

    For two-level systems delta_M is proportional to the identity and
    Lambda is the 1x1 matrix [tls_exponent]. If rho_p is not stationary
    under the evolution, the result is the instantaneous matrix at rho_p.
    """
    _require_pure(ref.rho_p.data)
    _check_dims(H, ref.rho_p.data)
    if H.dim == 2:
        return np.array([[tls_exponent(ref, H.Gamma.data, H.hbar)]])
    return characteristic_matrix_general(H, ref)


class Classification(enum.Enum):
    LOCALLY_STABLE = "LocallyStable"
    LOCALLY_UNSTABLE = "LocallyUnstable"
    MARGINAL = "Marginal"


class InstabilityType(enum.Enum):
    NODE = "Node"
    SPIRAL = "Spiral"
    SADDLE = "Saddle"
    CENTER = "Center"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class StabilityReport:
    char_matrix: np.ndarray
    eigenvalues: np.ndarray
    classification: Classification
    instability_type: InstabilityType | None = None
    lyapunov_P: np.ndarray | None = None

    @property
    def max_real_part(self) -> float:
        return float(np.max(self.eigenvalues.real))


def _phase_type(ev: np.ndarray, tol: float) -> InstabilityType:
    if np.any(np.abs(ev) <= tol):
        return InstabilityType.DEGENERATE
    if np.any(np.abs(ev.imag) > tol):
        if np.all(np.abs(ev.real) <= tol):
            return InstabilityType.CENTER
        return InstabilityType.SPIRAL
    re = ev.real
    if np.all(re > 0) or np.all(re < 0):
        return InstabilityType.NODE
    return InstabilityType.SADDLE


def classify(matrix, tol_margin: float = TOL_MARGIN) -> StabilityReport:
    """Classify a linear system dX/dt = Lambda X by its eigenvalues.

    Phase-plane types (node, saddle, spiral, center, degenerate) are only
    assigned for 1x1 and 2x2 systems.
    """
    lam = np.atleast_2d(np.asarray(matrix, dtype=float))
    if lam.shape[0] != lam.shape[1]:
        raise ValueError(f"characteristic matrix must be square, got {lam.shape}")
    if not np.all(np.isfinite(lam)):
        raise NonFiniteInput("characteristic matrix contains NaN or Inf")
    ev = np.linalg.eigvals(lam)
    ev = ev[np.lexsort((ev.imag, -ev.real))]
    max_re = float(np.max(ev.real))
    if max_re < -tol_margin:
        cls = Classification.LOCALLY_STABLE
    elif max_re > tol_margin:
        cls = Classification.LOCALLY_UNSTABLE
    else:
        cls = Classification.MARGINAL
    kind = _phase_type(ev, tol_margin) if lam.shape[0] <= 2 else None
    return StabilityReport(lam, ev, cls, kind)


# Above this size the Kronecker system (n^2 unknowns) is too large to form.
_KRON_MAX = 15


def lyapunov_certificate(Lambda) -> np.ndarray | None:
    """Solve Lambda^T P + P Lambda = -I; return P if it is positive definite.

    Raises :class:`SingularLyapunov` when two eigenvalues of Lambda sum to
    zero, i.e. the equation has no unique solution.
    """
    lam = np.atleast_2d(np.asarray(Lambda, dtype=float))
    n = lam.shape[0]
    if lam.shape != (n, n):
        raise ValueError("Lambda must be square")
    if not np.all(np.isfinite(lam)):
        raise NonFiniteInput("Lambda contains NaN or Inf")
    ev = np.linalg.eigvals(lam)
    pair_sums = np.abs(ev[:, None] + ev[None, :])
    if np.min(pair_sums) <= 1e-10 * max(1.0, float(np.max(np.abs(ev)))):
        raise SingularLyapunov("eigenvalues of Lambda sum to zero pairwise; no unique solution")
    eye = np.eye(n)
    if n <= _KRON_MAX:
        # column-stacking vec: vec(A X + X B) = (I kron A + B^T kron I) vec(X)
        op = np.kron(eye, lam.T) + np.kron(lam.T, eye)
        try:
            p = np.linalg.solve(op, -eye.reshape(-1, order="F")).reshape(n, n, order="F")
        except np.linalg.LinAlgError as exc:
            raise SingularLyapunov(str(exc)) from exc
    else:
        p = scipy.linalg.solve_continuous_lyapunov(lam.T, -eye)
    p = 0.5 * (p + p.T)
    try:
        np.linalg.cholesky(p)
    except np.linalg.LinAlgError:
        return None
    return p


def analyze(H: NHHamiltonian, ref: PureReference) -> StabilityReport:
    """Characteristic matrix, classification and Lyapunov certificate."""
    lam = build_characteristic_matrix(H, ref)
    report = classify(lam)
    try:
        p = lyapunov_certificate(lam)
    except SingularLyapunov:
        p = None
    return StabilityReport(report.char_matrix, report.eigenvalues, report.classification,
                           report.instability_type, p)
