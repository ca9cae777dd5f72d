"""Time evolution under a non-Hermitian Hamiltonian H = H_plus - i Gamma.

Two equivalent representations are integrated:

* the linear equation for the non-normalized operator Omega,
  dOmega/dt = -(i/hbar)[H_plus, Omega] - (1/hbar){Gamma, Omega},
  with rho = Omega / tr(Omega) recovered afterwards;
* the nonlinear, trace-preserving equation for rho itself,
  drho/dt = -(i/hbar)[H_plus, rho] - (1/hbar){Gamma, rho} + (2/hbar)<Gamma> rho.

Both use classical RK4. The normalized equation can reach a finite-time
singularity (tr Omega -> 0); steps that approach one are subdivided until
the state exceeds ``blowup_ceiling`` or the step underflows, and the run
terminates with :attr:`TerminationStatus.SINGULARITY`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, SingularTrace, TraceViolation
from .qmatrix import (
    DensityMatrix,
    HermitianMatrix,
    VariationMatrix,
    as_array,
    decompose_hamiltonian,
)


@dataclass(frozen=True)
class NHHamiltonian:
    """Hermitian part, decay operator and hbar of H = H_plus - i Gamma."""

    H_plus: HermitianMatrix
    Gamma: HermitianMatrix
    hbar: float = 1.0

    def __post_init__(self):
        if not isinstance(self.H_plus, HermitianMatrix):
            object.__setattr__(self, "H_plus", HermitianMatrix(self.H_plus))
        if not isinstance(self.Gamma, HermitianMatrix):
            object.__setattr__(self, "Gamma", HermitianMatrix(self.Gamma))
        if self.H_plus.dim != self.Gamma.dim:
            raise DimensionMismatch("H_plus and Gamma must have the same dimension")
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive, got {self.hbar}")

    @classmethod
    def from_matrix(cls, H, hbar: float = 1.0) -> NHHamiltonian:
        h_plus, gamma = decompose_hamiltonian(H)
        return cls(h_plus, gamma, hbar)

    @property
    def dim(self) -> int:
        return self.H_plus.dim

    @property
    def matrix(self) -> np.ndarray:
        return self.H_plus.data - 1j * self.Gamma.data

    @property
    def is_hermitian(self) -> bool:
        return not np.any(self.Gamma.data)


class Method(enum.Enum):
    RK4_FIXED = "RK4Fixed"
    RK4_ADAPTIVE = "RK4Adaptive"


class Representation(enum.Enum):
    NORMALIZED_RHO = "NormalizedRho"
    OMEGA_THEN_NORMALIZE = "OmegaThenNormalize"


class TerminationStatus(enum.Enum):
    COMPLETED = "completed"
    SINGULARITY = "singularity"
    NON_FINITE = "nonfinite"


@dataclass(frozen=True)
class Termination:
    status: TerminationStatus
    time: float | None = None

    @property
    def completed(self) -> bool:
        return self.status is TerminationStatus.COMPLETED


@dataclass(frozen=True)
class EvolutionConfig:
    t_end: float
    dt: float = 1e-3
    method: Method = Method.RK4_FIXED
    representation: Representation = Representation.NORMALIZED_RHO
    renormalize_each_step: bool = False
    singularity_trace_floor: float = 1e-10
    blowup_ceiling: float = 1e12
    record_stride: int = 1
    # adaptive step-doubling target, per element, relative above magnitude 1
    adaptive_tol: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "representation", Representation(self.representation))
        if not (self.t_end > 0 and self.dt > 0 and self.dt < self.t_end):
            raise ValueError(f"need 0 < dt < t_end, got dt={self.dt}, t_end={self.t_end}")
        if self.singularity_trace_floor <= 0 or self.blowup_ceiling <= 0:
            raise ValueError("singularity thresholds must be positive")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError("record_stride must be a positive integer")
        if self.adaptive_tol <= 0:
            raise ValueError("adaptive_tol must be positive")


@dataclass
class Trajectory:
    """Recorded states and purity observables.

    ``rho`` holds the raw integrated matrices (no projection), so that
    trace and Hermiticity drift remain observable; :attr:`states` wraps
    them as :class:`DensityMatrix` objects.
    """

    times: np.ndarray
    rho: np.ndarray
    purity: np.ndarray
    linear_entropy: np.ndarray
    purity_rate: np.ndarray
    termination: Termination = field(default_factory=lambda: Termination(TerminationStatus.COMPLETED))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def states(self) -> list[DensityMatrix]:
        return [DensityMatrix(r, tol=1e-8) for r in self.rho]


def _rhs_omega(hp: np.ndarray, g: np.ndarray, hbar: float, om: np.ndarray) -> np.ndarray:
    hom, omh = hp @ om, om @ hp
    gom, omg = g @ om, om @ g
    return (-1j * (hom - omh) - (gom + omg)) / hbar


def _rhs_rho(hp: np.ndarray, g: np.ndarray, hbar: float, rho: np.ndarray) -> np.ndarray:
    grho, rhog = g @ rho, rho @ g
    mean_g = np.trace(grho)
    return (-1j * (hp @ rho - rho @ hp) - (grho + rhog) + 2.0 * mean_g * rho) / hbar


def _check_dims(H: NHHamiltonian, m: np.ndarray) -> None:
    if m.shape[0] != H.dim:
        raise DimensionMismatch(f"state has dim {m.shape[0]}, Hamiltonian has dim {H.dim}")


def rhs_omega(H: NHHamiltonian, Omega) -> HermitianMatrix:
    om = as_array(Omega)
    _check_dims(H, om)
    return HermitianMatrix(_rhs_omega(H.H_plus.data, H.Gamma.data, H.hbar, om), tol=1e-13)


def rhs_rho(H: NHHamiltonian, rho) -> VariationMatrix:
    r = as_array(rho)
    _check_dims(H, r)
    return VariationMatrix(_rhs_rho(H.H_plus.data, H.Gamma.data, H.hbar, r))


def normalize(Omega, trace_floor: float = 1e-10) -> DensityMatrix:
    om = as_array(Omega)
    tr = np.trace(om).real
    if abs(tr) <= trace_floor:
        raise SingularTrace(f"|tr Omega| = {abs(tr):.3e} is below the floor {trace_floor:.1e}")
    return DensityMatrix(om / tr, tol=1e-10)


def _rk4(f, y: np.ndarray, h: float):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4), (k1, k2, k3, k4)


# A fixed step is subdivided when its stage slopes disagree by more than this
# fraction of the state magnitude; this only happens next to a pole.
_JUMP_TOL = 0.5
_MAX_GROWTH = 2.0


class _Stepper:
    """Integrates one state forward, owning singularity detection."""

    def __init__(self, H: NHHamiltonian, cfg: EvolutionConfig):
        # The state is carried as a row-major vector. With
        # A = -(i H_plus + Gamma)/hbar, dOmega/dt = A Omega + Omega A^dagger
        # becomes L vec(Omega) with L = A (x) I + I (x) conj(A).
        d = H.dim
        a = -(1j * H.H_plus.data + H.Gamma.data) / H.hbar
        eye = np.eye(d)
        lmat = np.kron(a, eye) + np.kron(eye, a.conj())
        g2 = ((2.0 / H.hbar) * H.Gamma.data.T).ravel()
        self.cfg = cfg
        self.dim = d
        self.diag = slice(None, None, d + 1)
        self.omega_mode = cfg.representation is Representation.OMEGA_THEN_NORMALIZE
        if self.omega_mode:
            self.f = lambda y: lmat @ y
        else:
            self.f = lambda y: lmat @ y + (g2 @ y) * y
        self.min_step = cfg.dt * 1e-12
        # A floor crossing that persists at this step size is the singularity;
        # bisecting further only chases round-off near a soft threshold.
        self.singular_resolution = cfg.dt * 1e-6

    def _singular(self, y: np.ndarray) -> bool:
        if self.omega_mode:
            # Omega is rescaled every step, so the trace test is relative.
            scale = max(1.0, float(np.max(np.abs(y))))
            return y[self.diag].sum().real < self.cfg.singularity_trace_floor * scale
        return float(np.max(np.abs(y))) > self.cfg.blowup_ceiling

    def _fixed_ok(self, y, ks, h) -> bool:
        k1, k2, k3, k4 = ks
        spread = max(np.abs(k2 - k1).max(), np.abs(k3 - k1).max(), np.abs(k4 - k1).max())
        return h * spread <= _JUMP_TOL * (1.0 + np.abs(y).max())

    def advance(self, t: float, y: np.ndarray, span: float, h: float):
        """Advance by ``span``; returns (t, y, h_next, status)."""
        cfg = self.cfg
        t_target = t + span
        adaptive = cfg.method is Method.RK4_ADAPTIVE
        saw_nonfinite = False
        while True:
            remaining = t_target - t
            if remaining <= 1e-14 * max(1.0, abs(t_target)):
                return t_target, y, h, TerminationStatus.COMPLETED
            step = min(h, remaining)
            if step < self.min_step or t + step == t:
                status = TerminationStatus.NON_FINITE if saw_nonfinite else TerminationStatus.SINGULARITY
                return t, y, h, status
            if adaptive:
                y_full, _ = _rk4(self.f, y, step)
                y_half, _ = _rk4(self.f, y, 0.5 * step)
                y_new, _ = _rk4(self.f, y_half, 0.5 * step)
                scale = np.maximum(1.0, np.abs(y_new))
                err = float(np.max(np.abs(y_new - y_full) / scale)) / 15.0
                ok = np.isfinite(err) and err <= cfg.adaptive_tol
                factor = 0.9 * (cfg.adaptive_tol / err) ** 0.2 if err > 0 else 4.0
                factor = min(4.0, max(0.2, factor)) if np.isfinite(factor) else 0.2
            else:
                y_new, ks = _rk4(self.f, y, step)
                ok = bool(np.isfinite(y_new).all()) and self._fixed_ok(y, ks, step)
                factor = _MAX_GROWTH if ok else 0.5
            if ok and self._singular(y_new):
                if step <= self.singular_resolution:
                    return t, y, h, TerminationStatus.SINGULARITY
                ok = False
                factor = 0.5
            if not ok:
                saw_nonfinite = not np.isfinite(y_new).all()
                h = step * factor
                continue
            t, y = t + step, y_new
            if self.omega_mode:
                y = y / abs(y[self.diag].sum().real)
            elif cfg.renormalize_each_step:
                y = y / y[self.diag].sum()
            if not np.isfinite(y).all():
                return t, y, h, TerminationStatus.NON_FINITE
            # fixed mode returns to the nominal step once past a hard region
            h = step * factor if adaptive else min(cfg.dt, step * factor)


def _to_rho(y: np.ndarray, omega_mode: bool) -> np.ndarray:
    return y / np.trace(y).real if omega_mode else y


def _observables(H: NHHamiltonian, rhos: np.ndarray):
    g = H.Gamma.data
    rho2 = rhos @ rhos
    purity = np.einsum("nii->n", rho2).real
    mean_g = np.einsum("nij,ji->n", rhos, g).real
    tr_rho2_g = np.einsum("nij,ji->n", rho2, g).real
    rate = (4.0 / H.hbar) * (mean_g * purity - tr_rho2_g)
    return purity, 1.0 - purity, rate


def evolve(H: NHHamiltonian, rho0, cfg: EvolutionConfig) -> Trajectory:
    """Integrate the state from ``rho0`` over [0, cfg.t_end].

    States are recorded every ``cfg.record_stride`` nominal steps of size
    ``cfg.dt`` (also in adaptive mode, where the internal step varies).
    A singularity or non-finite state ends the run early; the trajectory
    then holds the samples recorded before that point.
    """
    r0 = as_array(rho0)
    _check_dims(H, r0)
    if abs(np.trace(r0) - 1.0) > 1e-10:
        raise TraceViolation("initial state must have unit trace")
    stepper = _Stepper(H, cfg)
    n_steps = max(1, int(round(cfg.t_end / cfg.dt)))
    dt = cfg.t_end / n_steps
    stride = int(cfg.record_stride)

    times = [0.0]
    rhos = [r0.copy()]
    y = r0.ravel().copy()
    t, h = 0.0, dt
    status = TerminationStatus.COMPLETED
    done = 0
    while done < n_steps:
        span_steps = min(stride, n_steps - done)
        t, y, h, status = stepper.advance(t, y, span_steps * dt, h)
        if status is not TerminationStatus.COMPLETED:
            break
        done += span_steps
        t = done * dt
        if done % stride == 0 or done == n_steps:
            times.append(t)
            rhos.append(_to_rho(y.reshape(r0.shape), stepper.omega_mode))

    rho_arr = np.array(rhos)
    purity, entropy, rate = _observables(H, rho_arr)
    term = Termination(status, None if status is TerminationStatus.COMPLETED else float(t))
    return Trajectory(np.array(times), rho_arr, purity, entropy, rate, term)
