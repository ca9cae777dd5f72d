"""Density-matrix evolution under non-Hermitian Hamiltonians and the
stability of pure states against purity-changing fluctuations."""

from .dynamics import (
    EvolutionConfig,
    Method,
    NHHamiltonian,
    Representation,
    Termination,
    TerminationStatus,
    Trajectory,
    evolve,
    normalize,
    rhs_omega,
    rhs_rho,
)
from .observables import (
    gamma_reduced,
    linear_entropy,
    nonpurity_operator,
    purity,
    purity_rate,
)
from .qmatrix import (
    ComplexSquareMatrix,
    DensityMatrix,
    HermitianMatrix,
    OperatorBasis,
    VariationMatrix,
    anticommutator,
    commutator,
    decompose_hamiltonian,
    mean_value,
    traceless_hermitian_basis,
)
from .stability import (
    Classification,
    InstabilityType,
    PureReference,
    StabilityReport,
    analyze,
    build_characteristic_matrix,
    classify,
    lyapunov_certificate,
    tls_exponent,
)

__version__ = "0.1.0"
