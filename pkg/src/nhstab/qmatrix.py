"""Dense complex matrices with Hermitian structure.

The wrappers here are immutable: the underlying array is copied on
construction and flagged read-only. Hermitian-type wrappers verify their
invariant against the raw input first and then project onto it exactly,
so round-off cannot accumulate through long integrations.

Tolerances are absolute for entries of order one and relative for larger
matrices (``tol * max(1, max|A_ij|)``).
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidDimension,
    NonFiniteInput,
    NotHermitian,
    TraceViolation,
)

TOL_HERM = 1e-12
TOL_TRACE = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def as_array(a) -> np.ndarray:
    """Return ``a`` as a complex square ndarray, rejecting NaN/Inf."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise InvalidDimension(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput("matrix contains NaN or Inf entries")
    return arr


def _scale(arr: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(arr))))


def _same_dim(*mats: np.ndarray) -> None:
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise DimensionMismatch(f"matrix dimensions differ: {sorted(dims)}")


def dagger(a) -> np.ndarray:
    return np.conj(np.asarray(a)).T


class ComplexSquareMatrix:
    """Immutable dim x dim complex matrix with finite entries."""

    __slots__ = ("_data",)

    def __init__(self, data):
        arr = np.array(as_array(data), copy=True)
        arr.setflags(write=False)
        self._data = arr

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None or np.dtype(dtype) == self._data.dtype:
            return self._data.copy() if copy else self._data
        return self._data.astype(dtype)

    def dagger(self) -> np.ndarray:
        return dagger(self._data)

    def trace(self) -> complex:
        return complex(np.trace(self._data))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({np.array2string(self._data, precision=6)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComplexSquareMatrix):
            return NotImplemented
        return self._data.shape == other._data.shape and bool(np.all(self._data == other._data))

    __hash__ = None


class HermitianMatrix(ComplexSquareMatrix):
    """A = A^dagger, checked to ``tol`` and then symmetrized."""

    __slots__ = ()

    def __init__(self, data, tol: float = TOL_HERM):
        arr = as_array(data)
        dev = float(np.max(np.abs(arr - dagger(arr))))
        if dev > tol * _scale(arr):
            raise NotHermitian(f"max |A - A^dagger| = {dev:.3e} exceeds tolerance {tol:.1e}")
        super().__init__(0.5 * (arr + dagger(arr)))


class DensityMatrix(HermitianMatrix):
    """Hermitian, unit-trace state.

    Positivity is deliberately not enforced: perturbed states used in the
    stability analysis may have negative eigenvalues. Use
    :meth:`is_positive` to test for it.
    """

    __slots__ = ()

    def __init__(self, data, tol: float = TOL_TRACE):
        arr = as_array(data)
        tr = np.trace(arr)
        if abs(tr - 1.0) > tol * _scale(arr):
            raise TraceViolation(f"tr rho = {tr:.15g}, expected 1")
        super().__init__(arr, tol=tol)
        fixed = self._data + ((1.0 - np.trace(self._data).real) / self.dim) * np.eye(self.dim)
        fixed.setflags(write=False)
        self._data = fixed

    def is_positive(self, tol: float = 1e-12) -> bool:
        return bool(np.min(np.linalg.eigvalsh(self._data)) >= -tol)

    def is_pure(self, tol: float = 1e-10) -> bool:
        """Idempotence test rho^2 = rho."""
        return bool(np.max(np.abs(self._data @ self._data - self._data)) <= tol)


class VariationMatrix(HermitianMatrix):
    """Traceless Hermitian perturbation of a density matrix."""

    __slots__ = ()

    def __init__(self, data, tol: float = TOL_TRACE):
        arr = as_array(data)
        tr = np.trace(arr)
        if abs(tr) > tol * _scale(arr):
            raise TraceViolation(f"tr Delta = {tr:.3e}, expected 0")
        super().__init__(arr, tol=tol)
        fixed = self._data - (np.trace(self._data).real / self.dim) * np.eye(self.dim)
        fixed.setflags(write=False)
        self._data = fixed


class OperatorBasis:
    """Orthonormal basis of traceless Hermitian matrices under (A, B) -> tr(AB)."""

    def __init__(self, dim: int, elements: list[np.ndarray]):
        self.dim = dim
        self.elements = tuple(elements)
        for e in self.elements:
            e.setflags(write=False)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def coordinates(self, m) -> np.ndarray:
        """Real coordinates tr(M e_i) of a Hermitian matrix M."""
        m = np.asarray(m)
        return np.array([np.trace(m @ e).real for e in self.elements])

    def compose(self, coords) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for c, e in zip(coords, self.elements):
            out += c * e
        return out

    def gram(self) -> np.ndarray:
        return np.array([[np.trace(a @ b).real for b in self.elements] for a in self.elements])


def traceless_hermitian_basis(dim: int) -> OperatorBasis:
    """Generalized Gell-Mann basis normalized to tr(e_i e_j) = delta_ij.

    Ordering is: symmetric off-diagonal pairs, antisymmetric pairs, then
    diagonal elements. For ``dim == 2`` this gives (sx, sy, sz) / sqrt(2).
    """
    if not isinstance(dim, (int, np.integer)) or dim < 2:
        raise InvalidDimension(f"basis needs dim >= 2, got {dim}")
    sym, asym, diag = [], [], []
    r2 = np.sqrt(2.0)
    for j in range(dim):
        for k in range(j + 1, dim):
            s = np.zeros((dim, dim), dtype=complex)
            s[j, k] = s[k, j] = 1 / r2
            a = np.zeros((dim, dim), dtype=complex)
            a[j, k], a[k, j] = -1j / r2, 1j / r2
            sym.append(s)
            asym.append(a)
    for l in range(1, dim):
        d = np.zeros((dim, dim), dtype=complex)
        d[np.arange(l), np.arange(l)] = 1.0
        d[l, l] = -l
        diag.append(d / np.sqrt(l * (l + 1)))
    return OperatorBasis(dim, sym + asym + diag)


def decompose_hamiltonian(H) -> tuple[HermitianMatrix, HermitianMatrix]:
    """Split H into (H_plus, Gamma) with H = H_plus - i Gamma."""
    h = as_array(H)
    h_plus = 0.5 * (h + dagger(h))
    gamma = 0.5j * (h - dagger(h))
    return HermitianMatrix(h_plus), HermitianMatrix(gamma)


def commutator(a, b) -> ComplexSquareMatrix:
    a, b = as_array(a), as_array(b)
    _same_dim(a, b)
    return ComplexSquareMatrix(a @ b - b @ a)


def anticommutator(a, b) -> ComplexSquareMatrix:
    a, b = as_array(a), as_array(b)
    _same_dim(a, b)
    return ComplexSquareMatrix(a @ b + b @ a)


def mean_value(rho, a) -> complex:
    """<A> = tr(rho A)."""
    r, a = as_array(rho), as_array(a)
    _same_dim(r, a)
    return complex(np.trace(r @ a))


def parse_matrix_literal(obj) -> np.ndarray:
    """Parse the config/test matrix format: row-major ``[re, im]`` pairs.

    Accepts either a flat list of dim**2 pairs or a nested list of rows of
    pairs. Bare real numbers are accepted in place of pairs in the flat form.
    """
    def entry(x):
        if isinstance(x, (int, float)) and not isinstance(x, bool):
            return complex(x)
        if isinstance(x, (list, tuple)) and len(x) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in x
        ):
            return complex(x[0], x[1])
        raise ValueError(f"bad matrix entry {x!r}; expected [re, im]")

    if not isinstance(obj, (list, tuple)) or not obj:
        raise ValueError("matrix literal must be a non-empty list")
    if all(isinstance(row, (list, tuple)) and row and all(isinstance(x, (list, tuple)) for x in row)
           for row in obj):
        rows = [[entry(x) for x in row] for row in obj]
    else:
        flat = [entry(x) for x in obj]
        dim = int(round(np.sqrt(len(flat))))
        if dim * dim != len(flat):
            raise ValueError(f"flat matrix literal of length {len(flat)} is not square")
        rows = [flat[i * dim:(i + 1) * dim] for i in range(dim)]
    return as_array(np.array(rows, dtype=complex))


def matrix_literal(a) -> list[list[float]]:
    """Inverse of :func:`parse_matrix_literal` (flat row-major form)."""
    return [[float(z.real), float(z.imag)] for z in np.asarray(a, dtype=complex).ravel()]
