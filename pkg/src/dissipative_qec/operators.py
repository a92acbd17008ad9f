"""Dense operator algebra on tensor-product Hilbert spaces.

Every matrix handled by the package (Hamiltonians, projectors, coupling
operators, unitaries, density matrices) travels as an :class:`Operator`: an
immutable complex array tagged with its subsystem dimensions.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

EPS_HERM = 1e-10
EPS_UNIT = 1e-10
EPS_EIG = 1e-10
SEMIDEFINITE_TOL = 1e-9


class OperatorError(ValueError):
    """Malformed operator or incompatible operands."""


class DimensionMismatchError(OperatorError):
    pass


class NotHermitianError(OperatorError):
    def __init__(self, asymmetry: float, tol: float = EPS_HERM):
        self.asymmetry = asymmetry
        super().__init__(f"operator is not Hermitian: max|A - A^dag| = {asymmetry:.3e} > {tol:.1e}")


class PauliSpecError(OperatorError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix acting on ``prod(dims)``-dimensional space.

    The underlying array is copied and made read-only on construction.
    """

    data: np.ndarray
    dims: tuple[int, ...]

    def __init__(self, data, dims: Sequence[int] | None = None):
        arr = np.array(data, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise OperatorError(f"operator matrix must be square, got shape {arr.shape}")
        if dims is None:
            dims = (arr.shape[0],)
        dims = tuple(int(d) for d in dims)
        if any(d < 1 for d in dims):
            raise OperatorError(f"subsystem dimensions must be positive, got {dims}")
        if int(np.prod(dims)) != arr.shape[0]:
            raise OperatorError(f"dims {dims} do not multiply to matrix size {arr.shape[0]}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "dims", dims)

    @property
    def size(self) -> int:
        return self.data.shape[0]

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "Operator":
        return cls(np.eye(int(np.prod(dims))), dims)

    @classmethod
    def zeros(cls, dims: Sequence[int]) -> "Operator":
        n = int(np.prod(dims))
        return cls(np.zeros((n, n)), dims)

    @classmethod
    def projector(cls, vector, dims: Sequence[int] | None = None) -> "Operator":
        """Outer product ``|v><v|`` (no normalization applied)."""
        v = np.asarray(vector, dtype=complex).reshape(-1)
        return cls(np.outer(v, v.conj()), dims)

    def dag(self) -> "Operator":
        return Operator(self.data.conj().T, self.dims)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def hermitian_asymmetry(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T), initial=0.0))

    def is_hermitian(self, tol: float = EPS_HERM) -> bool:
        return self.hermitian_asymmetry() <= tol

    def is_unitary(self, tol: float = EPS_UNIT) -> bool:
        d = self.data
        return float(np.max(np.abs(d.conj().T @ d - np.eye(self.size)))) <= tol

    def is_projector(self, tol: float = EPS_HERM) -> bool:
        d = self.data
        return self.is_hermitian(tol) and float(np.max(np.abs(d @ d - d), initial=0.0)) <= tol

    def norm_max(self) -> float:
        return float(np.max(np.abs(self.data), initial=0.0))

    def allclose(self, other: "Operator", atol: float = 1e-12) -> bool:
        return self.size == other.size and bool(np.max(np.abs(self.data - other.data), initial=0.0) <= atol)

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, Operator):
            if other.size != self.size:
                raise DimensionMismatchError(f"operand sizes differ: {self.size} vs {other.size}")
            return other.data
        return NotImplemented

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.data @ self._coerce(other), self.dims)
        vec = np.asarray(other)
        return self.data @ vec

    def __add__(self, other):
        od = self._coerce(other)
        if od is NotImplemented:
            return od
        return Operator(self.data + od, self.dims)

    def __sub__(self, other):
        od = self._coerce(other)
        if od is NotImplemented:
            return od
        return Operator(self.data - od, self.dims)

    def __neg__(self):
        return Operator(-self.data, self.dims)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            return NotImplemented
        return Operator(self.data * scalar, self.dims)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.data / scalar, self.dims)

    def __repr__(self) -> str:
        return f"Operator(dims={self.dims})"


_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_string(spec: str) -> Operator:
    """Tensor product of single-qubit Paulis, leftmost character on qubit 1.

    >>> pauli_string("ZZ").data.diagonal().real
    array([ 1., -1., -1.,  1.])
    """
    if not spec:
        raise PauliSpecError("Pauli spec is empty")
    mats = []
    for pos, ch in enumerate(spec):
        m = _PAULI.get(ch.upper())
        if m is None:
            raise PauliSpecError(f"invalid Pauli character {ch!r} at position {pos}", position=pos)
        mats.append(m)
    return Operator(reduce(np.kron, mats), (2,) * len(spec))


def kron(a: Operator, b: Operator) -> Operator:
    return Operator(np.kron(a.data, b.data), a.dims + b.dims)


def kron_all(ops: Iterable[Operator]) -> Operator:
    return reduce(kron, ops)


def commutator(a: Operator, b: Operator) -> Operator:
    if a.size != b.size:
        raise DimensionMismatchError(f"commutator of size {a.size} and {b.size} operators")
    return Operator(a.data @ b.data - b.data @ a.data, a.dims)


def basis_state(index: int, dims: Sequence[int]) -> np.ndarray:
    v = np.zeros(int(np.prod(dims)), dtype=complex)
    v[index] = 1.0
    return v


def ket(bits: str) -> np.ndarray:
    """Computational basis vector from a bit string, qubit 1 most significant."""
    return basis_state(int(bits, 2), (2,) * len(bits))


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns

    def __iter__(self):
        return iter((self.eigenvalues, self.eigenvectors))


@dataclass(frozen=True)
class SemidefiniteCertificate:
    verdict: bool
    worst_eigenvalue: float
    witness_vector: np.ndarray


def _require_hermitian(a: Operator) -> np.ndarray:
    asym = a.hermitian_asymmetry()
    if asym > EPS_HERM:
        raise NotHermitianError(asym)
    # symmetrize to strip rounding noise before eigh
    return 0.5 * (a.data + a.data.conj().T)


def spectral_decompose(a: Operator) -> Spectrum:
    """Ascending eigenvalues and orthonormal eigenvectors of a Hermitian operator."""
    w, v = np.linalg.eigh(_require_hermitian(a))
    return Spectrum(w, v)


def is_negative_semidefinite(a: Operator, tol: float = SEMIDEFINITE_TOL) -> SemidefiniteCertificate:
    """Decide ``a <= 0`` via its largest eigenvalue.

    The witness is the eigenvector of the largest eigenvalue and is returned
    regardless of the verdict.
    """
    w, v = np.linalg.eigh(_require_hermitian(a))
    worst = float(w[-1])
    return SemidefiniteCertificate(worst <= tol, worst, v[:, -1].copy())


def range_basis(a: Operator, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (columns) of the support of a positive semidefinite operator."""
    w, v = np.linalg.eigh(_require_hermitian(a))
    return v[:, w > tol]


def kernel_basis(a: Operator, tol: float = 1e-9) -> np.ndarray:
    w, v = np.linalg.eigh(_require_hermitian(a))
    return v[:, np.abs(w) <= tol]
