"""Commuting-projector target structure built from Pauli stabilizers."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .operators import (
    EPS_HERM,
    Operator,
    OperatorError,
    commutator,
    pauli_string,
    spectral_decompose,
)

GROUND_TOL = 1e-9


class AssumptionError(ValueError):
    """The stabilizer data violates the projector/commutation premises."""


class NonCommutingError(AssumptionError):
    def __init__(self, pair: tuple[int, int], norm: float):
        self.pair = pair
        self.norm = norm
        super().__init__(f"stabilizers {pair[0] + 1} and {pair[1] + 1} do not commute (|[S_i,S_j]|_max = {norm:.3e})")


class NotInvolutionError(AssumptionError):
    def __init__(self, index: int, spec: str):
        self.index = index
        super().__init__(f"stabilizer {index + 1} ({spec}) does not square to the identity")


class EmptyGroundSpaceError(AssumptionError):
    def __init__(self, min_eigenvalue: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(f"total operator has no ground state at zero (min eigenvalue {min_eigenvalue:.6g})")


class NegativeEigenvalueError(AssumptionError):
    def __init__(self, min_eigenvalue: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(f"operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")


@dataclass(frozen=True, eq=False)
class StabilizerModel:
    n_qubits: int
    stabilizer_specs: tuple[str, ...]
    projectors: tuple[Operator, ...]
    total: Operator
    hamiltonian: Operator
    ground_basis: np.ndarray  # orthonormal columns spanning ker(total)
    offsets: tuple[float, ...] = field(default=())  # g_i, one per projector

    @property
    def dims(self) -> tuple[int, ...]:
        return (2,) * self.n_qubits

    @property
    def code_projector(self) -> Operator:
        b = self.ground_basis
        return Operator(b @ b.conj().T, self.dims)


def ground_space(v: Operator, tol: float = GROUND_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the eigenvalue-0 subspace of ``v >= 0``."""
    w, vecs = spectral_decompose(v)
    if w.size and w[0] < -tol:
        raise NegativeEigenvalueError(float(w[0]))
    basis = vecs[:, w <= tol]
    # eigh already returns orthonormal vectors; QR guards against degenerate-subspace drift
    if basis.shape[1]:
        basis, _ = np.linalg.qr(basis)
    return basis


def _projector_offset(p: Operator) -> float:
    # g_i = -lambda_min(H_i) with H_i = V_i - g_i I; zero for genuine projectors
    return -float(spectral_decompose(p).eigenvalues[0])


def build_model(n_qubits: int, stabilizer_specs: Sequence[str]) -> StabilizerModel:
    """Projectors ``V_i = (I - S_i)/2`` onto the violated eigenspace of each stabilizer.

    The Hamiltonian is ``sum(V_i - g_i I)``, which equals the total for
    projector terms.
    """
    if n_qubits < 1:
        raise AssumptionError("n_qubits must be positive")
    specs = tuple(s.upper() for s in stabilizer_specs)
    dims = (2,) * n_qubits
    ident = Operator.identity(dims)
    stabs = []
    for i, s in enumerate(specs):
        if len(s) != n_qubits:
            raise OperatorError(f"stabilizer {i + 1} ({s}) has length {len(s)}, expected {n_qubits}")
        op = pauli_string(s)
        # Pauli strings are always involutions, but keep the check for signed/general inputs
        if not (op @ op).allclose(ident, EPS_HERM):
            raise NotInvolutionError(i, s)
        stabs.append(op)
    for i, j in combinations(range(len(stabs)), 2):
        norm = commutator(stabs[i], stabs[j]).norm_max()
        if norm > EPS_HERM:
            raise NonCommutingError((i, j), norm)

    projectors = tuple(0.5 * (ident - s) for s in stabs)
    total = Operator.zeros(dims)
    for p in projectors:
        total = total + p
    offsets = tuple(_projector_offset(p) for p in projectors)
    hamiltonian = Operator.zeros(dims)
    for p, g in zip(projectors, offsets):
        hamiltonian = hamiltonian + (p - g * ident)

    w = spectral_decompose(total).eigenvalues
    if w.size and w[0] > GROUND_TOL:
        raise EmptyGroundSpaceError(float(w[0]))
    basis = ground_space(total)
    return StabilizerModel(n_qubits, specs, projectors, total, hamiltonian, basis, offsets)


@dataclass(frozen=True)
class ClauseResult:
    name: str
    passed: bool
    residual: float
    detail: str = ""


@dataclass(frozen=True)
class AssumptionReport:
    clauses: tuple[ClauseResult, ...]
    offsets: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def clause(self, name: str) -> ClauseResult:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)


def verify_assumptions(
    projectors: Sequence[Operator],
    hamiltonian: Operator | None = None,
    tol: float = EPS_HERM,
) -> AssumptionReport:
    """Numerical residuals for the projector, commutation and Hamiltonian clauses.

    Accepts a :class:`StabilizerModel` or a bare list of projectors; never raises.
    """
    if isinstance(projectors, StabilizerModel):
        hamiltonian = projectors.hamiltonian if hamiltonian is None else hamiltonian
        projectors = projectors.projectors
    projectors = list(projectors)

    proj_res = 0.0
    herm_res = 0.0
    for p in projectors:
        proj_res = max(proj_res, (p @ p - p).norm_max())
        herm_res = max(herm_res, p.hermitian_asymmetry())
    clauses = [
        ClauseResult("projector", proj_res <= tol and herm_res <= tol, max(proj_res, herm_res)),
    ]

    comm_res = 0.0
    worst_pair = None
    for i, j in combinations(range(len(projectors)), 2):
        n = commutator(projectors[i], projectors[j]).norm_max()
        if n > comm_res:
            comm_res, worst_pair = n, (i + 1, j + 1)
    detail = f"pair {worst_pair}" if comm_res > tol else ""
    clauses.append(ClauseResult("commuting", comm_res <= tol, comm_res, detail))

    offsets: list[float] = []
    if projectors:
        for p in projectors:
            try:
                offsets.append(_projector_offset(p))
            except OperatorError:
                offsets.append(float("nan"))
    if hamiltonian is not None and projectors:
        ident = Operator.identity(projectors[0].dims)
        expected = Operator.zeros(projectors[0].dims)
        for p, g in zip(projectors, offsets):
            expected = expected + (p - g * ident)
        h_res = (hamiltonian - expected).norm_max()
        clauses.append(ClauseResult("hamiltonian", h_res <= tol, h_res))
    return AssumptionReport(tuple(clauses), tuple(offsets))
