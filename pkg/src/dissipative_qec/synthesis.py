"""Construction and Lyapunov certification of dissipation controls.

All operator inequalities are reduced to Hermitian eigenvalue problems.
Rates ("largest c with G + cP <= 0") are generalized eigenvalues restricted
to the support of the projector ``P``; on its kernel both sides vanish.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .operators import (
    EPS_HERM,
    EPS_UNIT,
    SEMIDEFINITE_TOL,
    DimensionMismatchError,
    Operator,
    OperatorError,
    commutator,
    is_negative_semidefinite,
    range_basis,
    spectral_decompose,
)
from .stabilizer import StabilizerModel

log = logging.getLogger(__name__)

COMMUTE_TOL = 1e-10


class Condition(str, enum.Enum):
    LOCAL = "local_stabilization"
    STRONG_SCALABILITY = "strong_scalability"
    DISSIPATIVE_SUBSET = "dissipative_subset"
    COVERAGE = "coverage_lambda"
    GLOBAL = "global"


class SynthesisError(ValueError):
    pass


class DissipativeSetViolation(SynthesisError):
    def __init__(self, index: int, member: int, witness: np.ndarray, worst: float):
        self.index, self.member, self.witness, self.worst = index, member, witness, worst
        super().__init__(
            f"projector {member + 1} in the dissipative set of control {index + 1} is raised by its unitary "
            f"(max eigenvalue {worst:.3e})"
        )


class CoverageViolation(SynthesisError):
    def __init__(self, lam: float, witness: np.ndarray):
        self.lam, self.witness = lam, witness
        super().__init__(f"sum of dissipative products does not dominate the total: lambda = {lam:.6g}")


@dataclass(frozen=True)
class StabilityCertificate:
    """Outcome of one operator-inequality check.

    For plain semidefinite checks ``worst_eigenvalue`` is the largest
    eigenvalue of the tested Hermitian difference and ``verdict`` is
    ``worst_eigenvalue <= tol``. For rate checks ``rate`` is the certified
    constant, ``worst_eigenvalue`` the largest eigenvalue of the restricted
    generator part (``-rate`` when the restriction is exact) and ``verdict``
    is ``rate > tol``.
    """

    condition: Condition
    verdict: bool
    rate: float
    worst_eigenvalue: float
    witness: np.ndarray
    index: int | None = None
    residual: Operator | None = None
    bound: float | None = None


@dataclass(frozen=True, eq=False)
class ControlEntry:
    index: int
    unitary: Operator
    dissipative_product: Operator
    strength: float = 1.0

    @property
    def coupling(self) -> Operator:
        return math.sqrt(self.strength) * (self.unitary @ self.dissipative_product)


@dataclass(frozen=True, eq=False)
class ControlSet:
    entries: tuple[ControlEntry, ...]

    def __post_init__(self):
        for e in self.entries:
            if e.strength < 0:
                raise SynthesisError(f"control {e.index + 1} has negative strength {e.strength}")
            if not e.unitary.is_unitary(EPS_UNIT):
                raise SynthesisError(f"control {e.index + 1} unitary is not unitary")
            if not e.dissipative_product.is_projector(EPS_HERM):
                raise SynthesisError(f"control {e.index + 1} dissipative product is not a projector")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def couplings(self) -> list[Operator]:
        return [e.coupling for e in self.entries]

    def with_strength(self, strength: float) -> "ControlSet":
        return ControlSet(tuple(ControlEntry(e.index, e.unitary, e.dissipative_product, strength) for e in self.entries))


def naive_controls(model: StabilizerModel, unitaries: Sequence[Operator], strength: float = 1.0) -> ControlSet:
    """One control ``U_i V_i`` per projector."""
    if len(unitaries) != len(model.projectors):
        raise SynthesisError(f"{len(unitaries)} unitaries for {len(model.projectors)} projectors")
    return ControlSet(tuple(ControlEntry(i, u, p, strength) for i, (u, p) in enumerate(zip(unitaries, model.projectors))))


def _check_sizes(*ops: Operator):
    n = ops[0].size
    for op in ops[1:]:
        if op.size != n:
            raise DimensionMismatchError(f"operand sizes differ: {n} vs {op.size}")


def _dissipator_dual(x: np.ndarray, lop: np.ndarray) -> np.ndarray:
    ld = lop.conj().T
    ll = ld @ lop
    return ld @ x @ lop - 0.5 * (ll @ x + x @ ll)


def heisenberg_generator(x: Operator, h: Operator, couplings: Sequence[Operator]) -> Operator:
    """Adjoint Lindblad generator ``-i[X,H] + sum_j (L^dag X L - {L^dag L, X}/2)``."""
    _check_sizes(x, h, *couplings)
    xd, hd = x.data, h.data
    out = -1j * (xd @ hd - hd @ xd)
    for lop in couplings:
        out = out + _dissipator_dual(xd, lop.data)
    return Operator(out, x.dims)


def single_control_generator(v: Operator, h: Operator, coupling: Operator, cross: bool = False) -> Operator:
    """Generator of ``v`` induced by one coupling.

    With ``cross=True`` the Hamiltonian commutator is dropped; this is the
    contribution of a foreign control, so that summing one own term and all
    cross terms counts the Hamiltonian exactly once.
    """
    _check_sizes(v, h, coupling)
    out = _dissipator_dual(v.data, coupling.data)
    if not cross:
        out = out - 1j * (v.data @ h.data - h.data @ v.data)
    return Operator(out, v.dims)


def _restricted_rate(gen: Operator, proj: Operator) -> tuple[float, float, np.ndarray]:
    """Largest ``c`` with ``gen + c*proj <= 0`` on range(proj).

    Returns ``(c, worst, witness)`` where worst is the largest generalized
    eigenvalue of ``gen`` relative to ``proj``.
    """
    q = range_basis(proj)
    if q.shape[1] == 0:
        return 0.0, 0.0, np.zeros(proj.size, dtype=complex)
    g = q.conj().T @ gen.data @ q
    g = 0.5 * (g + g.conj().T)
    b = q.conj().T @ proj.data @ q
    b = 0.5 * (b + b.conj().T)
    w, v = sla.eigh(g, b)
    worst = float(w[-1])
    return -worst, worst, q @ v[:, -1]


def _require_projector(p: Operator, what: str = "V_i"):
    if not p.is_projector(EPS_HERM):
        raise OperatorError(f"{what} is not an orthogonal projector")


def check_local_stabilization(v: Operator, unitaries: Sequence[Operator], tol: float = SEMIDEFINITE_TOL) -> StabilityCertificate:
    """Largest ``c`` with ``sum_j (V U_j^dag V U_j V - V) <= -c V``."""
    _require_projector(v)
    for k, u in enumerate(unitaries):
        _check_sizes(v, u)
        if not u.is_unitary(EPS_UNIT):
            raise OperatorError(f"entry {k + 1} is not unitary")
    vd = v.data
    m = np.zeros_like(vd)
    for u in unitaries:
        ud = u.data
        m = m + vd @ ud.conj().T @ vd @ ud @ vd - vd
    residual = Operator(m, v.dims)
    c, worst, wit = _restricted_rate(residual, v)
    c = max(c, 0.0) if c > -tol else c
    return StabilityCertificate(Condition.LOCAL, c > tol, c, worst, wit, residual=residual)


def kernel_swap_unitaries(v: Operator, ground_choice: int = 0, tol: float = 1e-9) -> list[Operator]:
    """Unitaries swapping one ground vector with each excited eigenvector of ``v``.

    For each eigenvector ``|j>`` with eigenvalue 1 the unitary is
    ``|j><0| + |0><j| + sum_{n != 0, j} |n><n|``; together they stabilize
    ``v`` at rate exactly 1. ``ground_choice`` picks which kernel vector
    plays ``|0>``.
    """
    _require_projector(v)
    w, vecs = spectral_decompose(v)
    ground = np.flatnonzero(np.abs(w) <= tol)
    excited = np.flatnonzero(w > tol)
    if excited.size == 0:
        return []
    if ground.size == 0:
        raise SynthesisError("projector has an empty kernel: no ground vector to swap into")
    g = vecs[:, ground[ground_choice % ground.size]]
    ident = np.eye(v.size, dtype=complex)
    g_proj = np.outer(g, g.conj())
    out = []
    for j in excited:
        e = vecs[:, j]
        u = ident - g_proj - np.outer(e, e.conj()) + np.outer(e, g.conj()) + np.outer(g, e.conj())
        out.append(Operator(u, v.dims))
    return out


def check_strong_scalability(
    model: StabilizerModel, controls: ControlSet, tol: float = SEMIDEFINITE_TOL
) -> list[StabilityCertificate]:
    """Per projector, test that the foreign controls do not raise it."""
    projectors = model.projectors
    if {e.index for e in controls} - set(range(len(projectors))):
        raise SynthesisError("control indices do not align with the model projectors")
    certs = []
    for i, v in enumerate(projectors):
        total = np.zeros((v.size, v.size), dtype=complex)
        for e in controls:
            if e.index == i:
                continue
            total = total + single_control_generator(v, model.hamiltonian, e.coupling, cross=True).data
        residual = Operator(total, v.dims)
        nsd = is_negative_semidefinite(residual, tol)
        certs.append(
            StabilityCertificate(
                Condition.STRONG_SCALABILITY, nsd.verdict, 0.0, nsd.worst_eigenvalue, nsd.witness_vector, i, residual
            )
        )
    return certs


@dataclass(frozen=True, eq=False)
class ControlBuild:
    controls: ControlSet
    neutral: tuple[tuple[int, ...], ...]
    dissipative: tuple[tuple[int, ...], ...]
    dissipative_certificates: tuple[tuple[StabilityCertificate, ...], ...]
    coverage: StabilityCertificate
    warnings: tuple[str, ...] = field(default=())

    @property
    def verdict(self) -> bool:
        return self.coverage.verdict and all(c.verdict for row in self.dissipative_certificates for c in row)

    @property
    def lam(self) -> float:
        return self.coverage.rate


def partition_and_build_controls(
    model: StabilizerModel,
    unitaries: Sequence[Operator],
    strength: float = 1.0,
    tol: float = SEMIDEFINITE_TOL,
    strict: bool = True,
) -> ControlBuild:
    """Restrict each control to the projectors its unitary disturbs.

    Projectors commuting with ``U_i`` form the neutral set, the rest the
    dissipative set. Each dissipative member must not be raised by ``U_i``;
    the control becomes ``U_i * prod(dissipative set)``. Finally the largest
    ``lam`` with ``sum_i prod_i >= lam * V`` is extracted.

    With ``strict`` a failed condition raises; otherwise the failure is
    carried in the returned certificates.
    """
    projectors = model.projectors
    if len(unitaries) != len(projectors):
        raise SynthesisError(f"{len(unitaries)} unitaries for {len(projectors)} projectors")
    dims = model.dims
    ident = Operator.identity(dims)
    neutral, dissipative, certs_all, entries, warns = [], [], [], [], []
    for i, u in enumerate(unitaries):
        n_set, d_set, certs = [], [], []
        for j, vj in enumerate(projectors):
            if commutator(vj, u).norm_max() <= COMMUTE_TOL:
                n_set.append(j)
            else:
                d_set.append(j)
        if i in n_set:
            msg = f"unitary {i + 1} commutes with its own projector; it lands in the neutral set"
            log.warning(msg)
            warns.append(msg)
        product = ident
        for d in d_set:
            vd = projectors[d]
            diff = vd @ u.dag() @ vd @ u @ vd - vd
            nsd = is_negative_semidefinite(diff, tol)
            cert = StabilityCertificate(
                Condition.DISSIPATIVE_SUBSET, nsd.verdict, 0.0, nsd.worst_eigenvalue, nsd.witness_vector, i, diff
            )
            if strict and not cert.verdict:
                raise DissipativeSetViolation(i, d, nsd.witness_vector, nsd.worst_eigenvalue)
            certs.append(cert)
            product = product @ vd
        neutral.append(tuple(n_set))
        dissipative.append(tuple(d_set))
        certs_all.append(tuple(certs))
        entries.append(ControlEntry(i, u, product, strength))

    cover = Operator.zeros(dims)
    for e in entries:
        cover = cover + e.dissipative_product
    coverage = _coverage_certificate(cover, model.total, tol)
    if strict and not coverage.verdict:
        raise CoverageViolation(coverage.rate, coverage.witness)
    return ControlBuild(
        ControlSet(tuple(entries)), tuple(neutral), tuple(dissipative), tuple(certs_all), coverage, tuple(warns)
    )


def _coverage_certificate(cover: Operator, total: Operator, tol: float) -> StabilityCertificate:
    # lam = min over range(V) of <v,S v>/<v,V v>, i.e. largest rate of (-S) against V
    lam, worst, wit = _restricted_rate(-cover, total)
    full = is_negative_semidefinite(lam * total - cover, tol)
    if not full.verdict:
        wit = full.witness_vector
    return StabilityCertificate(Condition.COVERAGE, lam > tol and full.verdict, lam, worst, wit, residual=cover)


def local_rates(model: StabilizerModel, controls: ControlSet) -> list[float]:
    """Per-control local stabilization rate ``c_i`` scaled by its strength."""
    return [
        check_local_stabilization(model.projectors[e.index], [e.unitary]).rate * e.strength for e in controls
    ]


def certify_global_stability(
    model: StabilizerModel,
    controls: ControlSet,
    build: ControlBuild | None = None,
    tol: float = SEMIDEFINITE_TOL,
    hamiltonian: Operator | None = None,
) -> StabilityCertificate:
    """Largest ``c`` with ``G(V) <= -c V`` under the full control set.

    The candidate from the range restriction is confirmed on the full space;
    if kernel couplings spoil it, ``c`` is lowered by bisection (feasibility
    is monotone in ``c`` since ``V >= 0``). When partition data is passed,
    ``bound`` carries the analytic lower bound ``c_min * lam``.
    """
    h = model.hamiltonian if hamiltonian is None else hamiltonian
    v = model.total
    gen = heisenberg_generator(v, h, controls.couplings)
    c, worst, wit = _restricted_rate(gen, v)

    def feasible(cc: float):
        return is_negative_semidefinite(gen + cc * v, tol)

    full = feasible(c)
    if not full.verdict:
        lo, hi = 0.0, max(c, 0.0)
        if not feasible(lo).verdict:
            c, wit = 0.0, feasible(lo).witness_vector
        else:
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if feasible(mid).verdict:
                    lo = mid
                else:
                    hi = mid
            c = lo
            wit = full.witness_vector
    c = max(c, 0.0) if c > -tol else c

    bound = None
    if build is not None:
        rates = local_rates(model, controls)
        bound = (min(rates) if rates else 0.0) * build.lam
    return StabilityCertificate(Condition.GLOBAL, c > tol, c, worst, wit, residual=gen, bound=bound)
