"""Automatic error correction: syndrome conditions, recovery rates, experiments."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .liouville import (
    Channel,
    Liouvillian,
    Trajectory,
    asymptotic_state,
    build_liouvillian,
    evolve,
    kernel_dimension,
    state_fidelity,
    unvec,
    vec,
)
from .operators import EPS_UNIT, DimensionMismatchError, Operator, pauli_string
from .stabilizer import StabilizerModel
from .synthesis import ControlSet

log = logging.getLogger(__name__)

SYNDROME_TOL = 1e-9
INVARIANCE_TOL = 1e-9
FIT_TOL = 1e-8
MATCH_TOL = 1e-10


@dataclass(frozen=True)
class ErrorOperator:
    label: str
    operator: Operator


@dataclass(frozen=True)
class ErrorSet:
    errors: tuple[ErrorOperator, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        n = int(np.prod(self.dims))
        for e in self.errors:
            if e.operator.size != n:
                raise DimensionMismatchError(f"error {e.label} has size {e.operator.size}, expected {n}")

    @classmethod
    def from_paulis(cls, specs: Sequence[str], n_qubits: int) -> "ErrorSet":
        errs = []
        for s in specs:
            if len(s) != n_qubits:
                raise DimensionMismatchError(f"error spec {s} has length {len(s)}, expected {n_qubits}")
            errs.append(ErrorOperator(s.upper(), pauli_string(s)))
        return cls(tuple(errs), (2,) * n_qubits)

    def __iter__(self):
        return iter(self.errors)

    def __len__(self):
        return len(self.errors)


@dataclass(frozen=True)
class AqecRecord:
    error: str | None
    p: int
    q: int | None = None
    matched_control: int | None = None
    invariance_residual: float | None = None
    recovery_residual: float | None = None
    rate: float | None = None
    syndrome_self_residual: float | None = None
    syndrome_other_residual: float | None = None
    passed: bool = False
    note: str = ""


@dataclass(frozen=True)
class AqecReport:
    records: tuple[AqecRecord, ...]

    @property
    def verdict(self) -> bool:
        return all(r.passed for r in self.records)

    def for_error(self, label: str) -> list[AqecRecord]:
        return [r for r in self.records if r.error == label]

    def rates(self) -> list[float]:
        return [r.rate for r in self.records if r.rate is not None]


def match_error(error: Operator, controls: ControlSet) -> int | None:
    """Position of the control whose unitary adjoint equals ``error``."""
    best, best_pos = np.inf, None
    for pos, e in enumerate(controls):
        d = (error - e.unitary.dag()).norm_max()
        if d < best:
            best, best_pos = d, pos
    return best_pos if best <= MATCH_TOL else None


def check_syndrome_conditions(model: StabilizerModel, controls: ControlSet, errors: ErrorSet) -> AqecReport:
    """Errors ``U_i^dag`` must excite only their own syndrome projector.

    For each ground vector ``p`` and error matched to control ``i``: the
    erroneous vector lies in the range of ``V_i'`` and in the kernel of every
    other ``V_j'``. Errors that match no control are recorded as failures.
    """
    basis = model.ground_basis
    entries = list(controls)
    records = []
    for err in errors:
        pos = match_error(err.operator, controls)
        if pos is None:
            for p in range(basis.shape[1]):
                records.append(AqecRecord(err.label, p, note="no matching control: uncorrectable by syndrome pairing"))
            continue
        own = entries[pos]
        for p in range(basis.shape[1]):
            bad = own.unitary.dag() @ basis[:, p]
            self_res = float(np.linalg.norm(own.dissipative_product @ bad - bad))
            other = [float(np.linalg.norm(e.dissipative_product @ bad)) for k, e in enumerate(entries) if k != pos]
            other_res = max(other, default=0.0)
            ok = self_res <= SYNDROME_TOL and other_res <= SYNDROME_TOL
            records.append(
                AqecRecord(
                    err.label, p, matched_control=own.index,
                    syndrome_self_residual=self_res, syndrome_other_residual=other_res, passed=ok,
                )
            )
    return AqecReport(tuple(records))


def _fit_rate(l_x: np.ndarray, x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    # least squares for L(x) = kappa * (y - x) over real kappa
    d = y - x
    dd = float(np.real(np.vdot(d, d)))
    if dd <= 1e-24:
        return 0.0, float(np.max(np.abs(l_x)))
    kappa = float(np.real(np.vdot(d, l_x))) / dd
    return kappa, float(np.max(np.abs(l_x - kappa * d)))


def check_recovery_rates(liouvillian: Liouvillian, ground_basis: np.ndarray, errors: ErrorSet, tol: float = 1e-9) -> AqecReport:
    """Invariance of the code operators and exponential recovery from errors.

    Every ``|p><q|`` must be annihilated by the generator, and
    ``L(E|p><q|E^dag)`` must equal ``kappa_pq (|p><q| - E|p><q|E^dag)`` with a
    positive fitted ``kappa_pq``.
    """
    n = liouvillian.dim
    k = ground_basis.shape[1]
    records = []
    for p in range(k):
        for q in range(k):
            y = np.outer(ground_basis[:, p], ground_basis[:, q].conj())
            res = float(np.max(np.abs(liouvillian.apply(y))))
            records.append(AqecRecord(None, p, q, invariance_residual=res, passed=res <= INVARIANCE_TOL))
    for err in errors:
        e = err.operator.data
        for p in range(k):
            for q in range(k):
                y = np.outer(ground_basis[:, p], ground_basis[:, q].conj())
                x = e @ y @ e.conj().T
                lx = unvec(liouvillian.matrix @ vec(x), n)
                kappa, res = _fit_rate(lx, x, y)
                records.append(
                    AqecRecord(
                        err.label, p, q, recovery_residual=res, rate=kappa,
                        passed=res <= FIT_TOL and kappa >= tol,
                    )
                )
    return AqecReport(tuple(records))


def control_liouvillian(
    model: StabilizerModel,
    controls: ControlSet,
    noise: ErrorSet | None = None,
    gamma: float = 0.0,
    include_hamiltonian: bool = True,
) -> Liouvillian:
    chans = [Channel(f"control{e.index + 1}", e.unitary @ e.dissipative_product, e.strength) for e in controls]
    if noise is not None:
        chans += [Channel(f"noise:{err.label}", err.operator, gamma) for err in noise]
    h = model.hamiltonian if include_hamiltonian else Operator.zeros(model.dims)
    return build_liouvillian(h, chans)


def default_horizon(rate: float) -> float:
    """Time after which a mode decaying at ``rate`` is below ``e^-20``."""
    return 20.0 / rate


@dataclass(frozen=True, eq=False)
class CorrectionResult:
    trajectory: Trajectory
    final_fidelity: float
    coherence: np.ndarray  # <a|rho_t|b> for the first two code vectors, if present


def _in_code_space(rho: np.ndarray, basis: np.ndarray) -> float:
    proj = basis @ basis.conj().T
    return float(np.max(np.abs(proj @ rho @ proj - rho)))


def run_error_correction_experiment(
    liouvillian: Liouvillian,
    rho0,
    error: Operator,
    t_final: float,
    samples: int,
    ground_basis: np.ndarray | None = None,
) -> CorrectionResult:
    """Apply ``error`` to a code state and let the controls relax it.

    Fidelity is measured against the original ``rho0``.
    """
    rho0 = np.asarray(rho0.data if isinstance(rho0, Operator) else rho0, dtype=complex)
    if rho0.ndim == 1:
        rho0 = np.outer(rho0, rho0.conj())
    if ground_basis is not None:
        leak = _in_code_space(rho0, ground_basis)
        if leak > 1e-6:
            raise ValueError(f"initial state lies outside the ground space (residual {leak:.3e})")
    e = error.data
    bad = e @ rho0 @ e.conj().T
    if not error.is_unitary(EPS_UNIT):
        tr = float(np.real(np.trace(bad)))
        warnings.warn("non-unitary error operator; renormalizing the erroneous state", stacklevel=2)
        bad = bad / tr
    times = np.linspace(0.0, t_final, samples) if t_final > 0 else np.array([0.0])
    traj = evolve(liouvillian, bad, times, target=rho0)
    if ground_basis is not None and ground_basis.shape[1] >= 2:
        a, b = ground_basis[:, 0], ground_basis[:, 1]
        coh = np.array([a.conj() @ s @ b for s in traj.states])
    else:
        coh = np.array([])
    return CorrectionResult(traj, float(traj.fidelity[-1]), coh)


@dataclass(frozen=True, eq=False)
class NoiseResult:
    kappa: float
    gamma: float
    trajectory: Trajectory
    steady_state_fidelity: float
    code_space_population: float
    kernel_dim: int
    steady_state: np.ndarray


def run_parallel_noise_experiment(
    model: StabilizerModel,
    controls: ControlSet,
    noise: ErrorSet,
    gamma: float,
    kappa: float,
    t_final: float,
    samples: int = 201,
    rho0=None,
) -> NoiseResult:
    """Controls at strength ``kappa`` running alongside noise at strength ``gamma``.

    The stationary state is the long-time limit reached from ``rho0``
    (default: first code vector), obtained from the left/right kernel of
    the generator, so conserved quantities are respected when the kernel is
    degenerate.
    """
    if kappa < 0 or gamma < 0:
        raise ValueError("kappa and gamma must be non-negative")
    if rho0 is None:
        rho0 = model.ground_basis[:, 0]
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.ndim == 1:
        rho0 = np.outer(rho0, rho0.conj())
    liou = control_liouvillian(model, controls.with_strength(kappa), noise, gamma)
    times = np.linspace(0.0, t_final, samples) if t_final > 0 else np.array([0.0])
    traj = evolve(liou, rho0, times, target=rho0)
    ss = asymptotic_state(liou, rho0)
    kdim = kernel_dimension(liou)
    proj = model.code_projector.data
    return NoiseResult(
        kappa, gamma, traj,
        state_fidelity(ss, rho0),
        float(np.real(np.trace(proj @ ss))),
        kdim, ss,
    )
