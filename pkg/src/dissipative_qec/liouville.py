"""Column-stacked Lindblad superoperator, propagation and stationary states.

With ``vec`` stacking columns, ``vec(B1 B2 B3) = (B3^T kron B1) vec(B2)``
fixes the layout of the generator matrix.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .operators import DimensionMismatchError, Operator

log = logging.getLogger(__name__)

KERNEL_RTOL = 1e-9
STATE_TOL = 1e-9


class InvalidStateError(ValueError):
    pass


class LiouvillianConsistencyError(RuntimeError):
    pass


def vec(m) -> np.ndarray:
    arr = m.data if isinstance(m, Operator) else np.asarray(m)
    return arr.reshape(-1, order="F")


def unvec(v: np.ndarray, n: int | None = None) -> np.ndarray:
    if n is None:
        n = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape(n, n, order="F")


@dataclass(frozen=True)
class Channel:
    label: str
    operator: Operator
    strength: float


@dataclass(frozen=True, eq=False)
class Liouvillian:
    matrix: np.ndarray
    dim: int
    dims: tuple[int, ...]
    channels: tuple[Channel, ...] = field(default=())
    hamiltonian: Operator | None = None

    def apply(self, rho) -> np.ndarray:
        """``L(rho)`` as an ``N x N`` array."""
        return unvec(self.matrix @ vec(rho), self.dim)


def build_liouvillian(h: Operator | None, channels: Sequence = ()) -> Liouvillian:
    """Assemble ``A`` with ``d vec(rho)/dt = A vec(rho)``.

    ``channels`` holds ``(operator, strength)`` or ``(label, operator,
    strength)`` tuples, or :class:`Channel` objects; the strength multiplies
    the dissipator (equivalently ``sqrt(strength)`` scales the operator).
    """
    chans: list[Channel] = []
    for k, c in enumerate(channels):
        if isinstance(c, Channel):
            chans.append(c)
        elif len(c) == 2:
            chans.append(Channel(f"L{k + 1}", c[0], float(c[1])))
        else:
            chans.append(Channel(str(c[0]), c[1], float(c[2])))
    if h is None and not chans:
        raise ValueError("need a Hamiltonian or at least one channel to fix the dimension")
    ref = h if h is not None else chans[0].operator
    n = ref.size
    for c in chans:
        if c.operator.size != n:
            raise DimensionMismatchError(f"channel {c.label} has size {c.operator.size}, expected {n}")
        if c.strength < 0:
            raise ValueError(f"channel {c.label} has negative strength {c.strength}")

    ident = np.eye(n, dtype=complex)
    a = np.zeros((n * n, n * n), dtype=complex)
    if h is not None:
        if h.size != n:
            raise DimensionMismatchError("Hamiltonian size mismatch")
        a += -1j * (np.kron(ident, h.data) - np.kron(h.data.T, ident))
    for c in chans:
        if c.strength == 0:
            continue
        lop = c.operator.data
        ll = lop.conj().T @ lop
        a += c.strength * (np.kron(lop.conj(), lop) - 0.5 * np.kron(ident, ll) - 0.5 * np.kron(ll.T, ident))
    return Liouvillian(a, n, ref.dims, tuple(chans), h)


def state_fidelity(rho: np.ndarray, target: np.ndarray) -> float:
    """Fidelity to a target density matrix.

    For a pure target this is ``<psi|rho|psi>``; mixed targets use the
    Uhlmann form.
    """
    w, v = np.linalg.eigh(0.5 * (target + target.conj().T))
    if np.sum(w > 1e-12) <= 1:
        psi = v[:, -1] * np.sqrt(max(w[-1], 0.0))
        return float(np.real(psi.conj() @ rho @ psi))
    sq = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    inner = sla.sqrtm(sq @ rho @ sq)
    return float(np.real(np.trace(inner)) ** 2)


def validate_density(rho: np.ndarray, tol: float = STATE_TOL) -> None:
    asym = float(np.max(np.abs(rho - rho.conj().T)))
    if asym > tol:
        raise InvalidStateError(f"initial state is not Hermitian (asymmetry {asym:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise InvalidStateError(f"initial state does not have unit trace (trace {tr.real:.12g})")
    mn = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    if mn < -tol:
        raise InvalidStateError(f"initial state is not positive semidefinite (min eigenvalue {mn:.3e})")


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (T, N, N)
    fidelity: np.ndarray | None
    trace: np.ndarray
    purity: np.ndarray

    def __len__(self):
        return self.times.size

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def rows(self):
        fid = self.fidelity if self.fidelity is not None else np.full(self.times.size, np.nan)
        return zip(self.times, fid, self.trace, self.purity)


def _as_density(rho) -> np.ndarray:
    if isinstance(rho, Operator):
        return np.array(rho.data)
    arr = np.asarray(rho, dtype=complex)
    if arr.ndim == 1:
        return np.outer(arr, arr.conj())
    return arr


def _is_uniform(times: np.ndarray) -> bool:
    if times.size < 3:
        return True
    d = np.diff(times)
    return bool(np.allclose(d, d[0], rtol=1e-12, atol=1e-14))


def evolve(
    liouvillian: Liouvillian,
    rho0,
    times: Sequence[float],
    target=None,
    validate: bool = True,
) -> Trajectory:
    """Exact propagation ``vec(rho_t) = exp(A t) vec(rho_0)`` on a time grid.

    Uniform grids reuse a single step propagator. States are re-symmetrized
    before observables are taken. ``rho0``/``target`` may be kets or
    density matrices.
    """
    rho = _as_density(rho0)
    if validate:
        validate_density(rho)
    t = np.asarray(times, dtype=float).reshape(-1)
    if t.size == 0:
        raise ValueError("empty time grid")
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly ascending")
    n = liouvillian.dim
    a = liouvillian.matrix
    v = vec(rho)
    states = np.empty((t.size, n, n), dtype=complex)
    cur = v if t[0] == 0 else sla.expm(a * t[0]) @ v
    states[0] = unvec(cur, n)
    if t.size > 1:
        if _is_uniform(t):
            step = sla.expm(a * (t[1] - t[0]))
            for k in range(1, t.size):
                cur = step @ cur
                states[k] = unvec(cur, n)
        else:
            for k in range(1, t.size):
                cur = sla.expm(a * (t[k] - t[k - 1])) @ cur
                states[k] = unvec(cur, n)
    states = 0.5 * (states + states.conj().transpose(0, 2, 1))
    trace = np.real(np.einsum("kii->k", states))
    purity = np.real(np.einsum("kij,kji->k", states, states))
    fid = None
    if target is not None:
        tgt = _as_density(target)
        fid = np.array([state_fidelity(s, tgt) for s in states])
    return Trajectory(t, states, fid, trace, purity)


@dataclass(frozen=True, eq=False)
class SteadyState:
    kernel_dim: int
    basis: tuple[np.ndarray, ...]  # kernel elements as N x N matrices
    state: np.ndarray | None  # unique stationary density matrix when kernel_dim == 1

    @property
    def degenerate(self) -> bool:
        return self.kernel_dim > 1


def _null_spaces(a: np.ndarray, rtol: float = KERNEL_RTOL) -> tuple[np.ndarray, np.ndarray]:
    u, s, vh = np.linalg.svd(a)
    smax = s[0] if s.size else 0.0
    thresh = rtol * smax if smax > 0 else 0.0
    mask = s <= thresh
    return vh.conj().T[:, mask], u[:, mask]


def kernel_dimension(liouvillian: Liouvillian, rtol: float = KERNEL_RTOL) -> int:
    return _null_spaces(liouvillian.matrix, rtol)[0].shape[1]


def steady_state(liouvillian: Liouvillian, rtol: float = KERNEL_RTOL) -> SteadyState:
    """Kernel of the generator; the stationary state if it is unique."""
    n = liouvillian.dim
    right, _ = _null_spaces(liouvillian.matrix, rtol)
    k = right.shape[1]
    if k == 0:
        raise LiouvillianConsistencyError("generator has no kernel; it cannot be trace preserving")
    basis = tuple(unvec(right[:, j], n) for j in range(k))
    state = None
    if k == 1:
        m = basis[0]
        tr = np.trace(m)
        if abs(tr) < 1e-12:
            raise LiouvillianConsistencyError("one-dimensional kernel element is traceless")
        state = m / tr
        state = 0.5 * (state + state.conj().T)
    return SteadyState(k, basis, state)


def asymptotic_state(liouvillian: Liouvillian, rho0, rtol: float = KERNEL_RTOL) -> np.ndarray:
    """``lim exp(A t) rho0`` via the spectral projector onto ker(A).

    Uses right and left null vectors, so degenerate kernels (conserved
    quantities) are handled; the projection is ``R (W^dag R)^-1 W^dag``.
    """
    n = liouvillian.dim
    right, left = _null_spaces(liouvillian.matrix, rtol)
    if right.shape[1] == 0:
        raise LiouvillianConsistencyError("generator has no kernel; it cannot be trace preserving")
    coeffs = np.linalg.solve(left.conj().T @ right, left.conj().T @ vec(_as_density(rho0)))
    out = unvec(right @ coeffs, n)
    return 0.5 * (out + out.conj().T)
