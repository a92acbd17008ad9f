import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm
from scipy.stats import unitary_group

from dissipative_qec.aqec import (
    ErrorSet,
    check_recovery_rates,
    check_syndrome_conditions,
    control_liouvillian,
    default_horizon,
    run_error_correction_experiment,
    run_parallel_noise_experiment,
)
from dissipative_qec.liouville import build_liouvillian, evolve, vec
from dissipative_qec.operators import DimensionMismatchError, Operator, ket, pauli_string
from dissipative_qec.synthesis import ControlEntry, ControlSet

from conftest import FLIPS

PSI = (ket("000") + 1j * ket("111")) / np.sqrt(2)


@pytest.fixture(scope="module")
def flip_errors():
    return ErrorSet.from_paulis(FLIPS, 3)


def parallel_noise_oracle(kappa, gamma):
    """Code-space population and fidelity to PSI in the long-time limit.

    Bit-flip noise moves the code space into single-flip states at rate
    3*gamma; single-flip states return at kappa + gamma and move on to
    double-flip states at 2*gamma, which mirror the single-flip ones. The
    populations solve a two-level rate balance; the logical coherence
    decays to zero, leaving half of the code population on PSI.
    """
    pop = (kappa + gamma) / (kappa + 4 * gamma)
    return pop, pop / 2


def test_syndrome_conditions_hold_for_single_flips(rep_model, product_build, flip_errors):
    rep = check_syndrome_conditions(rep_model, product_build.controls, flip_errors)
    assert rep.verdict
    assert len(rep.records) == 6
    for r in rep.records:
        assert r.syndrome_self_residual <= 1e-12 and r.syndrome_other_residual <= 1e-12


def test_unmatched_errors_are_reported(rep_model, product_build):
    errs = ErrorSet.from_paulis(["III", "XXI"], 3)
    rep = check_syndrome_conditions(rep_model, product_build.controls, errs)
    assert not rep.verdict
    for label in ("III", "XXI"):
        recs = rep.for_error(label)
        assert recs and all(not r.passed and "no matching control" in r.note for r in recs)


def test_error_set_length_checked():
    with pytest.raises(DimensionMismatchError):
        ErrorSet.from_paulis(["XX"], 3)


@pytest.mark.parametrize("strength", [1.0, 4.0, 0.3])
def test_recovery_rate_scales_with_strength(rep_model, product_build, flip_errors, strength):
    liou = control_liouvillian(rep_model, product_build.controls.with_strength(strength))
    rep = check_recovery_rates(liou, rep_model.ground_basis, flip_errors)
    assert rep.verdict
    rates = rep.rates()
    assert len(rates) == 12
    assert np.allclose(rates, strength, atol=1e-9)


def test_zero_generator_keeps_code_but_does_not_recover(rep_model, flip_errors):
    liou = build_liouvillian(Operator.zeros(rep_model.dims), [])
    rep = check_recovery_rates(liou, rep_model.ground_basis, flip_errors)
    inv = [r for r in rep.records if r.error is None]
    rec = [r for r in rep.records if r.error is not None]
    assert all(r.passed for r in inv)
    assert not any(r.passed for r in rec)


def test_naive_controls_do_not_recover_exponentially(rep_model, naive, flip_errors):
    # a single flip trips two naive controls, one of which pushes further away
    liou = control_liouvillian(rep_model, naive)
    rep = check_recovery_rates(liou, rep_model.ground_basis, flip_errors)
    assert not rep.verdict
    assert all(r.recovery_residual > 0.1 for r in rep.records if r.error is not None)


def test_rates_do_not_depend_on_ground_basis(rep_model, product_build, flip_errors):
    liou = control_liouvillian(rep_model, product_build.controls)
    mix = unitary_group.rvs(2, random_state=7)
    basis = rep_model.ground_basis @ mix
    rep = check_recovery_rates(liou, basis, flip_errors)
    assert rep.verdict and np.allclose(rep.rates(), 1.0, atol=1e-9)


def test_flip_on_third_qubit_is_undone(rep_model, product_build):
    liou = control_liouvillian(rep_model, product_build.controls)
    horizon = default_horizon(1.0)
    res = run_error_correction_experiment(
        liou, PSI, pauli_string("IIX"), horizon, 201, ground_basis=rep_model.ground_basis
    )
    t = res.trajectory.times
    assert np.allclose(res.trajectory.fidelity, 1 - np.exp(-t), atol=2e-7)
    assert res.final_fidelity >= 1 - 1e-6
    # coherence between the code vectors returns to its initial value
    a, b = rep_model.ground_basis[:, 0], rep_model.ground_basis[:, 1]
    initial = (a.conj() @ PSI) * np.conj(b.conj() @ PSI)
    assert abs(res.coherence[-1] - initial) <= 1e-6


def test_identity_error_leaves_state(rep_model, product_build):
    liou = control_liouvillian(rep_model, product_build.controls)
    res = run_error_correction_experiment(liou, PSI, Operator.identity(rep_model.dims), 5.0, 11)
    assert np.all(np.abs(res.trajectory.fidelity - 1) <= 1e-10)


def test_double_flip_is_miscorrected(rep_model, product_build):
    liou = control_liouvillian(rep_model, product_build.controls)
    res = run_error_correction_experiment(
        liou, PSI, pauli_string("XXI"), 40.0, 41, ground_basis=rep_model.ground_basis
    )
    final = res.trajectory.final_state
    proj = rep_model.code_projector.data
    # ends in the code space, but on the wrong logical state
    assert abs(np.trace(proj @ final).real - 1) <= 1e-8
    assert res.final_fidelity < 0.5


def test_leaked_initial_state_rejected(rep_model, product_build):
    liou = control_liouvillian(rep_model, product_build.controls)
    with pytest.raises(ValueError, match="ground space"):
        run_error_correction_experiment(liou, ket("001"), pauli_string("IIX"), 1.0, 3, rep_model.ground_basis)


def test_non_unitary_error_warns_and_renormalizes(rep_model, product_build):
    liou = control_liouvillian(rep_model, product_build.controls)
    with pytest.warns(UserWarning, match="non-unitary"):
        res = run_error_correction_experiment(liou, PSI, 0.5 * pauli_string("IIX"), 1.0, 3)
    assert np.allclose(res.trajectory.trace, 1, atol=1e-12)


def test_no_noise_keeps_state(rep_model, product_build, flip_errors):
    res = run_parallel_noise_experiment(rep_model, product_build.controls, flip_errors, 0.0, 1.0, 5.0, 11, rho0=PSI)
    assert res.steady_state_fidelity == pytest.approx(1, abs=1e-9)


def test_noise_without_controls_mixes(rep_model, product_build, flip_errors):
    res = run_parallel_noise_experiment(rep_model, product_build.controls, flip_errors, 1.0, 0.0, 5.0, 11, rho0=PSI)
    # bit flips alone: the mixture over one parity sector, code population 1/4
    assert res.code_space_population == pytest.approx(0.25, abs=1e-9)
    assert res.steady_state_fidelity == pytest.approx(0.125, abs=1e-9)


def test_parity_makes_the_kernel_degenerate(rep_model, product_build, flip_errors):
    res = run_parallel_noise_experiment(rep_model, product_build.controls, flip_errors, 1.0, 50.0, 1.0, 3, rho0=PSI)
    assert res.kernel_dim == 2
    parity = pauli_string("XXX").data
    assert abs(np.trace(parity @ res.steady_state) - PSI.conj() @ parity @ PSI) <= 1e-9


@pytest.mark.parametrize("ratio", [1, 2, 5, 10, 50])
def test_parallel_noise_matches_rate_balance(rep_model, product_build, flip_errors, ratio):
    res = run_parallel_noise_experiment(rep_model, product_build.controls, flip_errors, 1.0, float(ratio), 1.0, 3, rho0=PSI)
    pop, fid = parallel_noise_oracle(ratio, 1.0)
    assert res.code_space_population == pytest.approx(pop, abs=1e-9)
    assert res.steady_state_fidelity == pytest.approx(fid, abs=1e-9)


def test_parallel_noise_limit_matches_long_evolution(rep_model, product_build, flip_errors):
    res = run_parallel_noise_experiment(rep_model, product_build.controls, flip_errors, 1.0, 5.0, 1.0, 3, rho0=PSI)
    liou = control_liouvillian(rep_model, product_build.controls.with_strength(5.0), flip_errors, 1.0)
    rho = np.outer(PSI, PSI.conj())
    late = (expm(liou.matrix * 200.0) @ vec(rho)).reshape(8, 8, order="F")
    assert np.allclose(res.steady_state, late, atol=1e-9)


def test_parallel_noise_rejects_negative_strength(rep_model, product_build, flip_errors):
    with pytest.raises(ValueError):
        run_parallel_noise_experiment(rep_model, product_build.controls, flip_errors, -1.0, 1.0, 1.0)


def _rotated(rep_model, product_build, w):
    """Conjugate the code, controls and errors by a local unitary."""
    big = Operator(np.kron(np.kron(w, w), w))
    rot = lambda op: big @ op @ big.dag()
    entries = [
        ControlEntry(e.index, rot(e.unitary), rot(e.dissipative_product), e.strength) for e in product_build.controls
    ]
    errs = ErrorSet(tuple(type(e)(e.label, rot(e.operator)) for e in ErrorSet.from_paulis(FLIPS, 3)), (2, 2, 2))
    return ControlSet(tuple(entries)), errs, big.data @ rep_model.ground_basis, big


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_syndrome_conditions_imply_unit_rates_in_any_local_frame(rep_model, product_build, seed):
    w = unitary_group.rvs(2, random_state=seed)
    controls, errs, basis, big = _rotated(rep_model, product_build, w)

    class Rotated:
        ground_basis = basis

    assert check_syndrome_conditions(Rotated, controls, errs).verdict
    h = big @ rep_model.hamiltonian @ big.dag()
    liou = build_liouvillian(h, [(e.unitary @ e.dissipative_product, 1.0) for e in controls])
    rep = check_recovery_rates(liou, basis, errs)
    assert rep.verdict and np.allclose(rep.rates(), 1.0, atol=1e-9)


def test_evolution_of_recovered_state_is_stationary(rep_model, product_build):
    liou = control_liouvillian(rep_model, product_build.controls)
    bad = pauli_string("XII").data @ PSI
    final = evolve(liou, bad, [0.0, 30.0]).states[-1]
    assert abs(PSI.conj() @ final @ PSI - 1) <= 1e-9
