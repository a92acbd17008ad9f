"""Command line entry point: ``dqec check | simulate | aqec-verify``.

Exit status: 0 when every check passes, 1 when a stability or correction
condition fails, 2 for input or usage errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .aqec import (
    ErrorSet,
    check_recovery_rates,
    check_syndrome_conditions,
    control_liouvillian,
    run_parallel_noise_experiment,
)
from .liouville import evolve
from .operators import OperatorError, pauli_string
from .scenario import Scenario, ScenarioError, load_scenario
from .stabilizer import AssumptionError, build_model, verify_assumptions
from .synthesis import (
    SynthesisError,
    certify_global_stability,
    check_local_stabilization,
    check_strong_scalability,
    naive_controls,
    partition_and_build_controls,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("dqec")


class UsageError(Exception):
    pass


def _vector_json(v) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v).reshape(-1)]


def _controls_for(sc: Scenario, model, kappa: float):
    unitaries = [pauli_string(s) for s in sc.unitaries]
    build = partition_and_build_controls(model, unitaries, strength=kappa, strict=False)
    if sc.controls == "naive":
        return naive_controls(model, unitaries, kappa), build
    return build.controls, build


def _load(args) -> Scenario:
    try:
        sc = load_scenario(args.scenario)
    except FileNotFoundError:
        raise UsageError(f"scenario not found: {args.scenario}") from None
    except ScenarioError as exc:
        raise UsageError(f"{args.scenario}: {exc}") from None
    if getattr(args, "gamma", None) is not None:
        sc.gamma = args.gamma
    if getattr(args, "t_final", None) is not None:
        sc.t_final = args.t_final
    if getattr(args, "samples", None) is not None:
        sc.n_samples = args.samples
    return sc


def _model(sc: Scenario):
    try:
        return build_model(sc.n_qubits, sc.stabilizers)
    except (AssumptionError, OperatorError) as exc:
        raise UsageError(f"assumption violated: {exc}") from None


def _kappas(args, sc: Scenario) -> list[float]:
    return list(args.kappa) if args.kappa else [sc.kappa]


def run_check(sc: Scenario, kappa: float) -> dict:
    """All stability certificates for one scenario as a JSON-ready bundle."""
    model = _model(sc)
    assumptions = verify_assumptions(model)
    unitaries = [pauli_string(s) for s in sc.unitaries]
    controls, build = _controls_for(sc, model, kappa)

    local = [check_local_stabilization(p, [u]) for p, u in zip(model.projectors, unitaries)]
    c_min = min((c.rate for c in local), default=0.0)
    scal = check_strong_scalability(model, controls)
    glob = certify_global_stability(model, controls, build)

    def failure(cert):
        return {} if cert.verdict else {"witness": _vector_json(cert.witness)}

    bundle = {
        "scenario": sc.name,
        "controls": sc.controls,
        "kappa": kappa,
        "assumptions": [
            {"clause": c.name, "passed": c.passed, "residual": c.residual, "detail": c.detail}
            for c in assumptions.clauses
        ],
        "offsets": list(assumptions.offsets),
        "local_stabilization": [
            {"index": i + 1, "passed": c.verdict, "c": c.rate, **failure(c)} for i, c in enumerate(local)
        ],
        "c_min": c_min,
        "strong_scalability": [
            {"index": i + 1, "passed": c.verdict, "worst_eigenvalue": c.worst_eigenvalue, **failure(c)}
            for i, c in enumerate(scal)
        ],
        "partition": [
            {
                "index": i + 1,
                "neutral": [j + 1 for j in build.neutral[i]],
                "dissipative": [j + 1 for j in build.dissipative[i]],
                "dissipative_checks": [
                    {"member": j + 1, "passed": c.verdict, "worst_eigenvalue": c.worst_eigenvalue}
                    for j, c in zip(build.dissipative[i], build.dissipative_certificates[i])
                ],
            }
            for i in range(len(unitaries))
        ],
        "lambda": {"passed": build.coverage.verdict, "value": build.lam, **failure(build.coverage)},
        "global": {"passed": glob.verdict, "c": glob.rate, "bound": glob.bound, **failure(glob)},
        "warnings": list(build.warnings),
    }
    bundle["passed"] = bool(
        assumptions.passed
        and all(c.verdict for c in local)
        and all(c.verdict for c in scal)
        and build.verdict
        and glob.verdict
    )
    return bundle


def _print_check(b: dict, out) -> None:
    mark = {True: "PASS", False: "FAIL"}
    print(f"scenario {b['scenario'] or '-'} (controls={b['controls']}, kappa={b['kappa']:g})", file=out)
    for c in b["assumptions"]:
        print(f"  assumption {c['clause']:<12} {mark[c['passed']]}  residual={c['residual']:.3e} {c['detail']}", file=out)
    for c in b["local_stabilization"]:
        print(f"  local stabilization  V{c['index']}: {mark[c['passed']]}  c={c['c']:.12g}", file=out)
    print(f"  c_min = {b['c_min']:.12g}", file=out)
    for c in b["strong_scalability"]:
        print(f"  strong scalability   V{c['index']}: {mark[c['passed']]}  max eig={c['worst_eigenvalue']:.6g}", file=out)
    for p in b["partition"]:
        ok = all(d["passed"] for d in p["dissipative_checks"])
        print(f"  partition U{p['index']}: neutral={p['neutral']} dissipative={p['dissipative']} {mark[ok]}", file=out)
    print(f"  lambda = {b['lambda']['value']:.12g}  {mark[b['lambda']['passed']]}", file=out)
    bound = b["global"]["bound"]
    bound_s = f"  (bound c_min*lambda = {bound:.12g})" if bound is not None else ""
    print(f"  global c = {b['global']['c']:.12g}  {mark[b['global']['passed']]}{bound_s}", file=out)
    for w in b["warnings"]:
        print(f"  warning: {w}", file=out)
    print(f"overall: {mark[b['passed']]}", file=out)


def cmd_check(args) -> int:
    sc = _load(args)
    bundle = run_check(sc, _kappas(args, sc)[0])
    _print_check(bundle, sys.stdout)
    if args.output:
        Path(args.output).write_text(json.dumps(bundle, indent=2) + "\n")
    return EXIT_OK if bundle["passed"] else EXIT_FAIL


def _fmt(x: float) -> str:
    return repr(float(x))


def _header_lines(no_timestamp: bool) -> list[str]:
    if no_timestamp:
        return []
    return [f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}"]


def write_trajectory_csv(path: Path, traj, no_timestamp: bool) -> None:
    lines = _header_lines(no_timestamp) + ["t,fidelity,trace,purity"]
    lines += [",".join(_fmt(v) for v in row) for row in traj.rows()]
    path.write_text("\n".join(lines) + "\n")


def _time_grid(sc: Scenario) -> np.ndarray:
    if sc.t_final == 0:
        return np.array([0.0])
    return np.linspace(0.0, sc.t_final, sc.n_samples)


def _sweep_path(base: Path, kappa: float, many: bool) -> Path:
    if not many:
        return base
    return base.with_name(f"{base.stem}_kappa{kappa:g}{base.suffix}")


def cmd_simulate(args) -> int:
    sc = _load(args)
    if args.mode not in ("correct-once", "parallel-noise"):
        raise UsageError(f"invalid mode {args.mode!r}")
    model = _model(sc)
    kappas = _kappas(args, sc)
    base = Path(args.output)
    many = len(kappas) > 1
    target = sc.target_vector if sc.target_state else model.ground_basis[:, 0]
    summary = []
    for kappa in kappas:
        controls, _ = _controls_for(sc, model, kappa)
        if args.mode == "correct-once":
            if not sc.initial_state:
                raise UsageError("correct-once mode needs [initial_state]")
            liou = control_liouvillian(model, controls)
            traj = evolve(liou, sc.initial_vector, _time_grid(sc), target=target)
        else:
            noise = ErrorSet.from_paulis(sc.errors, sc.n_qubits)
            res = run_parallel_noise_experiment(
                model, controls, noise, sc.gamma, kappa, sc.t_final, sc.n_samples, rho0=target
            )
            traj = res.trajectory
            summary.append((kappa, sc.gamma, res.steady_state_fidelity))
        path = _sweep_path(base, kappa, many)
        write_trajectory_csv(path, traj, args.no_timestamp)
        print(f"kappa={kappa:g}: wrote {len(traj)} rows to {path}; final fidelity {traj.fidelity[-1]:.12g}")
    if summary:
        spath = base.with_name(f"{base.stem}_summary{base.suffix}")
        lines = _header_lines(args.no_timestamp) + ["kappa,gamma,steady_state_fidelity"]
        lines += [",".join(_fmt(v) for v in row) for row in summary]
        spath.write_text("\n".join(lines) + "\n")
        for k, g, f in summary:
            print(f"kappa/gamma={k / g if g else float('inf'):g}: steady-state fidelity {f:.12g}")
        print(f"wrote summary to {spath}")
    return EXIT_OK


def run_aqec(sc: Scenario, kappa: float) -> dict:
    model = _model(sc)
    controls, _ = _controls_for(sc, model, kappa)
    errors = ErrorSet.from_paulis(sc.errors, sc.n_qubits)
    syndrome = check_syndrome_conditions(model, controls, errors)
    liou = control_liouvillian(model, controls)
    recovery = check_recovery_rates(liou, model.ground_basis, errors)

    per_error = []
    for err in errors:
        srec = syndrome.for_error(err.label)
        rrec = recovery.for_error(err.label)
        per_error.append(
            {
                "error": err.label,
                "matched_control": None if srec[0].matched_control is None else srec[0].matched_control + 1,
                "syndrome_passed": all(r.passed for r in srec),
                "max_syndrome_residual": max(
                    (max(r.syndrome_self_residual, r.syndrome_other_residual) for r in srec if r.matched_control is not None),
                    default=None,
                ),
                "recovery_passed": all(r.passed for r in rrec),
                "rates": [r.rate for r in rrec],
                "max_recovery_residual": max(r.recovery_residual for r in rrec),
                "correctable": all(r.passed for r in srec) and all(r.passed for r in rrec),
                "note": srec[0].note,
            }
        )
    inv = [r for r in recovery.records if r.error is None]
    return {
        "scenario": sc.name,
        "kappa": kappa,
        "code_dimension": int(model.ground_basis.shape[1]),
        "invariance_passed": all(r.passed for r in inv),
        "max_invariance_residual": max((r.invariance_residual for r in inv), default=0.0),
        "errors": per_error,
        "passed": syndrome.verdict and recovery.verdict,
    }


def cmd_aqec(args) -> int:
    sc = _load(args)
    rep = run_aqec(sc, _kappas(args, sc)[0])
    print(f"scenario {rep['scenario'] or '-'} (kappa={rep['kappa']:g}, code dimension {rep['code_dimension']})")
    print(f"  code-space invariance: {'PASS' if rep['invariance_passed'] else 'FAIL'}  "
          f"max residual={rep['max_invariance_residual']:.3e}")
    for e in rep["errors"]:
        status = "correctable" if e["correctable"] else "NOT correctable"
        match = f"control {e['matched_control']}" if e["matched_control"] else "unmatched"
        rates = ", ".join(f"{r:.12g}" for r in sorted(set(np.round(e["rates"], 12))))
        print(f"  error {e['error']}: {status} ({match}); kappa_pq in {{{rates}}} {e['note']}")
    print(f"overall: {'PASS' if rep['passed'] else 'FAIL'}")
    if args.output:
        Path(args.output).write_text(json.dumps(rep, indent=2) + "\n")
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dqec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario file or bundled scenario name")
        p.add_argument("--kappa", type=float, nargs="+", help="control strength(s); overrides the scenario")
        p.add_argument("--gamma", type=float, help="noise strength; overrides the scenario")
        p.add_argument("--output", help="output path")
        p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("check", help="certify the stability conditions")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="integrate the master equation and write CSV")
    common(p)
    p.add_argument("--mode", default="correct-once", help="correct-once | parallel-noise")
    p.add_argument("--t-final", type=float, dest="t_final")
    p.add_argument("--samples", type=int)
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp comment line")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("aqec-verify", help="check the automatic error-correction conditions")
    common(p)
    p.set_defaults(func=cmd_aqec)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "simulate" and not args.output:
        print("error: simulate needs --output", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, SynthesisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
