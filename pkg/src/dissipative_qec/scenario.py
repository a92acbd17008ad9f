"""Plain-text scenario files.

Format::

    # comment
    n_qubits = 3
    kappa = 1.0
    [stabilizers]
    ZZI
    IZZ

Scalar keys are ``key = value`` lines; list sections start with a
``[name]`` header and hold one item per line. Amplitudes use Python complex
literals (``0.5``, ``-0.5j``, ``(0.1+0.2j)``), qubit 1 most significant.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np

CONTROL_MODES = ("naive", "product")
_SCALARS = {
    "name": str,
    "n_qubits": int,
    "kappa": float,
    "gamma": float,
    "t_final": float,
    "n_samples": int,
    "controls": str,
}
_LISTS = ("stabilizers", "unitaries", "errors", "initial_state", "target_state")
_PAULI_CHARS = set("IXYZ")


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line, self.key = line, key
        where = f"line {line}: " if line is not None else ""
        what = f"[{key}] " if key else ""
        super().__init__(f"{where}{what}{message}")


@dataclass
class Scenario:
    n_qubits: int
    stabilizers: list[str]
    unitaries: list[str]
    errors: list[str] = field(default_factory=list)
    kappa: float = 1.0
    gamma: float = 1.0
    initial_state: list[complex] = field(default_factory=list)
    target_state: list[complex] = field(default_factory=list)
    t_final: float = 20.0
    n_samples: int = 201
    controls: str = "product"
    name: str = ""

    def validate(self) -> "Scenario":
        n = self.n_qubits
        if n < 1:
            raise ScenarioError("must be positive", key="n_qubits")
        for key in ("stabilizers", "unitaries", "errors"):
            for s in getattr(self, key):
                if len(s) != n or set(s) - _PAULI_CHARS:
                    raise ScenarioError(f"Pauli string {s!r} must have {n} characters from IXYZ", key=key)
        if len(self.unitaries) != len(self.stabilizers):
            raise ScenarioError(f"{len(self.unitaries)} unitaries for {len(self.stabilizers)} stabilizers", key="unitaries")
        for key in ("initial_state", "target_state"):
            amps = getattr(self, key)
            if not amps:
                continue
            if len(amps) != 2**n:
                raise ScenarioError(f"expected {2**n} amplitudes, got {len(amps)}", key=key)
            norm = float(np.linalg.norm(np.asarray(amps)))
            if abs(norm - 1) > 1e-9:
                raise ScenarioError(f"amplitudes have norm {norm:.12g}, expected 1", key=key)
        if self.kappa < 0 or self.gamma < 0:
            raise ScenarioError("kappa and gamma must be non-negative")
        if self.t_final < 0:
            raise ScenarioError("must be non-negative", key="t_final")
        if self.n_samples < 2:
            raise ScenarioError("must be at least 2", key="n_samples")
        if self.controls not in CONTROL_MODES:
            raise ScenarioError(f"must be one of {CONTROL_MODES}", key="controls")
        return self

    @property
    def initial_vector(self) -> np.ndarray:
        return np.asarray(self.initial_state, dtype=complex)

    @property
    def target_vector(self) -> np.ndarray:
        return np.asarray(self.target_state, dtype=complex)


def parse_scenario(text: str) -> Scenario:
    values: dict = {k: [] for k in _LISTS}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _LISTS:
                raise ScenarioError(f"unknown section [{section}]", line=lineno)
            continue
        if "=" in line:
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.lower()
            if key not in _SCALARS:
                raise ScenarioError(f"unknown key {key!r}", line=lineno)
            try:
                values[key] = _SCALARS[key](val)
            except ValueError:
                raise ScenarioError(f"cannot parse {val!r} as {_SCALARS[key].__name__}", line=lineno, key=key) from None
            section = None
            continue
        if section is None:
            raise ScenarioError(f"unexpected line {line!r} outside a section", line=lineno)
        if section in ("initial_state", "target_state"):
            try:
                values[section].append(complex(line.replace(" ", "")))
            except ValueError:
                raise ScenarioError(f"cannot parse amplitude {line!r}", line=lineno, key=section) from None
        else:
            values[section].append(line.upper())
    for req in ("n_qubits",):
        if req not in values:
            raise ScenarioError("missing required key", key=req)
    try:
        return Scenario(**values).validate()
    except TypeError as exc:
        raise ScenarioError(str(exc)) from None


def dump_scenario(sc: Scenario) -> str:
    out = []
    if sc.name:
        out.append(f"name = {sc.name}")
    for key in ("n_qubits", "kappa", "gamma", "t_final", "n_samples", "controls"):
        val = getattr(sc, key)
        out.append(f"{key} = {val!r}" if isinstance(val, float) else f"{key} = {val}")
    for key in _LISTS:
        items = getattr(sc, key)
        if not items:
            continue
        out.append("")
        out.append(f"[{key}]")
        out.extend(repr(complex(z)) if key.endswith("_state") else str(z) for z in items)
    return "\n".join(out) + "\n"


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    if not p.exists():
        bundled = resources.files("dissipative_qec").joinpath("scenarios", f"{path}.scn")
        if bundled.is_file():
            return parse_scenario(bundled.read_text())
    return parse_scenario(p.read_text())


def bundled_scenarios() -> list[str]:
    root = resources.files("dissipative_qec").joinpath("scenarios")
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".scn"))


def scenario_fields() -> list[str]:
    return [f.name for f in fields(Scenario)]
