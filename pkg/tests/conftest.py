import re

import numpy as np
import pytest

from dissipative_qec.operators import Operator, pauli_string
from dissipative_qec.stabilizer import build_model
from dissipative_qec.synthesis import naive_controls, partition_and_build_controls

REP_SPECS = ["ZZI", "IZZ", "ZIZ"]
FLIPS = ["XII", "IXI", "IIX"]

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def rep_model():
    return build_model(3, REP_SPECS)


@pytest.fixture(scope="session")
def flips():
    return [pauli_string(s) for s in FLIPS]


@pytest.fixture(scope="session")
def product_build(rep_model, flips):
    return partition_and_build_controls(rep_model, flips)


@pytest.fixture(scope="session")
def naive(rep_model, flips):
    return naive_controls(rep_model, flips)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return Operator(scale * (a + a.conj().T) / 2)


def random_matrix(rng, n, scale=1.0):
    return Operator(scale * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))))


def random_density(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_projector(rng, n, rank):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, _ = np.linalg.qr(a)
    q = q[:, :rank]
    return Operator(q @ q.conj().T)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: (int(re.match(r"\d+", k).group()), k)):
        ok, msg = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {msg}")
