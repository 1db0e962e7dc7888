from functools import reduce

import numpy as np
import pytest

from ftde.code import plan_from_reference, synthesize_plan
from ftde.fixtures import BUILTIN_CODES, builtin

# Single-qubit matrices, written out independently of the package.
I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
LETTER = {"I": I2, "X": X2, "Y": Y2, "Z": Z2}
SIGN = {"": 1, "+": 1, "-": -1, "i": 1j, "+i": 1j, "-i": -1j}


def dense_pauli(text: str) -> np.ndarray:
    """Oracle: Kronecker product of the letters, leftmost letter most significant."""
    k = len(text.lstrip("+-i"))
    prefix, body = text[: len(text) - k], text[len(text) - k:]
    return SIGN[prefix] * reduce(np.kron, [LETTER[c] for c in body])


def codespace_projector(strings, n):
    P = np.eye(2**n, dtype=complex)
    for s in strings:
        P = P @ (np.eye(2**n) + dense_pauli(s)) / 2
    return P


@pytest.fixture(scope="session")
def reference_plans():
    return {name: plan_from_reference(builtin(name)) for name in BUILTIN_CODES}


@pytest.fixture(scope="session")
def synthesized_plans():
    return {name: synthesize_plan(builtin(name)) for name in BUILTIN_CODES}


# -- acceptance bookkeeping -------------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = (bool(ok), detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
