import sys

import numpy as np
import pytest
from scipy.linalg import expm

from cdbpp.encoding import BppInstance


def random_instance(rng, n, lo=20, hi=80, capacity=120):
    return BppInstance(tuple(int(w) for w in rng.integers(lo, hi + 1, size=n)), capacity)


def dense_evolve(circuit, params):
    """Reference: product of dense matrix exponentials, one per gate."""
    dim = 1 << circuit.n
    psi = np.full(dim, dim**-0.5, dtype=complex)
    for g in circuit.gates:
        psi = expm(-1j * params[g.slot] * g.coeff * g.string.to_matrix()) @ psi
    return psi


def random_ising(rng, n):
    """Cost Hamiltonian with O(1) coefficients, for finite-difference checks."""
    from cdbpp.encoding import _ising_sum

    h = rng.normal(size=n).tolist()
    J = {(i, j): float(rng.normal()) for i in range(n) for j in range(i + 1, n)}
    return _ising_sum(n, h, J)


@pytest.fixture
def tiny():
    return BppInstance((2, 3, 4), 5)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", {}) if mod else {}
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(results[k])
