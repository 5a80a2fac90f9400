import math
from math import comb

import numpy as np
import pytest
from scipy.linalg import expm

from cdbpp.ansatz import (
    AnsatzKind,
    build_circuit,
    cost,
    decompose,
    dump_decomposition,
    evaluate,
    gate_counts,
    table_formulas,
)
from cdbpp.encoding import build_cd_pool, build_mixer
from cdbpp.pauli import PauliSum
from cdbpp.simulator import init_plus

from conftest import dense_evolve, random_ising

_I = np.eye(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]])
_Z = np.diag([1.0 + 0j, -1.0])
_H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def _embed(n, ops):
    mat = np.array([[1.0 + 0j]])
    for q in range(n):
        mat = np.kron(mat, ops.get(q, _I))
    return mat


def _gate_matrix(n, g, params):
    if g.name == "CNOT":
        c, t = g.qubits
        p0, p1 = np.diag([1.0, 0]), np.diag([0.0, 1])
        return _embed(n, {c: p0}) + _embed(n, {c: p1, t: _X})
    if g.name == "H":
        return _embed(n, {g.qubits[0]: _H})
    angle = g.scale * params[g.slot] if g.parameterized else g.angle
    gen = {"RX": _X, "RY": _Y, "RZ": _Z}[g.name]
    return _embed(n, {g.qubits[0]: expm(-0.5j * angle * gen)})


def _run_basic(n, gates, params):
    psi = init_plus(n).amplitudes
    for g in gates:
        psi = _gate_matrix(n, g, params) @ psi
    return psi


def _pools(n, rng):
    h = random_ising(rng, n)
    return h, build_mixer(n), build_cd_pool(n)


def test_layer_params():
    assert AnsatzKind.QAOA.layer_params == ("alpha", "beta")
    assert AnsatzKind.DC_QAOA.layer_params == ("alpha", "beta", "gamma")
    assert AnsatzKind.CD_INSPIRED.layer_params == ("gamma",)
    assert AnsatzKind.CD_MIXER.layer_params == ("beta", "gamma")
    assert AnsatzKind.parse("CD-mixer") is AnsatzKind.CD_MIXER
    with pytest.raises(ValueError):
        AnsatzKind.parse("vqe")


def test_build_examples():
    h, m, cd = _pools(2, np.random.default_rng(0))
    c = build_circuit("qaoa", h, m, cd, 1)
    assert [(g.string.label, g.slot) for g in c.gates] == [
        ("ZI", 0), ("ZZ", 0), ("IZ", 0), ("XI", 1), ("IX", 1)]
    assert c.num_params == 2
    c = build_circuit("cd", h, m, cd, 3)
    assert c.num_params == 3 and len(c.gates) == 12
    c = build_circuit("dcqaoa", h, m, cd, 1)
    assert c.num_params == 3 and len(c.gates) == 4 + 3 + 2
    # CD first, then cost, then mixer
    assert [g.slot for g in c.gates] == [2] * 4 + [0] * 3 + [1] * 2
    with pytest.raises(ValueError):
        build_circuit("qaoa", h, m, cd, 0)


def test_dump_format():
    h = PauliSum.from_pairs(1, [(0.5, "Z")])
    c = build_circuit("qaoa", h, build_mixer(1), build_cd_pool(1), 1)
    assert c.dump() == "ROT Z 0.5 0\nROT X 1.0 1\n"


@pytest.mark.parametrize("kind", list(AnsatzKind))
def test_zero_params_identity(kind):
    h, m, cd = _pools(3, np.random.default_rng(1))
    c = build_circuit(kind, h, m, cd, 2)
    np.testing.assert_array_equal(evaluate(c, np.zeros(c.num_params)).amplitudes, init_plus(3).amplitudes)


@pytest.mark.parametrize("kind", list(AnsatzKind))
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_dense_equivalence(kind, n):
    rng = np.random.default_rng(n)
    h, m, cd = _pools(n, rng)
    c = build_circuit(kind, h, m, cd, 2)
    x = rng.uniform(0, 2 * np.pi, c.num_params)
    out = evaluate(c, x)
    np.testing.assert_allclose(out.amplitudes, dense_evolve(c, x), atol=1e-10)
    assert out.norm == pytest.approx(1, abs=1e-12)


def test_cost_layer_is_exact_exponential():
    rng = np.random.default_rng(3)
    h, m, cd = _pools(4, rng)
    c = build_circuit("qaoa", h, m, cd, 1)
    alpha = 0.83
    want = expm(-1j * alpha * h.to_matrix()) @ init_plus(4).amplitudes
    np.testing.assert_allclose(evaluate(c, [alpha, 0.0]).amplitudes, want, atol=1e-10)


def test_single_qubit_closed_form():
    h = PauliSum.from_pairs(1, [(1, "Z")])
    c = build_circuit("qaoa", h, build_mixer(1), build_cd_pool(1), 1)
    a = 0.4
    np.testing.assert_allclose(evaluate(c, [a, 0]).amplitudes, np.array([np.exp(-1j * a), np.exp(1j * a)]) / 2**0.5)


def test_cost_examples():
    rng = np.random.default_rng(6)
    h, m, cd = _pools(3, rng)
    c = build_circuit("cdmixer", h, m, cd, 1)
    assert cost(c, [0, 0], h) == pytest.approx(h.diagonal().mean(), abs=1e-12)
    z = PauliSum.from_pairs(1, [(1, "Z")])
    c1 = build_circuit("cdmixer", z, build_mixer(1), build_cd_pool(1), 1)
    grid = np.linspace(0, 2 * np.pi, 121)
    best = min(cost(c1, [b, g], z) for b in grid for g in grid)
    assert best == pytest.approx(-1, abs=1e-9)


@pytest.mark.parametrize("kind", list(AnsatzKind))
@pytest.mark.parametrize("n", [2, 3])
def test_decomposition_matches_circuit(kind, n):
    rng = np.random.default_rng(10 + n)
    h, m, cd = _pools(n, rng)
    c = build_circuit(kind, h, m, cd, 2)
    x = rng.uniform(0, 2 * np.pi, c.num_params)
    got = _run_basic(n, decompose(c), x)
    want = evaluate(c, x).amplitudes
    assert abs(np.vdot(want, got)) == pytest.approx(1, abs=1e-10)


def test_decomposition_examples():
    h = PauliSum.from_pairs(2, [(1.0, "ZZ")])
    c = build_circuit("qaoa", h, build_mixer(2), build_cd_pool(2), 1)
    gates = decompose(c)
    assert [g.name for g in gates[:3]] == ["CNOT", "RZ", "CNOT"]
    assert gates[0].qubits == (0, 1) and gates[1].qubits == (1,) and gates[1].scale == 2.0
    assert [g.name for g in gates[3:]] == ["RX", "RX"]
    text = dump_decomposition(gates)
    assert text.splitlines()[0] == "CNOT 0 1"


@pytest.mark.parametrize("n", range(2, 13))
def test_cnot_counts(n):
    for kind in AnsatzKind:
        gc = gate_counts(kind, n)
        expected = (4 if kind is AnsatzKind.DC_QAOA else 2) * comb(n, 2)
        assert gc.cnot == expected == gc.table_cnot


def test_counts_at_ten():
    assert gate_counts("qaoa", 10).cnot == 90
    assert gate_counts("dcqaoa", 10).cnot == 180
    assert table_formulas(AnsatzKind.CD_MIXER, 10)[2] == 255
    gc = gate_counts("qaoa", 10)
    assert gc.parameterized == comb(10, 2) + 20
    assert gc.as_dict()["table_parameterized"] == comb(10, 2) + 10
