import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from cdbpp.ansatz import AnsatzKind, build_circuit, cost
from cdbpp.encoding import build_cd_pool, build_mixer
from cdbpp.pauli import PauliString, PauliSum
from cdbpp.simulator import (
    SimulationError,
    StateVector,
    apply_pauli_rotation,
    expectation,
    full_distribution,
    gradient,
    init_plus,
    sample,
)

from conftest import random_ising

P = PauliString.from_label


def test_init_plus():
    np.testing.assert_allclose(init_plus(1).amplitudes, [2**-0.5] * 2)
    np.testing.assert_allclose(init_plus(2).amplitudes, [0.5] * 4)
    assert init_plus(7).norm == pytest.approx(1)
    with pytest.raises(SimulationError):
        init_plus(0)


def test_rotation_examples():
    th = 0.37
    out = apply_pauli_rotation(StateVector.basis("0"), P("Z"), th)
    np.testing.assert_allclose(out.amplitudes, [np.exp(-1j * th), 0])
    out = apply_pauli_rotation(StateVector.basis("0"), P("X"), math.pi / 2)
    np.testing.assert_allclose(out.amplitudes, [0, -1j], atol=1e-15)
    s = init_plus(3)
    np.testing.assert_array_equal(apply_pauli_rotation(s, P("XYZ"), 0.0).amplitudes, s.amplitudes)
    with pytest.raises(SimulationError):
        apply_pauli_rotation(s, P("XY"), 0.1)


def test_bit_order():
    # qubit 0 is the leftmost character and the most significant index bit
    out = apply_pauli_rotation(StateVector.basis("00"), P("XI"), math.pi / 2)
    assert np.argmax(np.abs(out.amplitudes)) == 0b10


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.tuples(st.text("IXYZ", min_size=n, max_size=n),
                                                       st.floats(-7, 7), st.integers(0, 2**31))))
def test_rotation_matches_expm(case):
    label, theta, seed = case
    rng = np.random.default_rng(seed)
    n = len(label)
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    v /= np.linalg.norm(v)
    got = apply_pauli_rotation(StateVector(n, v), P(label), theta).amplitudes
    np.testing.assert_allclose(got, expm(-1j * theta * P(label).to_matrix()) @ v, atol=1e-12)


def test_norm_drift_long_sequence():
    rng = np.random.default_rng(5)
    n = 6
    s = init_plus(n)
    for _ in range(10_000):
        label = "".join(rng.choice(list("IXYZ"), size=n))
        s = apply_pauli_rotation(s, P(label), rng.uniform(-np.pi, np.pi))
    assert abs(s.norm - 1) < 1e-10


def test_expectation_examples():
    assert expectation(init_plus(1), PauliSum.from_pairs(1, [(1, "X")])) == pytest.approx(1)
    assert expectation(StateVector.basis("0"), PauliSum.from_pairs(1, [(1, "Z")])) == 1
    assert expectation(StateVector.basis("1"), PauliSum.from_pairs(1, [(1, "Z")])) == -1
    assert expectation(init_plus(2), PauliSum.from_pairs(2, [(1, "ZZ")])) == pytest.approx(0, abs=1e-15)
    with pytest.raises(SimulationError):
        expectation(init_plus(1), PauliSum.from_pairs(1, [(1j, "X")]))


def test_expectation_of_diagonal_is_distribution_average():
    rng = np.random.default_rng(2)
    h = random_ising(rng, 4)
    v = rng.normal(size=16) + 1j * rng.normal(size=16)
    s = StateVector(4, v / np.linalg.norm(v))
    assert expectation(s, h) == pytest.approx(full_distribution(s).values @ h.diagonal(), abs=1e-9)


def test_distribution_and_sampling():
    d = full_distribution(init_plus(2))
    np.testing.assert_allclose(d.values, [0.25] * 4)
    assert d.exact and d.values.sum() == pytest.approx(1)
    b = StateVector.basis("101")
    assert full_distribution(b).to_dict() == {"101": 1.0}
    assert sample(b, 500, seed=1).to_dict() == {"101": 500}
    s1, s2 = sample(init_plus(3), 1000, 9), sample(init_plus(3), 1000, 9)
    np.testing.assert_array_equal(s1.values, s2.values)
    assert s1.values.sum() == 1000
    big = sample(init_plus(1), 10**6, 3).frequencies()
    assert np.all(np.abs(big - 0.5) < 0.005)
    assert sample(b, 4, 0).to_csv() == "101,4\n"
    with pytest.raises(SimulationError):
        sample(b, 0, 0)


def test_shift_rule_single_gate():
    # f(theta) = <0|e^{i theta X} Z e^{-i theta X}|0> = cos(2 theta)
    def f(th):
        return expectation(apply_pauli_rotation(StateVector.basis("0"), P("X"), th), PauliSum.from_pairs(1, [(1, "Z")]))

    for th, want in ((math.pi / 4, -2.0), (0.0, 0.0)):
        assert f(th + math.pi / 4) - f(th - math.pi / 4) == pytest.approx(want, abs=1e-12)


def _circuits(n, p, rng):
    h = random_ising(rng, n)
    for kind in AnsatzKind:
        yield kind, h, build_circuit(kind, h, build_mixer(n), build_cd_pool(n), p)


@pytest.mark.parametrize("p", [1, 2])
def test_adjoint_matches_shift_and_fd(p):
    rng = np.random.default_rng(11 + p)
    for kind, h, c in _circuits(4, p, rng):
        x = rng.uniform(0, 2 * np.pi, c.num_params)
        adj = gradient(c, x, h)
        np.testing.assert_allclose(adj, gradient(c, x, h, method="shift"), atol=1e-10, err_msg=kind.name)
        fd = np.array([(cost(c, x + e, h) - cost(c, x - e, h)) / 2e-5 for e in np.eye(len(x)) * 1e-5])
        np.testing.assert_allclose(adj, fd, atol=1e-6, err_msg=kind.name)


def test_gradient_nondiagonal_observable():
    rng = np.random.default_rng(4)
    h = random_ising(rng, 3)
    c = build_circuit("cdmixer", h, build_mixer(3), build_cd_pool(3), 2)
    obs = PauliSum.from_pairs(3, [(0.5, "XYI"), (1.0, "IIX"), (-0.3, "ZZZ")])
    x = rng.uniform(0, 2 * np.pi, c.num_params)
    np.testing.assert_allclose(gradient(c, x, obs), gradient(c, x, obs, method="shift"), atol=1e-10)


def test_gradient_argument_checks():
    h = PauliSum.from_pairs(1, [(1, "Z")])
    c = build_circuit("qaoa", h, build_mixer(1), build_cd_pool(1), 1)
    with pytest.raises(SimulationError):
        gradient(c, [0.1], h)
    with pytest.raises(SimulationError):
        gradient(c, [0.1, 0.2], h, method="magic")


def test_batch_rows_independent():
    rng = np.random.default_rng(8)
    h = random_ising(rng, 5)
    c = build_circuit("dcqaoa", h, build_mixer(5), build_cd_pool(5), 2)
    X = rng.uniform(0, 2 * np.pi, (4, c.num_params))
    costs, grads, psi = c.program.value_and_grad(X, h.diagonal())
    perm = [2, 0, 3, 1]
    costs2, grads2, psi2 = c.program.value_and_grad(X[perm], h.diagonal())
    np.testing.assert_array_equal(costs2, costs[perm])
    np.testing.assert_array_equal(grads2, grads[perm])
    np.testing.assert_array_equal(psi2, psi[perm])
