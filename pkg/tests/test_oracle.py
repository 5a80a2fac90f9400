import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cdbpp.encoding import BppInstance, EncodingParams, binary_objective, index_to_bits
from cdbpp.oracle import (
    OracleCapError,
    brute_force_pack,
    brute_force_partial,
    exact_ground_states,
    run_oracle,
)


def test_partial_tiny(tiny):
    assert brute_force_partial(tiny) == {"100", "010", "001", "110"}


def test_partial_everything_fits():
    inst = BppInstance((1, 2, 3, 4), 10)
    assert len(brute_force_partial(inst)) == 2**4 - 1


@pytest.mark.parametrize(
    "weights,cap,expected",
    [((2, 3, 4), 5, (2, 1, 2)), ((5, 5), 5, (2, 1, 2)), ((1, 1), 2, (1, 1, 1))],
)
def test_pack_examples(weights, cap, expected):
    assert brute_force_pack(BppInstance(weights, cap)) == expected


def test_ground_states_examples():
    inst = BppInstance((2, 3), 4)
    assert exact_ground_states(inst, EncodingParams(k=2, delta_w=1, capacity=4)) == {"10"}
    inst = BppInstance((2, 2), 4)
    assert exact_ground_states(inst, EncodingParams(k=2, delta_w=1, capacity=4)) == {"10", "01"}


def test_caps():
    big = BppInstance(tuple([1] * 15), 20)
    with pytest.raises(OracleCapError):
        brute_force_pack(big)
    with pytest.raises(OracleCapError):
        brute_force_partial(BppInstance(tuple([1] * 21), 20))


def _partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def _naive_pack(inst):
    best, count = None, 0
    for part in _partitions(list(range(inst.n))):
        if any(sum(inst.weights[i] for i in b) > inst.capacity for b in part):
            continue
        m = len(part)
        if best is None or m < best:
            best, count = m, 1
        elif m == best:
            count += 1
    return best, count


weights_st = st.lists(st.integers(1, 12), min_size=1, max_size=7)


@settings(max_examples=60, deadline=None)
@given(weights_st, st.integers(0, 10))
def test_pack_matches_naive_partitions(weights, extra):
    inst = BppInstance(tuple(weights), max(weights) + extra)
    m, fu, fo = brute_force_pack(inst)
    assert (m, fu) == _naive_pack(inst)
    assert fo == fu * math.factorial(m)
    assert math.ceil(sum(weights) / inst.capacity) <= m <= inst.n


@settings(max_examples=40, deadline=None)
@given(weights_st, st.integers(0, 10), st.integers(1, 12))
def test_ground_states_match_scan(weights, extra, k):
    inst = BppInstance(tuple(weights), max(weights) + extra)
    k = min(k, inst.capacity)
    p = EncodingParams(k=k, delta_w=1, capacity=inst.capacity)
    vals = {index_to_bits(b, inst.n): binary_objective(inst, p, index_to_bits(b, inst.n)) for b in range(1 << inst.n)}
    lo = min(vals.values())
    assert exact_ground_states(inst, p) == {b for b, v in vals.items() if np.isclose(v, lo, rtol=0, atol=1e-9)}
    # every ground state has a weight sum minimising the penalty over achievable sums
    sums = {inst.weight_of(b) for b in vals}
    best_s = min(sums, key=lambda s: p.A * (s - inst.capacity) + p.B * (s - inst.capacity) ** 2)
    for b in exact_ground_states(inst, p):
        s = inst.weight_of(b)
        assert p.A * (s - inst.capacity) + p.B * (s - inst.capacity) ** 2 == pytest.approx(
            p.A * (best_s - inst.capacity) + p.B * (best_s - inst.capacity) ** 2)


def test_partial_matches_enumeration():
    rng = np.random.default_rng(1)
    w = tuple(int(x) for x in rng.integers(20, 80, size=8))
    inst = BppInstance(w, 120)
    ref = {"".join(map(str, bits)) for bits in product((0, 1), repeat=8)
           if any(bits) and sum(a * b for a, b in zip(bits, w)) <= 120}
    assert brute_force_partial(inst) == ref


def test_run_oracle_summary(tiny):
    res = run_oracle(tiny, ks=[1, 2])
    assert res.summary() == {"fps": 4, "m_opt": 2, "fs_unordered": 1, "fs_ordered": 2}
    assert set(res.ground_states) == {1, 2}
