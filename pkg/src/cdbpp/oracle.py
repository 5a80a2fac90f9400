"""Brute-force ground truth for small instances."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .encoding import BppInstance, EncodingParams, index_to_bits, objective_vector

MAX_SUBSET_ITEMS = 20
MAX_PARTITION_ITEMS = 14


class OracleCapError(ValueError):
    """Instance is too large for exhaustive enumeration."""


def _cap(inst: BppInstance, limit: int, what: str) -> None:
    if inst.n > limit:
        raise OracleCapError(f"{what} enumeration is capped at n <= {limit}; instance has n = {inst.n}")


def brute_force_partial(inst: BppInstance) -> set[str]:
    """Every nonempty subset whose weight fits in one bin."""
    _cap(inst, MAX_SUBSET_ITEMS, "subset")
    sums = inst.subset_sums()
    ok = np.flatnonzero(sums <= inst.capacity)
    return {index_to_bits(int(b), inst.n) for b in ok if b != 0}


def brute_force_pack(inst: BppInstance) -> tuple[int, int, int]:
    """``(m_opt, unordered FS count, ordered FS count)`` by assigning items to bins.

    Items are placed one at a time into an existing bin or a fresh one
    (restricted-growth order, so each unordered partition is produced once),
    pruning any bin that overflows.  ``m`` is raised from the volume bound
    until some partition into exactly ``m`` bins exists.
    """
    _cap(inst, MAX_PARTITION_ITEMS, "partition")
    w = inst.weights
    C = inst.capacity
    n = inst.n
    suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + w[i]

    def count(m: int) -> int:
        loads: list[int] = []

        def place(i: int) -> int:
            if i == n:
                return 1 if len(loads) == m else 0
            # bins still to open must each receive at least one remaining item
            if m - len(loads) > n - i:
                return 0
            if suffix[i] > m * C - sum(loads):
                return 0
            total = 0
            for b in range(len(loads)):
                if loads[b] + w[i] <= C:
                    loads[b] += w[i]
                    total += place(i + 1)
                    loads[b] -= w[i]
            if len(loads) < m:
                loads.append(w[i])
                total += place(i + 1)
                loads.pop()
            return total

        return place(0)

    m = max(1, math.ceil(inst.total_weight / C))
    while m <= n:
        k = count(m)
        if k:
            return m, k, k * math.factorial(m)
        m += 1
    raise AssertionError("every item fits alone, so n bins always suffice")


def exact_ground_states(inst: BppInstance, p: EncodingParams, rtol: float = 1e-12) -> set[str]:
    """All bitstrings minimising the penalty objective (ties included)."""
    _cap(inst, MAX_SUBSET_ITEMS, "subset")
    vals = objective_vector(inst, p)
    lo = vals.min()
    tol = rtol * max(1.0, abs(lo))
    return {index_to_bits(int(b), inst.n) for b in np.flatnonzero(vals <= lo + tol)}


@dataclass
class OracleResult:
    fps: set[str]
    m_opt: int | None
    fs_unordered: int | None
    fs_ordered: int | None
    ground_states: dict[float, set[str]] = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "fps": len(self.fps),
            "m_opt": self.m_opt,
            "fs_unordered": self.fs_unordered,
            "fs_ordered": self.fs_ordered,
        }


def run_oracle(inst: BppInstance, ks: list[float] | None = None, B: float = 1.0) -> OracleResult:
    fps = brute_force_partial(inst)
    m, fu, fo = brute_force_pack(inst)
    gs = {}
    for k in ks or []:
        gs[k] = exact_ground_states(inst, EncodingParams.for_instance(inst, k, B))
    return OracleResult(fps, m, fu, fo, gs)
