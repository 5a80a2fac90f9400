"""Single-bin penalty encoding of a bin-packing instance.

A bitstring ``x`` (item 0 leftmost) selects the items placed in one bin.  The
penalty

    f(s) = A (s - C) + B (s - C)^2,     s = sum_i w_i x_i

is minimised at ``s = C - A / 2B``.  Choosing ``A = 2B(C - k dw)`` moves the
minimum to the target weight sum ``k dw``; sweeping ``k`` over a schedule
sweeps the target across ``[dw, C]``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np

from .pauli import PauliString, PauliSum, PauliTerm, nc_first_order, simplify


class InstanceError(ValueError):
    """Invalid or unreadable bin-packing instance."""


class ScheduleError(ValueError):
    """The k schedule would be empty."""


@dataclass(frozen=True)
class BppInstance:
    weights: tuple[int, ...]
    capacity: int

    def __post_init__(self) -> None:
        weights = tuple(self.weights)
        if not weights:
            raise InstanceError("instance needs at least one item")
        for w in weights:
            if isinstance(w, bool) or int(w) != w:
                raise InstanceError(f"weights must be integers, got {w!r}")
        weights = tuple(int(w) for w in weights)
        if int(self.capacity) != self.capacity or self.capacity < 1:
            raise InstanceError(f"capacity must be a positive integer, got {self.capacity!r}")
        for i, w in enumerate(weights):
            if w < 1:
                raise InstanceError(f"item {i} has non-positive weight {w}")
            if w > self.capacity:
                raise InstanceError(f"item {i} (weight {w}) exceeds capacity {self.capacity}")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "capacity", int(self.capacity))

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def total_weight(self) -> int:
        return sum(self.weights)

    def weight_of(self, bits: str) -> int:
        check_bitstring(self, bits)
        return sum(w for w, b in zip(self.weights, bits) if b == "1")

    def subset_sums(self) -> np.ndarray:
        """Weight sum of every basis index (item 0 = most significant bit)."""
        idx = np.arange(1 << self.n, dtype=np.int64)
        sums = np.zeros(1 << self.n, dtype=np.int64)
        for i, w in enumerate(self.weights):
            sums += w * ((idx >> (self.n - 1 - i)) & 1)
        return sums

    def to_json(self) -> str:
        return json.dumps({"capacity": self.capacity, "weights": list(self.weights)})


def check_bitstring(inst: BppInstance, bits: str) -> None:
    if len(bits) != inst.n or set(bits) - {"0", "1"}:
        raise InstanceError(f"bitstring {bits!r} is not a {inst.n}-bit string")


def index_to_bits(index: int, n: int) -> str:
    return format(index, f"0{n}b")


def bits_to_index(bits: str) -> int:
    return int(bits, 2)


def load_instance(path: str | Path) -> BppInstance:
    """Read an instance from JSON or CSV.

    CSV layout: a header line ``capacity,<C>`` (``capacity=<C>`` also accepted)
    followed by one weight per line.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InstanceError(f"cannot read instance {path}: {exc}") from exc
    if path.suffix.lower() == ".csv" or not text.lstrip().startswith("{"):
        return _parse_csv(text)
    try:
        data = json.loads(text)
        return BppInstance(tuple(data["weights"]), data["capacity"])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InstanceError(f"malformed instance JSON in {path}: {exc}") from exc


def _parse_csv(text: str) -> BppInstance:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise InstanceError("empty instance CSV")
    head = ",".join(rows[0]).replace("=", ",").split(",")
    head = [h.strip() for h in head if h.strip()]
    if len(head) != 2 or head[0].lower() != "capacity":
        raise InstanceError("CSV header must be 'capacity,<C>'")
    try:
        capacity = int(head[1])
        weights = tuple(int(r[0]) for r in rows[1:])
    except ValueError as exc:
        raise InstanceError(f"non-integer value in instance CSV: {exc}") from exc
    return BppInstance(weights, capacity)


def save_instance(inst: BppInstance, path: str | Path) -> None:
    Path(path).write_text(inst.to_json() + "\n", encoding="utf-8")


def random_instance(n: int, weight_lo: int, weight_hi: int, capacity: int, seed: int) -> BppInstance:
    """``n`` integer weights drawn uniformly from ``[weight_lo, weight_hi]``."""
    if not 1 <= weight_lo <= weight_hi <= capacity:
        raise InstanceError(f"need 1 <= weight_lo <= weight_hi <= capacity, got {weight_lo}, {weight_hi}, {capacity}")
    if n < 1:
        raise InstanceError("n must be >= 1")
    rng = np.random.default_rng(seed)
    return BppInstance(tuple(int(w) for w in rng.integers(weight_lo, weight_hi + 1, size=n)), capacity)


def delta_omega(inst: BppInstance) -> int:
    """Smallest positive gap between two weights; 1 if all weights are equal."""
    distinct = sorted(set(inst.weights))
    if len(distinct) < 2:
        return 1
    return min(b - a for a, b in zip(distinct, distinct[1:]))


def k_schedule(capacity: float, delta_w: float, stepsize: float) -> list[float]:
    if stepsize <= 0:
        raise ScheduleError(f"stepsize must be positive, got {stepsize}")
    if delta_w <= 0:
        raise ScheduleError(f"delta_w must be positive, got {delta_w}")
    top = capacity / delta_w
    count = math.floor(top / stepsize + 1e-9)
    if count < 1:
        raise ScheduleError(f"stepsize {stepsize} exceeds C/dw = {top}; empty schedule")
    return [stepsize * j for j in range(1, count + 1)]


@dataclass(frozen=True)
class EncodingParams:
    k: float
    delta_w: float
    capacity: float
    B: float = 1.0

    def __post_init__(self) -> None:
        if self.B <= 0 or self.k <= 0 or self.delta_w <= 0:
            raise ValueError("B, k and delta_w must be positive")
        target = self.k * self.delta_w
        if not (self.delta_w - 1e-9 <= target <= self.capacity + 1e-9):
            raise ValueError(f"target sum k*dw = {target} outside [{self.delta_w}, {self.capacity}]")

    @classmethod
    def for_instance(cls, inst: BppInstance, k: float, B: float = 1.0) -> EncodingParams:
        return cls(k=k, delta_w=delta_omega(inst), capacity=inst.capacity, B=B)

    @property
    def A(self) -> float:
        return 2.0 * self.B * (self.capacity - self.k * self.delta_w)

    @property
    def target(self) -> float:
        return self.k * self.delta_w


def binary_objective(inst: BppInstance, p: EncodingParams, x: str) -> float:
    s = inst.weight_of(x)
    d = s - inst.capacity
    return p.A * d + p.B * d * d


def objective_vector(inst: BppInstance, p: EncodingParams) -> np.ndarray:
    d = inst.subset_sums().astype(np.float64) - inst.capacity
    return p.A * d + p.B * d * d


def ising_coefficients(inst: BppInstance, p: EncodingParams) -> tuple[list[float], dict[tuple[int, int], float], float]:
    """Return linear fields, pair couplings (i<j) and the constant offset."""
    w = inst.weights
    W = inst.total_weight
    C = inst.capacity
    h = [wi * (-p.A / 2 + p.B * (C - W / 2)) for wi in w]
    J = {(i, j): p.B / 2 * w[i] * w[j] for i, j in combinations(range(inst.n), 2)}
    D = W / 2 - C
    const = p.A * D + p.B * D * D + p.B / 4 * sum(wi * wi for wi in w)
    return h, J, const


def _ising_sum(n: int, h: Sequence[float], J: dict[tuple[int, int], float]) -> PauliSum:
    terms = [PauliTerm(h[i], PauliString.from_sparse(n, {i: "Z"})) for i in range(n)]
    terms += [PauliTerm(c, PauliString.from_sparse(n, {i: "Z", j: "Z"})) for (i, j), c in J.items()]
    terms.sort(key=lambda t: t.string.sort_key())
    return PauliSum(n, tuple(terms))


def build_cost_hamiltonian(inst: BppInstance, p: EncodingParams) -> tuple[PauliSum, float]:
    """Ising form of the penalty plus the constant it drops.

    Zero coefficients are kept so the term layout is the same for every ``k``.
    """
    h, J, const = ising_coefficients(inst, p)
    return _ising_sum(inst.n, h, J), const


def build_mixer(n: int) -> PauliSum:
    if n < 1:
        raise ValueError("mixer needs at least one qubit")
    return PauliSum(n, tuple(PauliTerm(1.0, PauliString.from_sparse(n, {i: "X"})) for i in range(n)))


def build_cd_pool(
    n: int,
    weighted: bool = False,
    h: Sequence[float] | None = None,
    J: dict[tuple[int, int], float] | None = None,
) -> PauliSum:
    """Counter-diabatic term pool: single Y's plus YZ/ZY on every pair i<j."""
    if weighted:
        if h is None or J is None:
            raise ValueError("weighted CD pool needs h and J")
        return nc_first_order(build_mixer(n), _ising_sum(n, h, J))
    terms = [PauliTerm(1.0, PauliString.from_sparse(n, {i: "Y"})) for i in range(n)]
    for i, j in combinations(range(n), 2):
        terms.append(PauliTerm(1.0, PauliString.from_sparse(n, {i: "Y", j: "Z"})))
        terms.append(PauliTerm(1.0, PauliString.from_sparse(n, {i: "Z", j: "Y"})))
    return simplify(PauliSum(n, tuple(terms)), 0.0)
