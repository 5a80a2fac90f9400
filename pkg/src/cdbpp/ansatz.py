"""The four layered ansatz circuits and their gate-level decomposition.

Per layer, applied to the state in this order:

    QAOA         cost(alpha)  -> mixer(beta)
    DC_QAOA      cd(gamma)    -> cost(alpha) -> mixer(beta)
    CD_INSPIRED  cd(gamma)
    CD_MIXER     cd(gamma)    -> mixer(beta)

Each Hamiltonian exponential is digitised as one rotation per term, in the
Hamiltonian's term order, all bound to that layer's parameter.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from math import comb

import numpy as np

from .pauli import PauliString, PauliSum
from .simulator import Program, SimulationError, StateVector, expectation


class AnsatzKind(enum.Enum):
    QAOA = "qaoa"
    DC_QAOA = "dcqaoa"
    CD_INSPIRED = "cd"
    CD_MIXER = "cdmixer"

    @classmethod
    def parse(cls, name: str | AnsatzKind) -> AnsatzKind:
        if isinstance(name, cls):
            return name
        key = name.strip().lower().replace("-", "").replace("_", "")
        aliases = {"qaoa": cls.QAOA, "dcqaoa": cls.DC_QAOA, "cd": cls.CD_INSPIRED,
                   "cdinspired": cls.CD_INSPIRED, "cdmixer": cls.CD_MIXER}
        if key not in aliases:
            raise ValueError(f"unknown ansatz {name!r}; expected one of qaoa, dcqaoa, cd, cdmixer")
        return aliases[key]

    @property
    def layer_params(self) -> tuple[str, ...]:
        return _LAYER_PARAMS[self]


_LAYER_PARAMS = {
    AnsatzKind.QAOA: ("alpha", "beta"),
    AnsatzKind.DC_QAOA: ("alpha", "beta", "gamma"),
    AnsatzKind.CD_INSPIRED: ("gamma",),
    AnsatzKind.CD_MIXER: ("beta", "gamma"),
}

# Hamiltonians in application order within one layer
_LAYER_ORDER = {
    AnsatzKind.QAOA: ("cost", "mixer"),
    AnsatzKind.DC_QAOA: ("cd", "cost", "mixer"),
    AnsatzKind.CD_INSPIRED: ("cd",),
    AnsatzKind.CD_MIXER: ("cd", "mixer"),
}
_PARAM_OF = {"cost": "alpha", "mixer": "beta", "cd": "gamma"}


@dataclass(frozen=True)
class Gate:
    string: PauliString
    coeff: float
    slot: int


@dataclass(frozen=True)
class Circuit:
    kind: AnsatzKind
    n: int
    layers: int
    gates: tuple[Gate, ...]

    @property
    def num_params(self) -> int:
        return len(self.kind.layer_params) * self.layers

    @property
    def param_names(self) -> list[str]:
        return [f"{name}_{j + 1}" for j in range(self.layers) for name in self.kind.layer_params]

    @cached_property
    def program(self) -> Program:
        return Program.from_circuit(self)

    def dump(self) -> str:
        return "".join(f"ROT {g.string.label} {g.coeff!r} {g.slot}\n" for g in self.gates)


def _real_coeff(c: complex, where: str) -> float:
    if abs(c.imag) > 1e-12:
        raise SimulationError(f"{where} term has complex coefficient {c}; generator must be Hermitian")
    return float(c.real)


def build_circuit(kind: AnsatzKind | str, h_cost: PauliSum, h_mixer: PauliSum, h_cd: PauliSum, p: int) -> Circuit:
    kind = AnsatzKind.parse(kind)
    if p < 1:
        raise ValueError("layer count must be at least 1")
    n = h_cost.n
    if h_mixer.n != n or h_cd.n != n:
        raise SimulationError("cost, mixer and CD Hamiltonians act on different qubit counts")
    hams = {"cost": h_cost, "mixer": h_mixer, "cd": h_cd}
    names = kind.layer_params
    gates: list[Gate] = []
    for j in range(p):
        for part in _LAYER_ORDER[kind]:
            slot = j * len(names) + names.index(_PARAM_OF[part])
            for t in hams[part].terms:
                gates.append(Gate(t.string, _real_coeff(t.coeff, part), slot))
    return Circuit(kind, n, p, tuple(gates))


def _check_params(c: Circuit, params) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (c.num_params,):
        raise SimulationError(f"{c.kind.name} with p={c.layers} takes {c.num_params} parameters, got {params.shape}")
    return params


def evaluate(c: Circuit, params) -> StateVector:
    params = _check_params(c, params)
    return StateVector(c.n, c.program.run(params[None, :])[0])


def cost(c: Circuit, params, h_cost: PauliSum) -> float:
    return expectation(evaluate(c, params), h_cost)


# --- decomposition -------------------------------------------------------------


@dataclass(frozen=True)
class BasicGate:
    """One elementary gate.

    Parameterised rotations have ``slot`` set and angle ``scale * params[slot]``;
    fixed gates have ``slot=None`` and a constant ``angle`` (``None`` for H/CNOT).
    """

    name: str
    qubits: tuple[int, ...]
    slot: int | None = None
    scale: float = 0.0
    angle: float | None = None

    @property
    def parameterized(self) -> bool:
        return self.slot is not None

    def line(self) -> str:
        qs = " ".join(str(q) for q in self.qubits)
        if self.parameterized:
            return f"{self.name} {qs} {self.scale!r} {self.slot}"
        if self.angle is not None:
            return f"{self.name} {qs} {self.angle!r} -"
        return f"{self.name} {qs}"


_HALF_PI = math.pi / 2
_ROT = {"X": "RX", "Y": "RY", "Z": "RZ"}


def _to_z(q: int, letter: str) -> list[BasicGate]:
    if letter == "X":
        return [BasicGate("H", (q,))]
    if letter == "Y":
        return [BasicGate("RX", (q,), angle=_HALF_PI)]
    return []


def _from_z(q: int, letter: str) -> list[BasicGate]:
    if letter == "X":
        return [BasicGate("H", (q,))]
    if letter == "Y":
        return [BasicGate("RX", (q,), angle=-_HALF_PI)]
    return []


def _decompose_one(g: Gate) -> list[BasicGate]:
    sup = g.string.support
    if len(sup) == 1:
        (q,) = sup
        letter = g.string.letter(q)
        return [BasicGate(_ROT[letter], (q,), g.slot, 2.0 * g.coeff)]
    if len(sup) == 2:
        a, b = sup
        la, lb = g.string.letter(a), g.string.letter(b)
        pre = _to_z(a, la) + _to_z(b, lb)
        post = _from_z(a, la) + _from_z(b, lb)
        core = [BasicGate("CNOT", (a, b)), BasicGate("RZ", (b,), g.slot, 2.0 * g.coeff), BasicGate("CNOT", (a, b))]
        return pre + core + post
    if not sup:
        return []  # global phase
    raise ValueError(f"generator {g.string} has weight {len(sup)} > 2")


def _yz_pair(g: Gate, h: Gate) -> tuple[int, int] | None:
    """Qubits (i, j) if ``g = Y_i Z_j`` and ``h = Z_i Y_j`` share a parameter."""
    if g.slot != h.slot or g.string.weight != 2 or g.string.support != h.string.support:
        return None
    i, j = g.string.support
    if (g.string.letter(i), g.string.letter(j), h.string.letter(i), h.string.letter(j)) == ("Y", "Z", "Z", "Y"):
        return i, j
    return None


def decompose(c: Circuit) -> list[BasicGate]:
    """Lower a circuit to CNOTs and single-qubit rotations.

    Weight-1 rotations become one RX/RY/RZ.  Weight-2 rotations become
    CNOT-RZ-CNOT between basis changes.  An adjacent commuting pair
    ``Y_i Z_j``, ``Z_i Y_j`` on the same parameter is lowered together with two
    CNOTs: conjugating by ``RY_j(pi/2)`` then ``CNOT(i->j)`` turns the pair into
    ``Y_i`` and ``Y_j``.
    """
    out: list[BasicGate] = []
    gates = c.gates
    t = 0
    while t < len(gates):
        g = gates[t]
        pair = _yz_pair(g, gates[t + 1]) if t + 1 < len(gates) else None
        if pair is not None:
            i, j = pair
            h = gates[t + 1]
            out += [
                BasicGate("RY", (j,), angle=_HALF_PI),
                BasicGate("CNOT", (i, j)),
                BasicGate("RY", (i,), g.slot, 2.0 * g.coeff),
                BasicGate("RY", (j,), h.slot, 2.0 * h.coeff),
                BasicGate("CNOT", (i, j)),
                BasicGate("RY", (j,), angle=-_HALF_PI),
            ]
            t += 2
            continue
        out += _decompose_one(g)
        t += 1
    return out


def dump_decomposition(gates: list[BasicGate]) -> str:
    return "".join(g.line() + "\n" for g in gates)


@dataclass(frozen=True)
class GateCounts:
    parameterized: int
    cnot: int
    total: int
    table_parameterized: int
    table_cnot: int
    table_total: int

    def as_dict(self) -> dict[str, int]:
        return {
            "parameterized": self.parameterized,
            "cnot": self.cnot,
            "total": self.total,
            "table_parameterized": self.table_parameterized,
            "table_cnot": self.table_cnot,
            "table_total": self.table_total,
        }


def table_formulas(kind: AnsatzKind, n: int) -> tuple[int, int, int]:
    """Published per-layer (parameterized, CNOT, total) counts."""
    c2 = comb(n, 2)
    return {
        AnsatzKind.QAOA: (c2 + n, 2 * c2, 3 * c2 + 2 * n),
        AnsatzKind.DC_QAOA: (2 * c2, 4 * c2, 8 * c2 + 3 * n),
        AnsatzKind.CD_INSPIRED: (c2, 2 * c2, 5 * c2 + 2 * n),
        AnsatzKind.CD_MIXER: (c2 + n, 2 * c2, 5 * c2 + 3 * n),
    }[kind]


def count_gates(gates: list[BasicGate]) -> tuple[int, int, int]:
    return (
        sum(g.parameterized for g in gates),
        sum(g.name == "CNOT" for g in gates),
        len(gates),
    )


def gate_counts(kind: AnsatzKind | str, n: int) -> GateCounts:
    """Per-layer counts from decomposing a one-layer circuit on ``n`` qubits."""
    from .encoding import build_cd_pool, build_mixer

    kind = AnsatzKind.parse(kind)
    if n < 2:
        raise ValueError("gate counts need n >= 2")
    pairs = [(1.0, PauliString.from_sparse(n, {i: "Z"})) for i in range(n)]
    pairs += [(1.0, PauliString.from_sparse(n, {i: "Z", j: "Z"})) for i, j in combinations(range(n), 2)]
    h_cost = PauliSum.from_pairs(n, pairs)
    circ = build_circuit(kind, h_cost, build_mixer(n), build_cd_pool(n), 1)
    measured = count_gates(decompose(circ))
    return GateCounts(*measured, *table_formulas(kind, n))
