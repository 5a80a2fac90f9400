"""Exact statevector simulation of Pauli-rotation circuits.

Basis index ``b`` renders as an ``n``-bit string with qubit (item) 0 leftmost,
i.e. qubit 0 is the most significant bit.  Every rotation is
``exp(-i * theta * c * P)`` with ``c`` the Hamiltonian term coefficient and
``theta`` the shared layer parameter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from . import _kernels as _k
from .pauli import PauliString, PauliSum

if TYPE_CHECKING:
    from .ansatz import Circuit

MAX_QUBITS = 24
NORM_TOL = 1e-10


class SimulationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.amplitudes.shape != (1 << self.n,):
            raise SimulationError(f"expected {1 << self.n} amplitudes, got {self.amplitudes.shape}")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def basis(cls, bits: str) -> StateVector:
        amps = np.zeros(1 << len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(len(bits), amps)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Outcome weights over basis states: probabilities, or counts if ``shots`` is set."""

    n: int
    values: np.ndarray
    shots: int | None = None

    @property
    def exact(self) -> bool:
        return self.shots is None

    def frequencies(self) -> np.ndarray:
        if self.shots is None:
            return self.values
        return self.values / self.shots

    def to_dict(self) -> dict[str, float | int]:
        nz = np.flatnonzero(self.values)
        cast = float if self.shots is None else int
        return {format(int(b), f"0{self.n}b"): cast(self.values[b]) for b in nz}

    def to_csv(self) -> str:
        return "".join(f"{b},{v!r}\n" for b, v in self.to_dict().items())


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise SimulationError(f"qubit count {n} outside [1, {MAX_QUBITS}]")


def init_plus(n: int) -> StateVector:
    _check_n(n)
    dim = 1 << n
    return StateVector(n, np.full(dim, 1.0 / math.sqrt(dim), dtype=complex))


class PauliAction:
    """Precomputed ``P|psi>``: ``(P psi)[b] = phase[b] * psi[perm[b]]``."""

    __slots__ = ("perm", "phase", "diagonal")

    def __init__(self, p: PauliString):
        idx = np.arange(1 << p.n, dtype=np.int64)
        src = idx ^ p.x
        ny = (p.x & p.z).bit_count()
        sign = 1 - 2 * (np.bitwise_count(src & p.z) & 1).astype(np.float64)
        self.phase = (1j ** ny) * sign
        self.perm = src
        self.diagonal = p.x == 0

    def apply(self, psi: np.ndarray) -> np.ndarray:
        if self.diagonal:
            return self.phase * psi
        return self.phase * psi[..., self.perm]


def apply_pauli_rotation(s: StateVector, p: PauliString, theta: float) -> StateVector:
    if p.n != s.n:
        raise SimulationError(f"Pauli string on {p.n} qubits applied to {s.n}-qubit state")
    act = PauliAction(p)
    out = math.cos(theta) * s.amplitudes - 1j * math.sin(theta) * act.apply(s.amplitudes)
    return StateVector(s.n, out)


def apply_operator(psi: np.ndarray, h: PauliSum) -> np.ndarray:
    out = np.zeros_like(psi)
    for t in h.terms:
        out = out + t.coeff * PauliAction(t.string).apply(psi)
    return out


def expectation(s: StateVector, h: PauliSum) -> float:
    if h.n != s.n:
        raise SimulationError(f"Hamiltonian on {h.n} qubits, state on {s.n}")
    val = np.vdot(s.amplitudes, apply_operator(s.amplitudes, h))
    if abs(val.imag) > 1e-9 * max(1.0, abs(val.real)):
        raise SimulationError(f"expectation has imaginary part {val.imag:g}; operator not Hermitian")
    return float(val.real)


def full_distribution(s: StateVector) -> SampleSet:
    return SampleSet(s.n, np.abs(s.amplitudes) ** 2)


def sample(s: StateVector, shots: int, seed: int | np.random.SeedSequence) -> SampleSet:
    if shots < 1:
        raise SimulationError("shots must be at least 1")
    probs = np.abs(s.amplitudes) ** 2
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    return SampleSet(s.n, rng.multinomial(shots, probs), shots)


# --- compiled circuits -------------------------------------------------------


class Program:
    """A circuit lowered to flat arrays, runnable on a batch of parameter rows.

    Consecutive diagonal rotations bound to the same slot commute, so they are
    fused into one phase block.  Layout of the block arrays is documented in
    :mod:`cdbpp._kernels`.
    """

    def __init__(self, n: int, num_params: int, blocks: list[tuple]):
        self.n = n
        self.num_params = num_params
        dim = 1 << n
        nb = len(blocks)
        self.kinds = np.zeros(nb, dtype=np.int64)
        self.slots = np.zeros(nb, dtype=np.int64)
        self.coeffs = np.zeros(nb)
        self.xmasks = np.zeros(nb, dtype=np.int64)
        self.hbits = np.ones(nb, dtype=np.int64)
        self.gfacs = np.ones(nb, dtype=complex)
        self.vecs = np.zeros((nb, dim))
        for t, (kind, slot, coeff, x, gfac, vec) in enumerate(blocks):
            self.kinds[t] = kind
            self.slots[t] = slot
            self.coeffs[t] = coeff
            self.xmasks[t] = x
            self.hbits[t] = 1 << (x.bit_length() - 1) if x else 1
            self.gfacs[t] = gfac
            self.vecs[t] = vec

    @classmethod
    def from_circuit(cls, circuit: Circuit) -> Program:
        idx = np.arange(1 << circuit.n, dtype=np.int64)
        blocks: list[list] = []
        for g in circuit.gates:
            if g.string.is_diagonal:
                sign = 1 - 2 * (np.bitwise_count(idx & g.string.z) & 1).astype(np.float64)
                if blocks and blocks[-1][0] == 0 and blocks[-1][1] == g.slot:
                    blocks[-1][5] = blocks[-1][5] + g.coeff * sign
                else:
                    blocks.append([0, g.slot, 0.0, 0, 1.0, g.coeff * sign])
            else:
                x, z = g.string.x, g.string.z
                sign = 1 - 2 * (np.bitwise_count((idx ^ x) & z) & 1).astype(np.float64)
                gfac = 1j ** (x & z).bit_count()
                blocks.append([1, g.slot, float(g.coeff), x, gfac, sign])
        return cls(circuit.n, circuit.num_params, [tuple(b) for b in blocks])

    def _arrays(self) -> tuple:
        return self.kinds, self.slots, self.coeffs, self.xmasks, self.hbits, self.gfacs, self.vecs

    def _params(self, params) -> np.ndarray:
        params = np.ascontiguousarray(np.atleast_2d(np.asarray(params, dtype=np.float64)))
        if params.shape[1] != self.num_params:
            raise SimulationError(f"expected {self.num_params} parameters, got {params.shape[1]}")
        return params

    def run(self, params: np.ndarray) -> np.ndarray:
        """Final states for a ``(batch, num_params)`` parameter array."""
        params = self._params(params)
        dim = 1 << self.n
        psi = np.full((params.shape[0], dim), 1.0 / math.sqrt(dim), dtype=complex)
        _k.forward(psi, params, *self._arrays())
        return psi

    def value_and_grad(self, params: np.ndarray, diag: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Adjoint-mode cost and gradient of a diagonal observable.

        Returns ``(costs, grads, states)``.
        """
        params = self._params(params)
        psi = self.run(params)
        costs = np.empty(params.shape[0])
        _k.expect_diag(psi, np.ascontiguousarray(diag, dtype=np.float64), costs)
        return costs, self.backward(params, psi, psi * diag[None, :]), psi

    def backward(self, params: np.ndarray, psi: np.ndarray, lam: np.ndarray) -> np.ndarray:
        params = self._params(params)
        grads = np.zeros_like(params)
        _k.backward(psi.copy(), np.array(lam, dtype=complex, order="C"), params, grads, *self._arrays())
        return grads


def _evolve_gates(circuit: Circuit, angles: Sequence[float]) -> np.ndarray:
    s = init_plus(circuit.n)
    for g, a in zip(circuit.gates, angles):
        s = apply_pauli_rotation(s, g.string, a)
    return s.amplitudes


def _shift_gradient(circuit: Circuit, params: np.ndarray, h: PauliSum) -> np.ndarray:
    """Gate-level parameter shift: ``c * [f(angle + pi/4) - f(angle - pi/4)]``."""
    base = [params[g.slot] * g.coeff for g in circuit.gates]
    grad = np.zeros(circuit.num_params)
    for t, g in enumerate(circuit.gates):
        vals = []
        for shift in (math.pi / 4, -math.pi / 4):
            angles = list(base)
            angles[t] += shift
            vals.append(expectation(StateVector(circuit.n, _evolve_gates(circuit, angles)), h))
        grad[g.slot] += g.coeff * (vals[0] - vals[1])
    return grad


def gradient(circuit: Circuit, params: Sequence[float], h: PauliSum, method: str = "adjoint") -> np.ndarray:
    """Gradient of ``<psi(params)|h|psi(params)>``.

    ``method="shift"`` runs the gate-level parameter-shift rule literally (two
    circuit evaluations per gate); ``"adjoint"`` gives the same derivative with
    one forward and one backward sweep.
    """
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (circuit.num_params,):
        raise SimulationError(f"expected {circuit.num_params} parameters, got {params.shape}")
    if method == "shift":
        return _shift_gradient(circuit, params, h)
    if method != "adjoint":
        raise SimulationError(f"unknown gradient method {method!r}")
    prog = Program.from_circuit(circuit)
    if h.is_diagonal:
        _, g, _ = prog.value_and_grad(params[None, :], h.diagonal())
        return g[0]
    psi = prog.run(params[None, :])
    return prog.backward(params[None, :], psi, apply_operator(psi, h))[0]
