"""Adam minimisation of a diagonal cost over seeded restarts.

All trials run in lockstep as rows of one batch; each row only ever touches
its own parameters, moments and state, so trial ``t`` gives the same history
whatever the other rows hold.  Trial ``t`` draws its start point from
``SeedSequence(seed, spawn_key=(t,))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ansatz import Circuit
from .pauli import PauliSum


@dataclass(frozen=True)
class OptConfig:
    iterations: int = 100
    learning_rate: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    trials: int = 5
    seed: int = 0
    init_range: tuple[float, float] = (0.0, 2 * math.pi)

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        lo, hi = self.init_range
        if not hi > lo:
            raise ValueError("init_range must be a non-empty interval")


@dataclass
class AdamState:
    params: np.ndarray
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def start(cls, params: np.ndarray) -> AdamState:
        params = np.asarray(params, dtype=np.float64)
        return cls(params.copy(), np.zeros_like(params), np.zeros_like(params))


def adam_step(state: AdamState, grad: np.ndarray, lr: float = 0.05, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    """One bias-corrected Adam descent step; returns a new state."""
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.params.shape:
        raise ValueError(f"gradient shape {grad.shape} != parameter shape {state.params.shape}")
    t = state.t + 1
    m = beta1 * state.m + (1 - beta1) * grad
    v = beta2 * state.v + (1 - beta2) * grad * grad
    m_hat = m / (1 - beta1**t)
    v_hat = v / (1 - beta2**t)
    params = state.params - lr * m_hat / (np.sqrt(v_hat) + eps)
    return AdamState(params, m, v, t)


@dataclass
class OptResult:
    best_trial: int
    best_params: np.ndarray
    best_cost: float
    histories: np.ndarray  # (trials, iterations + 1)
    final_params: np.ndarray  # (trials, num_params)
    final_states: np.ndarray  # (trials, 2**n)
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)  # iteration -> (trials, 2**n) probabilities

    @property
    def final_costs(self) -> np.ndarray:
        return self.histories[:, -1]

    def final_probabilities(self, trial: int | None = None) -> np.ndarray:
        t = self.best_trial if trial is None else trial
        return np.abs(self.final_states[t]) ** 2

    def history_csv(self) -> str:
        lines = ["trial,iteration,cost\n"]
        for t, row in enumerate(self.histories):
            lines += [f"{t},{i},{c!r}\n" for i, c in enumerate(row)]
        return "".join(lines)


def initial_params(cfg: OptConfig, num_params: int, trial: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(trial,)))
    lo, hi = cfg.init_range
    return rng.uniform(lo, hi, size=num_params)


def optimize(c: Circuit, h_cost: PauliSum, cfg: OptConfig, snapshots: tuple[int, ...] = ()) -> OptResult:
    """Run ``cfg.trials`` independent Adam descents of ``<H_c>`` for ``cfg.iterations`` steps.

    ``snapshots`` lists iteration numbers (0 = initial point) at which the
    per-trial measurement distributions are recorded.
    """
    if not h_cost.is_diagonal:
        raise ValueError("optimize expects a diagonal cost Hamiltonian")
    diag = h_cost.diagonal()
    prog = c.program
    start = np.stack([initial_params(cfg, c.num_params, t) for t in range(cfg.trials)])
    state = AdamState.start(start)
    histories = np.empty((cfg.trials, cfg.iterations + 1))
    wanted = {int(s) for s in snapshots if 0 <= int(s) <= cfg.iterations}
    snaps: dict[int, np.ndarray] = {}

    for it in range(cfg.iterations + 1):
        costs, grads, psi = prog.value_and_grad(state.params, diag)
        histories[:, it] = costs
        if it in wanted:
            snaps[it] = np.abs(psi) ** 2
        if it == cfg.iterations:
            break
        state = adam_step(state, grads, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)

    best = int(np.argmin(histories[:, -1]))
    return OptResult(
        best_trial=best,
        best_params=state.params[best].copy(),
        best_cost=float(histories[best, -1]),
        histories=histories,
        final_params=state.params,
        final_states=psi,
        snapshots=snaps,
    )
