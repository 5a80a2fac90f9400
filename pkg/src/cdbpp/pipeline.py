"""Sweep sub-Hamiltonians, filter partial solutions, combine them into packings.

Step I runs the variational circuit once per ``k`` in the schedule and keeps
every bitstring whose final probability exceeds a threshold.  Step II splits
the kept bitstrings by capacity.  Step III searches for the fewest disjoint
feasible blocks covering all items and enumerates every such packing.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .ansatz import AnsatzKind, build_circuit
from .encoding import (
    BppInstance,
    EncodingParams,
    bits_to_index,
    build_cd_pool,
    build_cost_hamiltonian,
    build_mixer,
    check_bitstring,
    delta_omega,
    index_to_bits,
    ising_coefficients,
    k_schedule,
)
from .optimizer import OptConfig, OptResult, optimize
from .oracle import brute_force_pack, brute_force_partial
from .simulator import StateVector, sample


class CoverError(RuntimeError):
    """The feasible blocks on hand cannot cover every item."""


@dataclass(frozen=True)
class PartialSolution:
    bitstring: str
    weight: int
    max_probability: float = 0.0
    ks: frozenset = frozenset()


@dataclass
class PartialSolutionSet:
    feasible: dict[str, PartialSolution] = field(default_factory=dict)
    infeasible: dict[str, PartialSolution] = field(default_factory=dict)

    @property
    def fps(self) -> int:
        return len(self.feasible)

    @property
    def ips(self) -> int:
        return len(self.infeasible)


@dataclass
class PackingResult:
    m_opt: int
    solutions: list[tuple[str, ...]]

    @property
    def fs_unordered(self) -> int:
        return len(self.solutions)

    @property
    def fs_ordered(self) -> int:
        return len(self.solutions) * math.factorial(self.m_opt)


def filter_feasible(S: Iterable[str] | Mapping[str, tuple[float, Iterable[float]]], inst: BppInstance) -> PartialSolutionSet:
    """Classify bitstrings by capacity; the all-zeros string is dropped.

    ``S`` may map each bitstring to ``(max_probability, ks)``.
    """
    out = PartialSolutionSet()
    info = S if isinstance(S, Mapping) else {b: (0.0, ()) for b in S}
    for bits in sorted(info):
        check_bitstring(inst, bits)
        if "1" not in bits:
            continue
        prob, ks = info[bits]
        ps = PartialSolution(bits, inst.weight_of(bits), float(prob), frozenset(ks))
        (out.feasible if ps.weight <= inst.capacity else out.infeasible)[bits] = ps
    return out


def combine_bins(fps: Iterable[str] | PartialSolutionSet, inst: BppInstance) -> PackingResult:
    """Fewest feasible blocks covering all items, with every optimal packing.

    Depth-first exact cover: always branch on the lowest-index uncovered item,
    trying only blocks whose lowest item it is, with a volume bound on the
    bins left.  Bin counts are tried in increasing order.
    """
    blocks = sorted(fps.feasible) if isinstance(fps, PartialSolutionSet) else sorted(set(fps))
    if not blocks:
        raise CoverError("no feasible partial solutions to combine")
    n = inst.n
    full = (1 << n) - 1
    by_lowest: list[list[int]] = [[] for _ in range(n)]
    for bits in blocks:
        check_bitstring(inst, bits)
        if inst.weight_of(bits) > inst.capacity or "1" not in bits:
            raise ValueError(f"{bits} is not a feasible nonempty block")
        by_lowest[bits.index("1")].append(bits_to_index(bits))
    for i in range(n):
        if not any(mask & (1 << (n - 1 - i)) for lst in by_lowest for mask in lst):
            raise CoverError(f"item {i} appears in no feasible block")
    C = inst.capacity
    mask_w = {mask: inst.weight_of(index_to_bits(mask, n)) for lst in by_lowest for mask in lst}

    def search(m: int) -> list[tuple[int, ...]]:
        found: list[tuple[int, ...]] = []
        chosen: list[int] = []

        def rec(covered: int, left: int, remaining: int) -> None:
            if covered == full:
                found.append(tuple(chosen))
                return
            if left == 0 or remaining > left * C:
                return
            i = next(q for q in range(n) if not covered & (1 << (n - 1 - q)))
            for mask in by_lowest[i]:
                if mask & covered:
                    continue
                chosen.append(mask)
                rec(covered | mask, left - 1, remaining - mask_w[mask])
                chosen.pop()

        rec(0, m, inst.total_weight)
        return found

    for m in range(max(1, math.ceil(inst.total_weight / C)), n + 1):
        sols = search(m)
        if sols:
            rendered = sorted(tuple(sorted(index_to_bits(b, n) for b in s)) for s in sols)
            return PackingResult(m, rendered)
    raise CoverError("feasible blocks do not cover the items")


def feasibility_ratio(found: PartialSolutionSet | int, exact_count: int) -> float:
    if exact_count < 1:
        raise ValueError("exact FPS count must be positive")
    count = found.fps if isinstance(found, PartialSolutionSet) else int(found)
    return count / exact_count


def default_threshold(n: int) -> float:
    return 2.0**-n


# --- Step I --------------------------------------------------------------------


@dataclass
class KRun:
    k: float
    index: int
    result: OptResult
    readout: np.ndarray  # (trials, 2**n) probabilities or shot frequencies


def _k_seed(seed: int, k_index: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(k_index,)).generate_state(1)[0])


def sweep_k(
    inst: BppInstance,
    kind: AnsatzKind | str,
    p: int,
    stepsize: float,
    opt: OptConfig,
    *,
    B: float = 1.0,
    cd_weighted: bool = False,
    shots: int = 0,
    snapshots: tuple[int, ...] = (),
) -> list[KRun]:
    """Optimise one circuit per ``k`` in the schedule.

    Trial ``t`` at schedule position ``j`` is seeded from ``(opt.seed, j, t)``;
    shot readout for that run from ``(opt.seed, j, t, 1)``.
    """
    kind = AnsatzKind.parse(kind)
    dw = delta_omega(inst)
    ks = k_schedule(inst.capacity, dw, stepsize)
    h_mixer = build_mixer(inst.n)
    h_cd_fixed = None if cd_weighted else build_cd_pool(inst.n)
    runs = []
    for j, k in enumerate(ks):
        params = EncodingParams(k=k, delta_w=dw, capacity=inst.capacity, B=B)
        h_cost, _ = build_cost_hamiltonian(inst, params)
        if cd_weighted:
            h, J, _ = ising_coefficients(inst, params)
            h_cd = build_cd_pool(inst.n, weighted=True, h=h, J=J)
        else:
            h_cd = h_cd_fixed
        circ = build_circuit(kind, h_cost, h_mixer, h_cd, p)
        cfg = OptConfig(
            iterations=opt.iterations, learning_rate=opt.learning_rate, beta1=opt.beta1,
            beta2=opt.beta2, epsilon=opt.epsilon, trials=opt.trials,
            seed=_k_seed(opt.seed, j), init_range=opt.init_range,
        )
        res = optimize(circ, h_cost, cfg, snapshots)
        probs = np.abs(res.final_states) ** 2
        if shots > 0:
            readout = np.stack([
                sample(StateVector(inst.n, res.final_states[t]), shots,
                       np.random.SeedSequence(opt.seed, spawn_key=(j, t, 1))).frequencies()
                for t in range(opt.trials)
            ])
        else:
            readout = probs
        runs.append(KRun(k, j, res, readout))
    return runs


def _collect(runs: list[KRun], threshold: float, pick) -> dict[str, tuple[float, list[float]]]:
    """Union of above-threshold bitstrings; ``pick(run)`` gives the distribution to read."""
    kept: dict[str, tuple[float, list[float]]] = {}
    for r in runs:
        dist = pick(r)
        n = int(round(math.log2(dist.shape[0])))
        for b in np.flatnonzero(dist > threshold):
            bits = index_to_bits(int(b), n)
            prob, ks = kept.get(bits, (0.0, []))
            kept[bits] = (max(prob, float(dist[b])), ks + [r.k])
    return kept


def subset_sampling(
    inst: BppInstance,
    kind: AnsatzKind | str,
    p: int,
    stepsize: float,
    opt: OptConfig,
    threshold: float | None = None,
    **kwargs,
) -> PartialSolutionSet:
    """Steps I and II: kept bitstrings of the best trial per ``k``, split by capacity."""
    thr = default_threshold(inst.n) if threshold is None else threshold
    if not 0 <= thr < 1:
        raise ValueError("threshold must lie in [0, 1)")
    runs = sweep_k(inst, kind, p, stepsize, opt, **kwargs)
    return filter_feasible(_collect(runs, thr, lambda r: r.readout[r.result.best_trial]), inst)


# --- full run --------------------------------------------------------------------


@dataclass
class RunReport:
    config: dict
    metrics: dict
    histories: list[dict]
    snapshots: list[dict]
    oracle: dict | None = None
    wall_clock_s: float | None = None
    partial_solutions: dict | None = None

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "config": self.config,
            "metrics": self.metrics,
            "histories": self.histories,
            "snapshots": self.snapshots,
        }
        if self.partial_solutions is not None:
            out["partial_solutions"] = self.partial_solutions
        if self.oracle is not None:
            out["oracle"] = self.oracle
        if include_timing:
            out["wall_clock_s"] = self.wall_clock_s
        return out

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), sort_keys=True, indent=1) + "\n"


def _set_metrics(found: PartialSolutionSet, exact: int) -> dict:
    return {"fps": found.fps, "ips": found.ips, "fr": feasibility_ratio(found, exact)}


def run_experiment(
    inst: BppInstance,
    kind: AnsatzKind | str,
    p: int,
    stepsize: float,
    opt: OptConfig,
    threshold: float | None = None,
    *,
    B: float = 1.0,
    cd_weighted: bool = False,
    shots: int = 0,
    snapshots: tuple[int, ...] = (),
    with_oracle: bool = False,
) -> RunReport:
    """All three steps plus metrics.

    ``fr``/``fps``/``ips`` use the best trial at each ``k``; the ``*_trials``
    lists repeat the sweep reading trial ``t`` everywhere, and ``fr_mean`` /
    ``fr_std`` summarise them.
    """
    t0 = time.perf_counter()
    kind = AnsatzKind.parse(kind)
    thr = default_threshold(inst.n) if threshold is None else threshold
    if not 0 <= thr < 1:
        raise ValueError("threshold must lie in [0, 1)")
    runs = sweep_k(inst, kind, p, stepsize, opt, B=B, cd_weighted=cd_weighted, shots=shots, snapshots=snapshots)
    exact_fps = brute_force_partial(inst)
    n_exact = len(exact_fps)

    found = filter_feasible(_collect(runs, thr, lambda r: r.readout[r.result.best_trial]), inst)
    metrics = _set_metrics(found, n_exact)
    metrics["exact_fps"] = n_exact
    per_trial = [
        _set_metrics(filter_feasible(_collect(runs, thr, lambda r, t=t: r.readout[t]), inst), n_exact)
        for t in range(opt.trials)
    ]
    frs = np.array([m["fr"] for m in per_trial])
    metrics["fr_trials"] = frs.tolist()
    metrics["fps_trials"] = [m["fps"] for m in per_trial]
    metrics["ips_trials"] = [m["ips"] for m in per_trial]
    metrics["fr_mean"] = float(frs.mean())
    metrics["fr_std"] = float(frs.std())
    metrics["fps_mean"] = float(np.mean(metrics["fps_trials"]))
    metrics["ips_mean"] = float(np.mean(metrics["ips_trials"]))

    try:
        packing = combine_bins(found, inst)
        metrics.update(m_opt=packing.m_opt, fs_unordered=packing.fs_unordered,
                       fs_ordered=packing.fs_ordered, cover_error=None)
    except CoverError as exc:
        metrics.update(m_opt=None, fs_unordered=0, fs_ordered=0, cover_error=str(exc))

    snaps = []
    for it in sorted({int(s) for s in snapshots if 0 <= int(s) <= opt.iterations}):
        kept = _collect(runs, thr, lambda r, it=it: r.result.snapshots[it][r.result.best_trial])
        snap_set = filter_feasible(kept, inst)
        dists = []
        for r in runs:
            dist = r.result.snapshots[it][r.result.best_trial]
            dists.append({
                "k": r.k,
                "probabilities": {index_to_bits(int(b), inst.n): float(dist[b]) for b in np.flatnonzero(dist > thr)},
            })
        snaps.append({"iteration": it, **_set_metrics(snap_set, n_exact), "distributions": dists})

    histories = [
        {"k": r.k, "trial": t, "costs": r.result.histories[t].tolist()}
        for r in runs for t in range(opt.trials)
    ]
    config = {
        "instance": {"capacity": inst.capacity, "weights": list(inst.weights)},
        "ansatz": kind.value,
        "layers": p,
        "stepsize": stepsize,
        "delta_w": delta_omega(inst),
        "ks": [r.k for r in runs],
        "iterations": opt.iterations,
        "trials": opt.trials,
        "learning_rate": opt.learning_rate,
        "seed": opt.seed,
        "init_range": list(opt.init_range),
        "threshold": thr,
        "shots": shots,
        "B": B,
        "cd_weighted": cd_weighted,
        "best_trials": [r.result.best_trial for r in runs],
    }
    oracle = None
    if with_oracle:
        m, fu, fo = brute_force_pack(inst)
        oracle = {"fps": n_exact, "m_opt": m, "fs_unordered": fu, "fs_ordered": fo}
    partial = {
        "feasible": sorted(found.feasible),
        "infeasible": sorted(found.infeasible),
    }
    return RunReport(config, metrics, histories, snaps, oracle, time.perf_counter() - t0, partial)
