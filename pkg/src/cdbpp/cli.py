"""Command-line entry point: ``cdbpp {generate,run,sweep,oracle}``.

Any flag may also come from a ``--config`` file of ``key=value`` lines; flags
given on the command line win.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from pathlib import Path
from typing import Sequence

import numpy as np

from .ansatz import AnsatzKind
from .encoding import BppInstance, InstanceError, ScheduleError, load_instance, random_instance
from .optimizer import OptConfig
from .oracle import OracleCapError, brute_force_pack, brute_force_partial
from .pipeline import run_experiment

log = logging.getLogger("cdbpp")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_LOAD = 3
EXIT_COVER = 4
EXIT_CAP = 5

AGGREGATE_COLUMNS = (
    "kind", "p", "stepsize", "iterations", "fr_mean", "fr_std", "fr_best",
    "fps", "ips", "fps_mean", "ips_mean", "m_opt", "fs_unordered", "fs_ordered", "error",
)


class ConfigError(ValueError):
    pass


def _num_list(text: str, cast=float) -> list:
    """``"1,2,4"`` or an inclusive range ``"20:100:20"``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            lo, hi, step = (float(v) for v in part.split(":"))
            if step <= 0:
                raise ConfigError(f"range step must be positive in {part!r}")
            count = int(np.floor((hi - lo) / step + 1e-9)) + 1
            out += [cast(lo + i * step) for i in range(count)]
        else:
            out.append(cast(part))
    if not out:
        raise ConfigError(f"empty list {text!r}")
    return out


def _kinds(text: str) -> list[AnsatzKind]:
    if text.strip().lower() == "all":
        return list(AnsatzKind)
    try:
        return [AnsatzKind.parse(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def read_config(path: str | Path) -> dict[str, str]:
    cfg = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key.lstrip("-").replace("-", "_")] = value
    return cfg


def _add_shared(p: argparse.ArgumentParser, sweep: bool = False) -> None:
    p.add_argument("--instance", required=False, help="instance file (JSON or CSV)")
    p.add_argument("--ansatz", default="all" if sweep else "cdmixer",
                   help="qaoa|dcqaoa|cd|cdmixer" + (" (comma list or 'all')" if sweep else ""))
    p.add_argument("--layers", default="1")
    p.add_argument("--stepsize", default="1")
    p.add_argument("--iterations", default="100")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=None,
                   help="keep bitstrings with probability above this (default 2**-n)")
    p.add_argument("--shots", type=int, default=0, help="0 = exact distributions")
    p.add_argument("--snapshots", default="", help="iterations to record, e.g. 5,50,100")
    p.add_argument("--cd-weighted", action="store_true", help="keep commutator coefficients in the CD pool")
    p.add_argument("--penalty-b", type=float, default=1.0, help="quadratic penalty weight B")
    p.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cdbpp", description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=None, help="key=value file supplying defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random instance")
    g.add_argument("--n", type=int, required=False, default=10)
    g.add_argument("--weight-lo", type=int, default=21)
    g.add_argument("--weight-hi", type=int, default=49)
    g.add_argument("--capacity", type=int, default=120)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=None)

    r = sub.add_parser("run", help="one full pipeline run")
    _add_shared(r)
    r.add_argument("--oracle", action="store_true", help="embed brute-force results")
    r.add_argument("--timing", action="store_true", help="include wall-clock time (breaks byte-identity)")
    r.add_argument("--histories", default=None, help="write k,trial,iteration,cost CSV here")

    s = sub.add_parser("sweep", help="grid of runs plus aggregate CSV")
    _add_shared(s, sweep=True)
    s.add_argument("--workers", type=int, default=1)

    o = sub.add_parser("oracle", help="brute-force FPS count and optimal packings")
    o.add_argument("--instance", required=False)
    o.add_argument("--out", default=None)
    return parser


_BOOL_KEYS = {"cd_weighted", "oracle", "timing", "verbose"}


def _apply_config(parser: argparse.ArgumentParser, cfg: dict[str, str]) -> None:
    defaults = {}
    for key, value in cfg.items():
        if key in _BOOL_KEYS:
            defaults[key] = value.lower() in {"1", "true", "yes", "on"}
        else:
            defaults[key] = value
    parser.set_defaults(**defaults)
    for action in parser._subparsers._group_actions[0].choices.values():
        known = {a.dest for a in action._actions}
        action.set_defaults(**{k: v for k, v in defaults.items() if k in known})


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")


def _opt_config(args, iterations: int) -> OptConfig:
    return OptConfig(iterations=iterations, learning_rate=float(args.lr), trials=int(args.trials), seed=int(args.seed))


def _load(args) -> BppInstance:
    if not args.instance:
        raise InstanceError("--instance is required")
    return load_instance(args.instance)


def cmd_generate(args) -> int:
    try:
        inst = random_instance(int(args.n), int(args.weight_lo), int(args.weight_hi), int(args.capacity), int(args.seed))
    except InstanceError as exc:
        raise ConfigError(str(exc)) from exc
    _write(inst.to_json() + "\n", args.out)
    return EXIT_OK


def _run_cell(inst: BppInstance, kind: AnsatzKind, layers: int, stepsize: float, iterations: int, args,
              with_oracle: bool = False):
    return run_experiment(
        inst, kind, layers, stepsize, _opt_config(args, iterations), args.threshold,
        B=float(args.penalty_b), cd_weighted=bool(args.cd_weighted), shots=int(args.shots),
        snapshots=tuple(_num_list(args.snapshots, int)) if args.snapshots else (),
        with_oracle=with_oracle,
    )


def cmd_run(args) -> int:
    inst = _load(args)
    kinds = _kinds(args.ansatz)
    layers = _num_list(args.layers, int)
    steps = _num_list(args.stepsize, float)
    iters = _num_list(args.iterations, int)
    if len(kinds) != 1 or len(layers) != 1 or len(steps) != 1 or len(iters) != 1:
        raise ConfigError("run takes single values; use sweep for grids")
    report = _run_cell(inst, kinds[0], layers[0], steps[0], iters[0], args, with_oracle=args.oracle)
    _write(report.to_json(include_timing=args.timing), args.out)
    if args.histories:
        lines = ["k,trial,iteration,cost\n"]
        for h in report.histories:
            lines += [f"{h['k']!r},{h['trial']},{i},{c!r}\n" for i, c in enumerate(h["costs"])]
        _write("".join(lines), args.histories)
    if report.metrics["cover_error"]:
        log.error("no packing from the sampled blocks: %s", report.metrics["cover_error"])
        return EXIT_COVER
    return EXIT_OK


def _cell_name(kind: AnsatzKind, layers: int, stepsize: float, iterations: int) -> str:
    return f"{kind.value}_p{layers}_s{stepsize:g}_it{iterations}.json"


def _sweep_cell(job):
    inst, kind, layers, stepsize, iterations, args, out_dir = job
    row = {"kind": kind.value, "p": layers, "stepsize": stepsize, "iterations": iterations}
    try:
        report = _run_cell(inst, kind, layers, stepsize, iterations, args)
    except (ValueError, RuntimeError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        (out_dir / _cell_name(kind, layers, stepsize, iterations)).write_text(
            json.dumps({"config": row, "error": row["error"]}, sort_keys=True, indent=1) + "\n", encoding="utf-8")
        return row
    (out_dir / _cell_name(kind, layers, stepsize, iterations)).write_text(report.to_json(), encoding="utf-8")
    m = report.metrics
    row.update(
        fr_mean=m["fr_mean"], fr_std=m["fr_std"], fr_best=m["fr"], fps=m["fps"], ips=m["ips"],
        fps_mean=m["fps_mean"], ips_mean=m["ips_mean"], m_opt=m["m_opt"],
        fs_unordered=m["fs_unordered"], fs_ordered=m["fs_ordered"], error=m["cover_error"] or "",
    )
    return row


def cmd_sweep(args) -> int:
    inst = _load(args)
    if not args.out:
        raise ConfigError("sweep needs --out DIR")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = list(product(_kinds(args.ansatz), _num_list(args.layers, int),
                        _num_list(args.stepsize, float), _num_list(args.iterations, int)))
    jobs = [(inst, k, p, s, it, args, out_dir) for k, p, s, it in grid]
    if int(args.workers) > 1:
        with ProcessPoolExecutor(max_workers=int(args.workers)) as pool:
            rows = list(pool.map(_sweep_cell, jobs))
    else:
        rows = [_sweep_cell(j) for j in jobs]
    order = {k: i for i, k in enumerate(AnsatzKind)}
    rows.sort(key=lambda r: (order[AnsatzKind(r["kind"])], r["p"], r["stepsize"], r["iterations"]))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=AGGREGATE_COLUMNS, lineterminator="\n", restval="")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    (out_dir / "aggregate.csv").write_text(buf.getvalue(), encoding="utf-8")
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load(args)
    fps = brute_force_partial(inst)
    m, fu, fo = brute_force_pack(inst)
    doc = {
        "instance": {"capacity": inst.capacity, "weights": list(inst.weights)},
        "fps": len(fps),
        "m_opt": m,
        "fs_unordered": fu,
        "fs_ordered": fo,
        "feasible_partial_solutions": sorted(fps),
    }
    _write(json.dumps(doc, sort_keys=True, indent=1) + "\n", args.out)
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "sweep": cmd_sweep, "oracle": cmd_oracle}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    try:
        if known.config:
            _apply_config(parser, read_config(known.config))
        args = parser.parse_args(argv)
    except (OSError, ConfigError) as exc:
        print(f"cdbpp: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InstanceError as exc:
        print(f"cdbpp: cannot load instance: {exc}", file=sys.stderr)
        return EXIT_LOAD
    except OracleCapError as exc:
        print(f"cdbpp: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ConfigError, ScheduleError, ValueError) as exc:
        print(f"cdbpp: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
