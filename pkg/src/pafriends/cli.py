"""Command line entry point: simulate / trajectory / montecarlo / estimate /
constants / verify, with CSV/JSON outputs and flat key=value config files.

Exit codes: 0 ok, 1 usage, 2 hard verification failure, 3 I/O.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import subprocess
import sys
from collections import Counter
from pathlib import Path

from . import __version__
from .graph import ModelParams, ParameterError, evolve, new_graph
from .montecarlo import (ExperimentConfig, run, trajectory_export,
                         write_histogram_csv)
from .snapshot import SnapshotFormatError, load_snapshot, save_snapshot
from .theory import expectation_constants, regime_constants
from .tolerances import TOLERANCES
from .trackers import (estimate as subsample_estimate, geometric_checkpoints,
                       init_pair, linear_checkpoints, write_trajectory_csv)
from .verify import DEFAULT_MASTER_SEED, SUITES, run_suite

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFICATION = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise UsageError(message)


def build_id() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=2,
                             cwd=Path(__file__).parent)
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return f"v{__version__}"


def _metadata(args, seed) -> dict:
    return {"version": __version__, "build": build_id(),
            "c": args.c, "delta": args.delta, "seed": seed}


def _meta_lines(meta: dict) -> str:
    return "".join(f"# {k}={v}\n" for k, v in meta.items())


def _parse_pair(text: str) -> tuple[int, int]:
    try:
        i, j = (int(tok) for tok in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"pair must look like i:j, got {text!r}") from exc
    return i, j


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.replace(",", " ").split())
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


_CONFIG_PARSERS = {
    "c": int, "delta": float, "n": int, "seed": int, "replicates": int,
    "checkpoints": _parse_int_list, "k": lambda s: tuple(float(t) for t in s.replace(",", " ").split()),
    "pairs": lambda s: tuple(_parse_pair(t) for t in s.replace(",", " ").split()),
    "out": str, "format": str, "verbosity": int, "workers": int,
    "trajectories": int, "suite": str, "spacing": str, "count": int, "snapshot": str,
}


def load_config_file(path: str) -> dict:
    """Flat `key = value` file; unknown keys are rejected."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_PARSERS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = _CONFIG_PARSERS[key](value.strip())
    return values


def _apply_config(args: argparse.Namespace) -> None:
    """Fill unset args from the config file; explicit flags win."""
    if not getattr(args, "config", None):
        return
    for key, value in load_config_file(args.config).items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _require(args, *names) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"missing required option --{name.replace('_', '-')}")


def _outdir(args) -> Path:
    out = Path(args.out if args.out is not None else ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _progress(args, message: str) -> None:
    if (args.verbosity if args.verbosity is not None else 1) > 0:
        print(message)


def _emit(args, payload: dict, csv_rows=None) -> None:
    """Write the command result as JSON (default) or flat CSV to --out/stdout."""
    fmt = args.format or "json"
    if fmt == "json" or csv_rows is None:
        text = json.dumps(payload, indent=2, sort_keys=True)
    else:
        header, rows = csv_rows
        lines = [",".join(header)]
        lines += [",".join(str(v) for v in row) for row in rows]
        text = "\n".join(lines)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    _apply_config(args)
    _require(args, "c", "delta", "n")
    seed = args.seed if args.seed is not None else DEFAULT_MASTER_SEED
    params = ModelParams(args.c, args.delta)
    state = new_graph(params, seed)
    evolve(state, args.n)
    meta = _metadata(args, seed)
    meta["n"] = args.n
    out = _outdir(args)
    if args.snapshot_out:
        save_snapshot(state, args.snapshot_out)
        _progress(args, f"wrote snapshot {args.snapshot_out}")

    edges = Counter()
    edges[(1, 1)] = params.c
    for m in range(2, state.n + 1):
        for t in state.targets_of(m):
            edges[(m, t)] += 1
    with open(out / "edges.csv", "w") as fh:
        fh.write(_meta_lines(meta))
        fh.write("source,target,multiplicity\n")
        for (s, t), mult in sorted(edges.items()):
            fh.write(f"{s},{t},{mult}\n")
    with open(out / "degrees.csv", "w") as fh:
        fh.write(_meta_lines(meta))
        fh.write("node,degree\n")
        for node in range(1, state.n + 1):
            fh.write(f"{node},{state.degree(node)}\n")
    _progress(args, f"wrote {out / 'edges.csv'} and {out / 'degrees.csv'}")
    return EXIT_OK


def cmd_trajectory(args) -> int:
    _apply_config(args)
    _require(args, "c", "delta", "n", "pairs")
    seed = args.seed if args.seed is not None else DEFAULT_MASTER_SEED
    params = ModelParams(args.c, args.delta)
    constants = regime_constants(args.c, args.delta)
    state = new_graph(params, seed)
    trackers = []
    for i, j in sorted(args.pairs, key=lambda p: p[1]):
        evolve(state, j, observers=trackers)
        cps = args.checkpoints if args.checkpoints else (
            geometric_checkpoints(j, args.n) if args.spacing != "linear"
            else linear_checkpoints(j, args.n))
        trackers.append(init_pair(state, i, j, checkpoints=cps))
    evolve(state, args.n, observers=trackers)
    meta = _metadata(args, seed)
    meta["n"] = args.n
    out = _outdir(args)
    with open(out / "trajectory.csv", "w") as fh:
        write_trajectory_csv(fh, trackers, constants, metadata=meta)
    _progress(args, f"wrote {out / 'trajectory.csv'}")
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    _apply_config(args)
    _require(args, "c", "delta", "n", "pairs", "replicates")
    seed = args.seed if args.seed is not None else DEFAULT_MASTER_SEED
    config = ExperimentConfig(
        params=ModelParams(args.c, args.delta),
        pairs=tuple(args.pairs), n_max=args.n,
        checkpoints=args.checkpoints or geometric_checkpoints(
            max(j for _, j in args.pairs), args.n),
        replicates=args.replicates, master_seed=seed,
        estimator_k=tuple(args.k) if args.k else ())
    summary = run(config, workers=args.workers or 1)
    out = _outdir(args)
    payload = summary.to_dict()
    payload["metadata"]["build"] = build_id()
    (out / "summary.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    with open(out / "histogram.csv", "w") as fh:
        fh.write(_meta_lines(payload["metadata"]["config"] | {"build": build_id()}))
        write_histogram_csv(summary, fh)
    count = min(args.trajectories if args.trajectories is not None else 5, config.replicates)
    with open(out / "trajectories.csv", "w") as fh:
        trajectory_export(config, count, fh)
    _progress(args, f"wrote summary.json, histogram.csv, trajectories.csv under {out}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    _apply_config(args)
    _require(args, "k", "pairs")
    ks = tuple(args.k)
    for k in ks:
        if not k > 1:
            raise UsageError(f"estimator requires k > 1, got {k}")
    if args.snapshot is not None:
        state = load_snapshot(args.snapshot)
        if args.c is not None and args.c != state.params.c:
            raise UsageError(f"snapshot has c={state.params.c}, flags say {args.c}")
        if args.delta is not None and args.delta != state.params.delta:
            raise UsageError(f"snapshot has delta={state.params.delta}, flags say {args.delta}")
        source = {"snapshot": args.snapshot}
    else:
        _require(args, "c", "delta", "n")
        if len(ks) != 1:
            raise UsageError("full-run estimates take exactly one --k")
        seed = args.seed if args.seed is not None else DEFAULT_MASTER_SEED
        state = new_graph(ModelParams(args.c, args.delta), seed)
        evolve(state, int(args.n // ks[0]))
        source = {"run_to": state.n, "seed": seed, "target_n": args.n}
    constants = regime_constants(state.params.c, state.params.delta)
    results = []
    for i, j in args.pairs:
        tracker = init_pair(state, i, j)
        for k in ks:
            factor = (k ** constants.power_exponent
                      if constants.regime == "power" else 1.0)
            results.append({
                "pair": [i, j], "k": k, "snapshot_n": state.n,
                "n_ij_snapshot": tracker.n_ij,
                "estimate": subsample_estimate(tracker, k, constants),
                "rescale_factor": factor,
                "regime": constants.regime, "gamma": constants.gamma,
            })
    payload = {"metadata": {"version": __version__, "build": build_id(),
                            "c": state.params.c, "delta": state.params.delta, **source},
               "estimates": results}
    header = ("pair_i", "pair_j", "k", "snapshot_n", "n_ij_snapshot",
              "estimate", "rescale_factor", "regime", "gamma")
    rows = [(r["pair"][0], r["pair"][1], r["k"], r["snapshot_n"], r["n_ij_snapshot"],
             r["estimate"], r["rescale_factor"], r["regime"], r["gamma"]) for r in results]
    _emit(args, payload, (header, rows))
    return EXIT_OK


def cmd_constants(args) -> int:
    _apply_config(args)
    _require(args, "c", "delta")
    i = args.i if args.i is not None else 2
    j = args.j if args.j is not None else 3
    k = regime_constants(args.c, args.delta)
    import warnings as _warnings
    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")
        ec = expectation_constants(i, j, k)
    payload = {
        "metadata": {"version": __version__, "build": build_id()},
        "regime_constants": dataclasses.asdict(k),
        "expectation_constants": dataclasses.asdict(ec),
    }
    rows = [(f"regime_constants.{key}", value)
            for key, value in sorted(dataclasses.asdict(k).items())]
    rows += [(f"expectation_constants.{key}", value)
             for key, value in sorted(dataclasses.asdict(ec).items())]
    _emit(args, payload, (("key", "value"), rows))
    return EXIT_OK


def cmd_verify(args) -> int:
    _apply_config(args)
    suite = args.suite or "all"
    seed = args.seed if args.seed is not None else DEFAULT_MASTER_SEED
    report = run_suite(suite, master_seed=seed, tol=TOLERANCES, workers=args.workers or 1)
    payload = report.to_dict()
    payload["metadata"]["build"] = build_id()
    payload["metadata"]["master_seed"] = seed
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    for r in report.results:
        status = "PASS" if r.passed else ("FAIL" if r.hard else "FAIL(statistical)")
        print(f"{status:18s} {r.name}", file=sys.stderr)
    if report.hard_failures:
        return EXIT_VERIFICATION
    if report.statistical_failures and not args.statistical_warnings:
        return EXIT_VERIFICATION
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _add_common(sub, *, pairs=False, mc=False, formats=False):
    sub.add_argument("--config", help="flat key = value config file; flags override")
    sub.add_argument("--c", type=int, default=None, help="edges per arrival")
    sub.add_argument("--delta", type=float, default=None, help="attachment shift (> -c)")
    sub.add_argument("--seed", type=int, default=None, help="64-bit master seed")
    sub.add_argument("--out", default=None, help="output directory or file")
    sub.add_argument("--verbosity", type=int, default=None,
                     help="0 silences progress lines (default 1)")
    if formats:
        sub.add_argument("--format", choices=("json", "csv"), default=None,
                         help="result format (default json)")
    else:
        sub.set_defaults(format=None)
    if pairs:
        sub.add_argument("--pair", dest="pairs", action="append", type=_parse_pair,
                         default=None, metavar="I:J", help="tracked pair, repeatable")
    if mc:
        sub.add_argument("--checkpoints", type=_parse_int_list, default=None,
                         help="comma separated checkpoint node counts")


def build_parser() -> _Parser:
    parser = _Parser(prog="pafriends",
                     description="linear preferential attachment simulator and verifier")
    parser.add_argument("--version", action="version", version=f"pafriends {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("simulate", help="grow one graph; write edge list and degrees")
    _add_common(p)
    p.add_argument("--n", type=int, default=None, help="target node count")
    p.add_argument("--snapshot-out", default=None, help="also write a resumable snapshot here")
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("trajectory", help="track pairs on one trajectory; write checkpoint CSV")
    _add_common(p, pairs=True, mc=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--spacing", choices=("geometric", "linear"), default=None,
                   help="checkpoint spacing when --checkpoints is not given")
    p.set_defaults(func=cmd_trajectory)

    p = subs.add_parser("montecarlo", help="replicated runs; write summary.json/histogram.csv/trajectories.csv")
    _add_common(p, pairs=True, mc=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--k", action="append", type=float, default=None,
                   help="subsample estimator factor, repeatable (> 1)")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--trajectories", type=int, default=None,
                   help="replicates to export per-step trajectories for")
    p.set_defaults(func=cmd_montecarlo)

    p = subs.add_parser("estimate", help="subsample estimate from a snapshot or a fresh run")
    _add_common(p, pairs=True, formats=True)
    p.add_argument("--snapshot", default=None, help="snapshot file at time floor(n/k)")
    p.add_argument("--n", type=int, default=None, help="target n for a full-run estimate")
    p.add_argument("--k", action="append", type=float, default=None)
    p.set_defaults(func=cmd_estimate)

    p = subs.add_parser("constants", help="print regime and expectation constants")
    _add_common(p, formats=True)
    p.add_argument("--i", type=int, default=None)
    p.add_argument("--j", type=int, default=None)
    p.set_defaults(func=cmd_constants)

    p = subs.add_parser("verify", help="run a verification suite; nonzero exit on failure")
    _add_common(p)
    p.add_argument("--suite", choices=SUITES + ("all",), default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--statistical-warnings", action="store_true",
                   help="report statistical failures as warnings (exit 0)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError, SnapshotFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
