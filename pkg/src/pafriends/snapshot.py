"""Versioned text snapshots of a graph state.

Layout (line oriented, round-trip stable):

    pafriends-snapshot v1
    {json header: c, delta, n, rng state}
    <one line per arrival: its c endpoint ids, space separated>
    end <n>

The endpoint log is the whole multigraph, so degrees and adjacency are
rebuilt on restore; the rng state restores the exact stream position, so a
restored state evolves identically to the original.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import TextIO

import numpy as np

from .graph import GraphState, ModelParams, ParameterError, derive_rng, state_from_targets

MAGIC = "pafriends-snapshot"
VERSION = 1


class SnapshotFormatError(ValueError):
    """Raised for corrupted, truncated, or version-mismatched snapshot data."""


def _rng_state_to_json(state: dict) -> dict:
    if state["bit_generator"] != "Philox":
        raise SnapshotFormatError(f"unsupported bit generator {state['bit_generator']!r}")
    return {
        "bit_generator": "Philox",
        "counter": [int(x) for x in state["state"]["counter"]],
        "key": [int(x) for x in state["state"]["key"]],
        "buffer": [int(x) for x in state["buffer"]],
        "buffer_pos": int(state["buffer_pos"]),
        "has_uint32": int(state["has_uint32"]),
        "uinteger": int(state["uinteger"]),
    }


def _rng_state_from_json(data: dict) -> dict:
    try:
        return {
            "bit_generator": "Philox",
            "state": {
                "counter": np.array(data["counter"], dtype=np.uint64),
                "key": np.array(data["key"], dtype=np.uint64),
            },
            "buffer": np.array(data["buffer"], dtype=np.uint64),
            "buffer_pos": int(data["buffer_pos"]),
            "has_uint32": int(data["has_uint32"]),
            "uinteger": int(data["uinteger"]),
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotFormatError(f"malformed rng state: {exc}") from exc


def write_snapshot(state: GraphState, out: TextIO) -> None:
    header = {
        "c": state.params.c,
        "delta": state.params.delta,
        "n": state.n,
        "rng": _rng_state_to_json(state.rng.bit_generator.state),
    }
    out.write(f"{MAGIC} v{VERSION}\n")
    out.write(json.dumps(header, sort_keys=True) + "\n")
    log = state.targets_log
    for row in log:
        out.write(" ".join(str(int(t)) for t in row) + "\n")
    out.write(f"end {state.n}\n")


def save_snapshot(state: GraphState, path: str | Path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        write_snapshot(state, fh)


def read_snapshot(src: TextIO) -> GraphState:
    magic = src.readline().rstrip("\n")
    if not magic.startswith(MAGIC):
        raise SnapshotFormatError(f"not a snapshot file (leading line {magic!r})")
    if magic != f"{MAGIC} v{VERSION}":
        raise SnapshotFormatError(f"unsupported snapshot version {magic!r}")
    header_line = src.readline()
    if not header_line:
        raise SnapshotFormatError("truncated snapshot: missing header")
    try:
        header = json.loads(header_line)
        c = int(header["c"])
        delta = float(header["delta"])
        n = int(header["n"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise SnapshotFormatError(f"malformed snapshot header: {exc}") from exc
    try:
        params = ModelParams(c, delta)
    except ParameterError as exc:
        raise SnapshotFormatError(f"inadmissible parameters in snapshot: {exc}") from exc
    rows = []
    for _ in range(n - 1):
        line = src.readline()
        if not line:
            raise SnapshotFormatError(f"truncated snapshot: expected {n - 1} arrival lines, got {len(rows)}")
        try:
            row = [int(tok) for tok in line.split()]
        except ValueError as exc:
            raise SnapshotFormatError(f"malformed arrival line {line!r}") from exc
        rows.append(row)
    trailer = src.readline().rstrip("\n")
    if trailer != f"end {n}":
        raise SnapshotFormatError(f"missing or wrong trailer (got {trailer!r})")
    rng = derive_rng(0)
    rng.bit_generator.state = _rng_state_from_json(header["rng"])
    try:
        return state_from_targets(params, rows, rng=rng)
    except ParameterError as exc:
        raise SnapshotFormatError(f"inconsistent endpoint log: {exc}") from exc


def load_snapshot(path: str | Path) -> GraphState:
    with open(path, "r", encoding="ascii") as fh:
        return read_snapshot(fh)
