"""Utility functions for nodal-lab."""

import csv
import json
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def ensure_dir(path: Path) -> Path:
    """Ensure a directory exists, creating it if necessary."""
    path.mkdir(parents=True, exist_ok=True)
    return path


def derive_seed(master: int, index: int) -> int:
    """Seed of sample ``index``, split from ``master`` by counter.

    The value depends only on (master, index), never on scheduling.
    """
    seq = np.random.SeedSequence(master, spawn_key=(index,))
    return int(seq.generate_state(1)[0])


def parallel_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """Apply ``fn`` to every item, results in input order.

    Args:
        fn: Function of one item
        items: Inputs
        threads: Worker threads; 1 runs inline

    Returns:
        ``[fn(item) for item in items]``
    """
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def output_header(command: str, config_hash: str, config_json: str) -> str:
    """Comment lines that make a CSV file self-describing.

    Args:
        command: CLI command path, e.g. 'rwm stats'
        config_hash: SHA-256 of the canonical config
        config_json: Canonical config JSON (single line)

    Returns:
        Header text with trailing newline
    """
    return (
        f"# nodal-lab {command}\n"
        f"# config_hash: {config_hash}\n"
        f"# config: {config_json}\n"
    )


def format_cell(value: Any) -> str:
    """CSV text of one value: bools as true/false, floats round-trip exactly."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(
    path: Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    header: str = "",
) -> Path:
    """Write a UTF-8 CSV with '\\n' line endings and a mandatory header row."""
    ensure_dir(path.parent)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(header)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    return path


def write_json(path: Path, data: Any) -> Path:
    """Write a JSON summary with sorted keys, so reruns are byte-identical."""
    ensure_dir(path.parent)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def summary_path(csv_path: Path) -> Path:
    """The JSON summary written beside a CSV output."""
    return csv_path.with_suffix(".json")
