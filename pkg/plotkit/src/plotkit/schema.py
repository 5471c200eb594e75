"""Strict validation of the upstream CSV contracts.

The trajectory header must match the producer's column list exactly; any
missing, extra or reordered column is a hard error naming the column.
"""
from __future__ import annotations

import csv
from pathlib import Path

TRAJECTORY_COLUMNS = ["t", "l2_u", "h1semi_u", "lp_u_p", "l2_ut", "l2g1_ut",
                      "E", "H", "L", "identity_residual"]

# sweep files carry a variable block of swept-parameter columns between the
# index and the fixed summary block
SWEEP_FIXED_COLUMNS = ["E0", "h1semi0", "E0_lt_d", "grad0_gt_alpha1",
                       "termination", "mu_hat", "r_squared", "error"]


class SchemaError(ValueError):
    pass


def _read_rows(path) -> tuple[list[str], list[dict]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, header row required")
        return list(reader.fieldnames), list(reader)


def validate_trajectory(path) -> list[dict]:
    """Rows of a trajectory CSV with float-parsed cells; exact header match."""
    header, rows = _read_rows(path)
    for got, want in zip(header, TRAJECTORY_COLUMNS):
        if got != want:
            raise SchemaError(
                f"{path}: expected column {want!r}, found {got!r}")
    if len(header) > len(TRAJECTORY_COLUMNS):
        raise SchemaError(
            f"{path}: unexpected column {header[len(TRAJECTORY_COLUMNS)]!r}")
    if len(header) < len(TRAJECTORY_COLUMNS):
        raise SchemaError(
            f"{path}: missing column {TRAJECTORY_COLUMNS[len(header)]!r}")
    out = []
    for i, row in enumerate(rows):
        try:
            out.append({k: float(v) for k, v in row.items()})
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: row {i + 2} is not numeric: {exc}") from None
    return out


def validate_sweep(path) -> list[dict]:
    """Rows of a sweep summary CSV; index first, fixed summary block last."""
    header, rows = _read_rows(path)
    if not header or header[0] != "index":
        raise SchemaError(f"{path}: expected column 'index' first, found "
                          f"{header[0]!r}" if header else f"{path}: empty header")
    tail = header[-len(SWEEP_FIXED_COLUMNS):]
    for got, want in zip(tail, SWEEP_FIXED_COLUMNS):
        if got != want:
            raise SchemaError(f"{path}: expected column {want!r}, found {got!r}")
    if len(header) < 1 + len(SWEEP_FIXED_COLUMNS):
        raise SchemaError(f"{path}: missing column "
                          f"{SWEEP_FIXED_COLUMNS[len(header) - 1]!r}")
    return rows


def load_thresholds(path) -> dict:
    import json
    try:
        payload = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise SchemaError(f"thresholds file not found: {path}") from None
    for key in ("alpha1", "d"):
        if key not in payload:
            raise SchemaError(f"{path}: missing key {key!r}")
    return payload
