"""CSV export and import of ensembles, policies and result tables.

Floats are written with repr (shortest round-trip form); an infinite
denoising factor is written as the token "inf". NaN is never written.
"""

import csv
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from src.domain.ensemble import FadingEnsemble, fixed_ensemble
from src.domain.errors import InvalidArgumentError
from src.domain.system import PowerPolicy


def format_value(value: Any) -> str:
    """Deterministic text form of a CSV cell."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            raise InvalidArgumentError("NaN cannot be written to CSV")
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return "" if value is None else str(value)


def write_table(path: Path, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
    """Write rows (dicts keyed by column name) under a header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(column)) for column in columns])
    return path


def read_table(path: Path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


def ensemble_columns(K: int) -> list[str]:
    columns = ["state_index", "weight"]
    for k in range(1, K + 1):
        columns += [f"re_h_{k}", f"im_h_{k}"]
    return columns


def write_ensemble_csv(path: Path, ens: FadingEnsemble) -> Path:
    """Export an ensemble as (state_index, weight, re_h_1, im_h_1, ...)."""
    rows = []
    for index, (weight, gains) in enumerate(zip(ens.weights, ens.gains)):
        row = {"state_index": index, "weight": float(weight)}
        for k, h in enumerate(gains, start=1):
            row[f"re_h_{k}"] = float(h.real)
            row[f"im_h_{k}"] = float(h.imag)
        rows.append(row)
    return write_table(path, ensemble_columns(ens.K), rows)


def read_ensemble_csv(path: Path) -> FadingEnsemble:
    """Import an ensemble written by write_ensemble_csv.

    Raises:
        InvalidArgumentError: If the header or a value is malformed
    """
    rows = read_table(path)
    if not rows:
        raise InvalidArgumentError(f"{path} contains no states")
    K = sum(1 for name in rows[0] if name.startswith("re_h_"))
    if K == 0 or list(rows[0].keys()) != ensemble_columns(K):
        raise InvalidArgumentError(f"{path} does not have the ensemble column layout")
    try:
        states = [[complex(float(r[f"re_h_{k}"]), float(r[f"im_h_{k}"])) for k in range(1, K + 1)] for r in rows]
        weights = [float(r["weight"]) for r in rows]
    except ValueError as e:
        raise InvalidArgumentError(f"malformed value in {path}: {e}") from e
    return fixed_ensemble(states, weights)


def write_policy_csv(
    path: Path, ens: FadingEnsemble, policy: PowerPolicy, summary: Mapping[str, Any]
) -> Path:
    """Export a per-state policy preceded by a summary block.

    Layout: summary names row, summary values row, blank row, then the table
    (state_index, weight, eta, p_1..p_K).
    """
    if policy.num_states != ens.num_states:
        raise InvalidArgumentError("policy and ensemble state counts differ")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = ["state_index", "weight", "eta"] + [f"p_{k}" for k in range(1, policy.K + 1)]
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(list(summary.keys()))
        writer.writerow([format_value(v) for v in summary.values()])
        writer.writerow([])
        writer.writerow(columns)
        for index in range(policy.num_states):
            writer.writerow(
                [format_value(index), format_value(float(ens.weights[index])), format_value(float(policy.denoise[index]))]
                + [format_value(float(p)) for p in policy.powers[index]]
            )
    return path


def read_policy_csv(path: Path) -> tuple[dict[str, str], PowerPolicy]:
    """Read back a policy CSV; returns (summary, policy)."""
    with Path(path).open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if len(rows) < 4 or rows[2]:
        raise InvalidArgumentError(f"{path} does not have the policy layout")
    summary = dict(zip(rows[0], rows[1]))
    table = rows[4:]
    denoise = np.array([float(r[2]) for r in table])
    powers = np.array([[float(x) for x in r[3:]] for r in table])
    return summary, PowerPolicy(powers, denoise)
