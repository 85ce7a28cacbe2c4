"""CSV, manifest and config-file formats.

Reals are written with 17 significant digits so files round-trip exactly.
Only the manifest carries timestamps and wall-clock times; every CSV payload
is a pure function of the run configuration.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
from pathlib import Path

import numpy as np

from . import __version__

DENSE_JSON_LIMIT = 64


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return Path(path)


def write_convergence_csv(path, result, metric: str = "both"):
    cols = ["n_paths"]
    if metric in ("paper-w", "both"):
        cols.append("paper_w")
    if metric in ("w1", "both"):
        cols.append("w1")
    cols += ["converged", "lambda_max"]
    rows = ([getattr(s, c) for c in cols] for s in result.snapshots)
    return _write_rows(path, cols, rows)


def write_bands_csv(path, result, metric: str = "both"):
    metrics = ["paper-w", "w1"] if metric == "both" else [metric]
    n_axis = result.bands[metrics[0]]["n_paths"]
    header = ["n_paths"]
    for m in metrics:
        key = m.replace("-", "_")
        header += [f"{key}_mean", f"{key}_std"]
    rows = []
    for i, n in enumerate(n_axis):
        row = [n]
        for m in metrics:
            row += [result.bands[m]["mean"][i], result.bands[m]["std"][i]]
        rows.append(row)
    return _write_rows(path, header, rows)


def write_terminal_csv(path, result):
    grid = result.config.grid
    classic = result.distributions["classic"].probs
    eigen = result.distributions["eigen"]
    eigen = np.full(grid.n_states, np.nan) if eigen is None else eigen.probs
    rows = ((i, grid.values[i], classic[i], eigen[i]) for i in range(grid.n_states))
    return _write_rows(path, ["state_index", "state_value", "prob_classic", "prob_eigen"], rows)


def write_variance_csv(path, result):
    grid = result.config.grid
    ve = result.variance["eigen"].per_state_variance
    vc = result.variance["classic"].per_state_variance
    rows = ((grid.values[i], ve[i], vc[i]) for i in range(grid.n_states))
    return _write_rows(path, ["state_value", "var_eigen", "var_classic"], rows)


def write_matrix_csv(path, matrix, grid, state_map=None):
    """Sparse listing ``row_state_value, col_state_value, entry`` of the nonzero entries."""
    m = np.asarray(matrix)
    state_map = np.arange(m.shape[0]) if state_map is None else np.asarray(state_map)
    values = grid.values[state_map]
    rows = ((values[i], values[j], m[i, j]) for i, j in zip(*np.nonzero(m)))
    return _write_rows(path, ["row_state_value", "col_state_value", "entry"], rows)


def write_paths_csv(path, ensemble):
    n, width = ensemble.values.shape
    rows = ((k, t, ensemble.values[k, t]) for k in range(n) for t in range(width))
    return _write_rows(path, ["path_id", "t", "value"], rows)


def write_sweep_csv(path, cells):
    keys = sorted({k for c in cells for k in c.params})
    header = keys + ["status", "final_paper_w", "final_w1", "price_classic", "price_eigen",
                     "var_total_eigen", "var_total_classic", "n_nonconverged", "reason"]
    rows = []
    for c in cells:
        row = [c.params.get(k, "") for k in keys]
        r = c.result
        if r is None:
            rows.append(row + ["skipped"] + ["nan"] * 6 + ["", c.skipped])
            continue
        if r.curves:
            pw, w = r.curves["paper-w"].distance[-1], r.curves["w1"].distance[-1]
        else:
            pw = w = float("nan")
        ve = r.variance["eigen"].total_variance if r.variance else float("nan")
        vc = r.variance["classic"].total_variance if r.variance else float("nan")
        rows.append(row + ["ok", pw, w, r.prices["classic"], r.prices["eigen"], ve, vc, len(r.nonconverged), ""])
    return _write_rows(path, header, rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def result_manifest(result) -> dict:
    """Manifest body for one experiment, without run-level metadata."""
    cfg = result.config
    reps = result.settings.get("replications", 1)
    body = {
        "config": cfg.to_dict(),
        "settings": result.settings,
        "seeds": {
            "master_seed": cfg.master_seed,
            "replication_master_seeds": [cfg.master_seed + r for r in range(reps)],
            "path_seed_rule": "splitmix64(splitmix64(master_seed) ^ path_index); "
                              "draw t = mix64(seed + t * 0x9E3779B97F4A7C15)",
        },
        "distance_convention": {
            "paper_w": "sqrt(mean over states of (p - q)^2), divisor n_states",
            "w1": "increment * sum over states of |CDF_p - CDF_q|",
        },
        "solver_reports": [r.to_dict() for r in result.solver_reports],
        "converged": result.converged,
        "nonconverged": result.nonconverged,
        "max_residual": result.max_residual,
        "prices": result.prices,
        "runtimes_seconds": result.runtimes,
    }
    if result.variance:
        body["variance"] = {
            "total_eigen": result.variance["eigen"].total_variance,
            "total_classic": result.variance["classic"].total_variance,
            "ratio_eigen_over_classic": result.variance_ratio(),
            "n_replications_eigen": result.variance["eigen"].n_replications,
            "n_replications_classic": result.variance["classic"].n_replications,
        }
    if result.curves:
        body["final_distance"] = {m: float(c.distance[-1]) for m, c in result.curves.items()}
    if result.counts is not None and cfg.grid.n_states <= DENSE_JSON_LIMIT:
        body["transition_counts"] = result.counts.counts
        body["transition_matrix"] = {
            "probs": result.matrix.probs,
            "state_values": cfg.grid.values[result.matrix.state_map],
            "repair": result.matrix.repair,
        }
    return body


def write_manifest(path, body: dict, command: str | None = None):
    doc = {
        "artifact": "eigenmc",
        "version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    if command is not None:
        doc["command"] = command
    doc.update(body)
    with open(path, "w") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=False)
        fh.write("\n")
    return Path(path)


def read_config_file(path) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment.

    Keys are CLI flag names without the leading dashes, dashes or
    underscores alike (``grid-states = 41``).  A bare key means ``true``.
    """
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, value = (s.strip() for s in line.split("=", 1))
        else:
            key, value = line, "true"
        if not key:
            raise ValueError(f"{path}:{lineno}: missing key")
        out[key.replace("_", "-").lstrip("-")] = value
    return out
