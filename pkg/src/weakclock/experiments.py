"""Named experiments and their machine-readable record files.

Each experiment turns a RunConfig into one row per sweep point, and every
row carries the full resolved parameter set so records stay self-describing.
The comma-separated file is the canonical output; a JSON mirror holding the
same rows plus a metadata object is always written next to it. Both appear
under a ".partial" suffix until the run finishes, then are moved into place.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__
from .baselines import cascaded_bmse, oci_bound
from .collective_light import light_sensitivity
from .config import RunConfig
from .core import MODE_WEAK_ONLY, ProtocolParams
from .estimation import Prior, bmse_experiment, threshold_model
from .information import (
    KIND_FIT_WEAK_ONLY,
    KIND_FIT_WEAK_WITH_STRONG,
    KIND_QFI,
    analytic_information,
    cfi_monte_carlo,
)

PARAM_COLUMNS = ("g", "tau", "T", "N", "delta_omega", "p_e", "mode")

RESULT_COLUMNS = {
    "cfi-sweep": ("omega", "cfi", "stderr", "qfi", "fit"),
    "bmse-sweep": ("bmse", "stderr", "estimator", "fit", "threshold_bmse"),
    "oci": ("bmse_min", "prior_variance"),
    "cascaded": ("bmse", "stderr", "chosen_M", "degenerate"),
    "threshold": ("epsilon", "kind", "q", "predicted_bmse", "required_N_eta"),
    "light": ("omega", "chi_tp", "sensitivity", "quantum_limit"),
}

UNITS_NOTE = "seconds, rad/s"

# reference epsilon for the advisory threshold_bmse column of bmse-sweep rows
_REFERENCE_EPSILON = 0.1


@dataclass(frozen=True)
class RunArtifacts:
    """Paths and in-memory copy of one finished run."""

    csv_path: str
    json_path: str
    png_path: Optional[str]
    columns: Tuple[str, ...]
    rows: List[list]
    metadata: Dict[str, object]


def record_columns(experiment: str) -> Tuple[str, ...]:
    return PARAM_COLUMNS + RESULT_COLUMNS[experiment]


def record_paths(out: str) -> Tuple[str, str, str]:
    """Sibling csv/json/png paths for an output stem or file name."""
    stem = out
    for ext in (".csv", ".json"):
        if stem.endswith(ext):
            stem = stem[: -len(ext)]
            break
    return stem + ".csv", stem + ".json", stem + ".png"


def config_fingerprint(cfg: RunConfig) -> str:
    """Short hash of the resolved computation (everything but the out path)."""
    body = {
        "experiment": cfg.experiment,
        "params": asdict(cfg.params),
        "seed": cfg.seed,
        "sweep_axis": cfg.sweep_axis,
        "sweep_values": list(cfg.sweep_values) if cfg.sweep_values else None,
        "omega": cfg.omega,
        "chi_tp": cfg.chi_tp,
        "epsilon": cfg.epsilon,
        "kind": cfg.kind,
        "estimator": cfg.estimator,
        "reps": cfg.reps,
        "samples": cfg.samples,
    }
    canonical = json.dumps(body, sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _param_cells(p: ProtocolParams) -> list:
    return [p.g, p.tau, p.T, p.N, p.delta_omega, p.p_e, p.mode]


def _fit_kind(mode: str) -> str:
    return KIND_FIT_WEAK_ONLY if mode == MODE_WEAK_ONLY else KIND_FIT_WEAK_WITH_STRONG


def _row_cfi(cfg, p, seed, workers):
    est = cfi_monte_carlo(p, cfg.omega, cfg.samples, seed, workers=workers)
    qfi = analytic_information(KIND_QFI, p).value
    fit = analytic_information(_fit_kind(p.mode), p).value
    return _param_cells(p) + [cfg.omega, est.value, est.stderr, qfi, fit]


def _row_bmse(cfg, p, seed, workers):
    prior = Prior(0.0, p.delta_omega)
    res = bmse_experiment(p, prior, cfg.estimator, cfg.reps, seed, workers=workers)
    fit = analytic_information(_fit_kind(p.mode), p).value
    try:
        predicted = threshold_model(p, prior, _REFERENCE_EPSILON).predicted_bmse
    except ValueError:
        predicted = math.nan
    return _param_cells(p) + [res.bmse, res.stderr, res.estimator, fit, predicted]


def _row_oci(cfg, p, seed, workers):
    bound = oci_bound(p.N, p.T, p.delta_omega)
    return _param_cells(p) + [bound, p.delta_omega**2 / 12.0]


def _row_cascaded(cfg, p, seed, workers):
    prior = Prior(0.0, p.delta_omega)
    res = cascaded_bmse(p.N, p.T, prior, seed, n_rep=cfg.reps)
    return _param_cells(p) + [res.bmse, res.stderr, res.chosen_M, res.degenerate]


def _row_threshold(cfg, p, seed, workers):
    prior = Prior(0.0, p.delta_omega)
    model = threshold_model(p, prior, cfg.epsilon, kind=cfg.kind)
    return _param_cells(p) + [
        model.epsilon, cfg.kind, model.q, model.predicted_bmse, model.required_N_eta
    ]


def _row_light(cfg, p, seed, workers):
    sens = light_sensitivity(cfg.chi_tp, cfg.omega, p.tau, p.m, p.N)
    run_time = p.m * p.tau
    limit = 1.0 / (4.0 * p.N * run_time * run_time)
    return _param_cells(p) + [cfg.omega, cfg.chi_tp, sens, limit]


_ROW_BUILDERS = {
    "cfi-sweep": _row_cfi,
    "bmse-sweep": _row_bmse,
    "oci": _row_oci,
    "cascaded": _row_cascaded,
    "threshold": _row_threshold,
    "light": _row_light,
}


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _json_cell(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def execute_run(cfg: RunConfig, workers: Optional[int] = None, plot: bool = False) -> RunArtifacts:
    """Run every sweep point of a validated config and write the record files.

    Rows are appended to the .partial file as each point completes, in sweep
    order; point i draws all of its randomness from seed + i. An exception
    leaves the .partial files in place for inspection.
    """
    columns = record_columns(cfg.experiment)
    builder = _ROW_BUILDERS[cfg.experiment]
    metadata = {
        "version": __version__,
        "experiment": cfg.experiment,
        "config_hash": config_fingerprint(cfg),
        "seed": cfg.seed,
        "units": UNITS_NOTE,
    }
    csv_path, json_path, png_path = record_paths(cfg.out)

    rows: List[list] = []
    partial = csv_path + ".partial"
    with open(partial, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# weakclock {__version__}\n")
        fh.write(f"# experiment: {cfg.experiment}\n")
        fh.write(f"# config_hash: {metadata['config_hash']}\n")
        fh.write(f"# seed: {cfg.seed}\n")
        fh.write(f"# units: {UNITS_NOTE}\n")
        fh.write(",".join(columns) + "\n")
        for index, point in enumerate(cfg.points()):
            row = builder(cfg, point, cfg.seed + index, workers)
            rows.append(row)
            fh.write(",".join(_format_cell(v) for v in row) + "\n")
            fh.flush()
    os.replace(partial, csv_path)

    payload = {
        "metadata": metadata,
        "columns": list(columns),
        "rows": [[_json_cell(v) for v in row] for row in rows],
    }
    json_partial = json_path + ".partial"
    with open(json_partial, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    os.replace(json_partial, json_path)

    if plot:
        from .report import render_quicklook

        render_quicklook(cfg.experiment, columns, rows, png_path, sweep_axis=cfg.sweep_axis)

    return RunArtifacts(
        csv_path=csv_path,
        json_path=json_path,
        png_path=png_path if plot else None,
        columns=columns,
        rows=rows,
        metadata=metadata,
    )
