"""Run-configuration parsing and validation for the batch CLI.

Configs are YAML mappings. Parsing is fail-closed: unknown keys, keys a given
experiment does not use, type mismatches, and physics constraints that can be
checked without computing anything are all reported as ConfigError with the
key name and source line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

import yaml

from .core import MODES, ProtocolParams
from .errors import ConfigError, SizeGuardError
from .estimation import ESTIMATOR_AUTO, ESTIMATORS, THRESHOLD_KIND_MAIN, THRESHOLD_KINDS

EXPERIMENTS = ("cfi-sweep", "bmse-sweep", "oci", "cascaded", "threshold", "light")

FORMAT_CSV = "csv"
FORMAT_JSON = "json"
FORMATS = (FORMAT_CSV, FORMAT_JSON)

SWEEP_AXES = ("g", "tau", "T", "N", "delta_omega", "p_e")

_COMMON_KEYS = {
    "experiment", "g", "tau", "T", "N", "delta_omega", "mode", "p_e",
    "seed", "out", "format", "sweep",
}
_EXTRA_KEYS = {
    "cfi-sweep": {"omega", "samples"},
    "bmse-sweep": {"estimator", "reps"},
    "oci": set(),
    "cascaded": {"reps"},
    "threshold": {"epsilon", "kind"},
    "light": {"chi_tp", "omega"},
}
_REQUIRED_EXTRA = {
    "cfi-sweep": {"omega"},
    "bmse-sweep": set(),
    "oci": set(),
    "cascaded": set(),
    "threshold": {"epsilon"},
    "light": {"chi_tp", "omega"},
}

_DEFAULT_SAMPLES = 20000
_DEFAULT_REPS = 500
_ETA_LIMIT = 1.5


@dataclass(frozen=True)
class RunConfig:
    """One fully validated batch run: an experiment over one or more points."""

    experiment: str
    params: ProtocolParams
    seed: int
    out: str
    format: str = FORMAT_CSV
    sweep_axis: Optional[str] = None
    sweep_values: Optional[Tuple[float, ...]] = None
    omega: Optional[float] = None
    chi_tp: Optional[float] = None
    epsilon: Optional[float] = None
    kind: str = THRESHOLD_KIND_MAIN
    estimator: str = ESTIMATOR_AUTO
    reps: int = _DEFAULT_REPS
    samples: int = _DEFAULT_SAMPLES

    def points(self) -> List[ProtocolParams]:
        """Resolved parameter sets, one per sweep value (or the single point)."""
        if self.sweep_axis is None:
            return [self.params]
        out = []
        for value in self.sweep_values:
            if self.sweep_axis == "N":
                if value != int(value):
                    raise ValueError(f"sweep over N needs integer values, got {value}")
                value = int(value)
            out.append(replace(self.params, **{self.sweep_axis: value}))
        return out


def _line_map(text: str) -> Dict[str, int]:
    """Map dotted key paths to 1-based source lines, for error messages."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    lines: Dict[str, int] = {}

    def walk(node, prefix):
        if not isinstance(node, yaml.MappingNode):
            return
        for key_node, value_node in node.value:
            path = f"{prefix}{key_node.value}"
            lines[path] = key_node.start_mark.line + 1
            walk(value_node, path + ".")

    walk(root, "")
    return lines


def _type_name(value) -> str:
    return type(value).__name__


def _as_float(raw, key, lines) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(
            f"expected a number, got {_type_name(raw)}", key=key, line=lines.get(key)
        )
    return float(raw)


def _as_int(raw, key, lines) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ConfigError(
            f"expected an integer, got {_type_name(raw)}", key=key, line=lines.get(key)
        )
    return raw


def _as_str(raw, key, lines, choices=None) -> str:
    if not isinstance(raw, str):
        raise ConfigError(
            f"expected a string, got {_type_name(raw)}", key=key, line=lines.get(key)
        )
    if choices is not None and raw not in choices:
        raise ConfigError(
            f"must be one of {', '.join(choices)}; got {raw!r}", key=key, line=lines.get(key)
        )
    return raw


def _build_params(doc, lines) -> ProtocolParams:
    kwargs = {
        "g": _as_float(doc["g"], "g", lines),
        "tau": _as_float(doc["tau"], "tau", lines),
        "T": _as_float(doc["T"], "T", lines),
        "N": _as_int(doc["N"], "N", lines),
        "delta_omega": _as_float(doc["delta_omega"], "delta_omega", lines),
    }
    if "mode" in doc:
        kwargs["mode"] = _as_str(doc["mode"], "mode", lines, choices=MODES)
    if "p_e" in doc:
        kwargs["p_e"] = _as_float(doc["p_e"], "p_e", lines)
    try:
        return ProtocolParams(**kwargs)
    except ValueError as exc:
        key = "delta_omega" if "delta_omega*tau" in str(exc) else None
        raise ConfigError(str(exc), key=key, line=lines.get(key)) from exc


def _check_points(cfg: RunConfig, lines) -> None:
    """Validate every resolved sweep point before any compute starts."""
    axis_key = "sweep.values" if cfg.sweep_axis is not None else None
    try:
        points = cfg.points()
    except ValueError as exc:
        raise ConfigError(str(exc), key=axis_key, line=lines.get("sweep.values")) from exc

    for p in points:
        if cfg.experiment == "threshold":
            eta = p.g * p.g * p.T / p.tau
            if eta > _ETA_LIMIT:
                raise ConfigError(
                    f"threshold model is out of validity for g^2 T/tau = {eta:.3g} > {_ETA_LIMIT}",
                    key=axis_key or "g",
                    line=lines.get(axis_key or "g"),
                )
        if cfg.experiment == "oci" and p.N > 512:
            raise SizeGuardError(
                f"oci experiment solves dense (N+1)^2 linear algebra; N={p.N} exceeds 512"
            )
        if cfg.experiment in ("cfi-sweep", "bmse-sweep"):
            n_records = cfg.samples if cfg.experiment == "cfi-sweep" else cfg.reps
            qubits = 1 if cfg.experiment == "cfi-sweep" else p.N
            if 8 * n_records * qubits * max(p.m, 1) > 8 * 10**9:
                raise SizeGuardError(
                    f"run would allocate over 8 GB of outcome records at "
                    f"T={p.T}, N={p.N}; reduce reps/samples or the sweep range"
                )


def parse_config(text: str) -> RunConfig:
    """Parse and validate one YAML run configuration."""
    lines = _line_map(text)
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a YAML mapping of keys to values")

    if "experiment" not in doc:
        raise ConfigError("missing required key", key="experiment")
    experiment = _as_str(doc["experiment"], "experiment", lines, choices=EXPERIMENTS)

    allowed = _COMMON_KEYS | _EXTRA_KEYS[experiment]
    for key in doc:
        if not isinstance(key, str) or key not in allowed:
            known = key in _COMMON_KEYS or any(key in v for v in _EXTRA_KEYS.values())
            what = f"not used by experiment {experiment!r}" if known else "unknown key"
            raise ConfigError(what, key=str(key), line=lines.get(str(key)))

    required = {"g", "tau", "T", "N", "delta_omega", "seed", "out"} | _REQUIRED_EXTRA[experiment]
    for key in sorted(required):
        if key not in doc:
            raise ConfigError("missing required key", key=key)

    params = _build_params(doc, lines)

    seed = _as_int(doc["seed"], "seed", lines)
    if seed < 0:
        raise ConfigError("seed must be non-negative", key="seed", line=lines.get("seed"))
    out = _as_str(doc["out"], "out", lines)
    fmt = _as_str(doc.get("format", FORMAT_CSV), "format", lines, choices=FORMATS)

    sweep_axis = None
    sweep_values = None
    if "sweep" in doc:
        sweep = doc["sweep"]
        if not isinstance(sweep, dict):
            raise ConfigError(
                "sweep must be a mapping with axis and values", key="sweep", line=lines.get("sweep")
            )
        for key in sweep:
            if key not in ("axis", "values"):
                raise ConfigError("unknown key", key=f"sweep.{key}", line=lines.get(f"sweep.{key}"))
        if "axis" not in sweep or "values" not in sweep:
            raise ConfigError("sweep needs both axis and values", key="sweep", line=lines.get("sweep"))
        sweep_axis = _as_str(sweep["axis"], "sweep.axis", lines, choices=SWEEP_AXES)
        raw_values = sweep["values"]
        if not isinstance(raw_values, list) or not raw_values:
            raise ConfigError(
                "expected a non-empty list of numbers",
                key="sweep.values",
                line=lines.get("sweep.values"),
            )
        sweep_values = tuple(
            _as_float(v, "sweep.values", lines) for v in raw_values
        )

    kwargs = {}
    if experiment == "cfi-sweep":
        kwargs["omega"] = _as_float(doc["omega"], "omega", lines)
        if "samples" in doc:
            kwargs["samples"] = _as_int(doc["samples"], "samples", lines)
            if kwargs["samples"] < 100:
                raise ConfigError(
                    "samples must be at least 100", key="samples", line=lines.get("samples")
                )
    if experiment in ("bmse-sweep", "cascaded") and "reps" in doc:
        kwargs["reps"] = _as_int(doc["reps"], "reps", lines)
        if kwargs["reps"] < 100:
            raise ConfigError("reps must be at least 100", key="reps", line=lines.get("reps"))
    if experiment == "bmse-sweep" and "estimator" in doc:
        kwargs["estimator"] = _as_str(doc["estimator"], "estimator", lines, choices=ESTIMATORS)
    if experiment == "threshold":
        epsilon = _as_float(doc["epsilon"], "epsilon", lines)
        if not 0.0 < epsilon < 1.0:
            raise ConfigError(
                f"epsilon must lie in (0, 1), got {epsilon}", key="epsilon", line=lines.get("epsilon")
            )
        kwargs["epsilon"] = epsilon
        if "kind" in doc:
            kwargs["kind"] = _as_str(doc["kind"], "kind", lines, choices=THRESHOLD_KINDS)
    if experiment == "light":
        chi_tp = _as_float(doc["chi_tp"], "chi_tp", lines)
        if chi_tp < 0.0:
            raise ConfigError(
                "chi_tp must be non-negative", key="chi_tp", line=lines.get("chi_tp")
            )
        kwargs["chi_tp"] = chi_tp
        kwargs["omega"] = _as_float(doc["omega"], "omega", lines)

    cfg = RunConfig(
        experiment=experiment,
        params=params,
        seed=seed,
        out=out,
        format=fmt,
        sweep_axis=sweep_axis,
        sweep_values=sweep_values,
        **kwargs,
    )
    _check_points(cfg, lines)
    return cfg
