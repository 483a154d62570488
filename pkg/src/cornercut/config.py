"""Run configuration: JSON text validated against ``schema/config.schema.json``."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import jsonschema
import numpy as np

from .exceptions import ConfigError, CornerCutError
from .weights import DEFAULT_MARGIN, WeightSchedule, validate_weight_pair

DEFAULTS = {
    "levels": 5,
    "samples": 64,
    "bmsdd_samples": 32,
    "margin": DEFAULT_MARGIN,
    "tolerance": 1e-12,
    "corner_tolerance": 1e-9,
    "force": False,
    "closed": False,
    "resample": None,
}


def load_schema() -> dict:
    text = resources.files("cornercut").joinpath("schema/config.schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class RunConfig:
    mode: str
    levels: int
    samples: int
    bmsdd_samples: int
    margin: float
    tolerance: float
    corner_tolerance: float
    force: bool
    closed: bool
    resample: Optional[int]
    weights: Any = None
    weights_s: Any = None
    weights_t: Any = None
    points: Any = None
    points_file: Optional[str] = None
    params: Any = None
    net: dict = field(default_factory=dict)
    lipschitz: Optional[float] = None
    bmsdd: Optional[float] = None
    output: Optional[str] = None
    base_dir: Optional[str] = None

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    # -- resolved objects -------------------------------------------------

    def schedule(self, which: str = "weights") -> WeightSchedule:
        spec = getattr(self, which)
        if spec is None and which != "weights":
            spec = self.weights
        if spec is None:
            raise ConfigError(f"{which}: weight schedule missing")
        try:
            return build_schedule(spec, self.margin)
        except CornerCutError as exc:
            raise ConfigError(f"{which}: {exc}") from exc

    def resolve_path(self, p: str) -> Path:
        path = Path(p)
        if not path.is_absolute() and self.base_dir:
            path = Path(self.base_dir) / path
        return path

    def load_points(self) -> np.ndarray:
        if self.points is not None:
            return np.asarray(self.points, dtype=float)
        path = self.resolve_path(self.points_file)
        try:
            with open(path, newline="") as fh:
                rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
        except OSError as exc:
            raise ConfigError(f"points_file: {exc}") from exc
        try:
            return np.array([[float(x) for x in r] for r in rows], dtype=float)
        except ValueError as exc:
            raise ConfigError(f"points_file: {exc}") from exc


def build_schedule(spec, margin: float = DEFAULT_MARGIN) -> WeightSchedule:
    if spec == "chaikin":
        return WeightSchedule.constant_pair(validate_weight_pair([0.25], [0.75], margin))
    if "levels" in spec:
        return WeightSchedule(
            [validate_weight_pair(p["alpha"], p["beta"], margin) for p in spec["levels"]]
        )
    return WeightSchedule.constant_pair(validate_weight_pair(spec["alpha"], spec["beta"], margin))


def _path(error) -> str:
    parts = [str(p) for p in error.absolute_path]
    return "/" + "/".join(parts) if parts else "/"


def parse_config(text: str, mode: str | None = None, base_dir: str | None = None) -> RunConfig:
    """Parse and validate JSON configuration text.

    ``mode`` (from the CLI subcommand) takes precedence over the ``mode``
    field. Errors are reported as :class:`ConfigError` with JSON-pointer
    style paths to the offending field.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for err in errors:
            best = jsonschema.exceptions.best_match([err])
            if err.context:
                best = jsonschema.exceptions.best_match(err.context)
            lines.append(f"{_path(best)}: {best.message}")
        raise ConfigError("schema errors:\n  " + "\n  ".join(lines))

    mode = mode or data.get("mode")
    if mode is None:
        raise ConfigError("/mode: required (or use a subcommand)")
    merged = {**DEFAULTS, **data, "mode": mode}
    cfg = RunConfig(
        **{k: merged.get(k) for k in RunConfig.__dataclass_fields__ if k in merged},
        base_dir=base_dir,
    )
    _semantic_checks(cfg)
    return cfg


def _semantic_checks(cfg: RunConfig):
    has_w = cfg.weights is not None
    has_st = cfg.weights_s is not None and cfg.weights_t is not None
    if cfg.mode == "points":
        if cfg.points is None and cfg.points_file is None:
            raise ConfigError("/points: points mode needs 'points' or 'points_file'")
        if not has_w:
            raise ConfigError("/weights: required in points mode")
    elif cfg.mode == "net":
        if not cfg.net:
            raise ConfigError("/net: required in net mode")
        if "file" not in cfg.net and "function" not in cfg.net:
            raise ConfigError("/net: needs 'function' or 'file'")
        if "function" in cfg.net:
            for d in ("s", "t"):
                if f"{d}_window" not in cfg.net and f"{d}_knots" not in cfg.net:
                    raise ConfigError(f"/net/{d}_window: required with a built-in function")
        if not (has_w or has_st):
            raise ConfigError("/weights: net mode needs 'weights' or both 'weights_s' and 'weights_t'")
    elif cfg.mode == "certify":
        if not (has_w or has_st):
            raise ConfigError("/weights: certify mode needs a weight schedule")
    # weights must be admissible; surface the problem at parse time
    for which in ("weights", "weights_s", "weights_t"):
        if getattr(cfg, which) is not None:
            cfg.schedule(which)
