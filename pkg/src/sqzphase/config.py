"""Run configuration: TOML schema, validation and the ``# meta:`` round trip.

Schema (every table optional except the state)::

    [state]                 # exactly one of these two pairs
    r = 0.37
    r_prime = 0.0
    # squeezing_db = 3.21
    # antisqueezing_db = 3.41

    # or, for purity scans, several states:
    # [[states]]
    # squeezing_db = 3.21
    # antisqueezing_db = 3.41

    [run]
    theta = 0.4             # or thetas = [...]; default: 12 cell centres
    n_samples = 1000        # or a list (posterior curves)
    repetitions = 20
    seed = 0
    grid_points = 2048

    [out]
    path = "results.csv"

Precedence is flag > file > default, applied key by key; a state given on
the command line replaces the file's state as a whole.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field, replace
from typing import Any, Optional

from .bayes import DEFAULT_GRID_POINTS, MIN_GRID_POINTS
from .errors import ConfigError, InvalidState
from .state import SqueezedThermalState, from_db

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

META_PREFIX = "# meta:"
HALF_PI = 0.5 * math.pi

DEFAULTS = {"n_samples": (1000,), "repetitions": 20, "seed": 0, "grid_points": DEFAULT_GRID_POINTS}

_R_PAIR = ("r", "r_prime")
_DB_PAIR = ("squeezing_db", "antisqueezing_db")
_RUN_KEYS = {"theta", "thetas", "n_samples", "repetitions", "seed", "grid_points"}


@dataclass(frozen=True)
class StateSpec:
    """A state as the user wrote it, either as ``(r, r_prime)`` or as a dB pair."""

    r: Optional[float] = None
    r_prime: Optional[float] = None
    squeezing_db: Optional[float] = None
    antisqueezing_db: Optional[float] = None

    def to_state(self) -> SqueezedThermalState:
        if self.squeezing_db is not None:
            return from_db(self.squeezing_db, self.antisqueezing_db)
        return SqueezedThermalState(self.r, self.r_prime)

    def to_mapping(self) -> dict:
        keys = _DB_PAIR if self.squeezing_db is not None else _R_PAIR
        return {k: getattr(self, k) for k in keys}


@dataclass(frozen=True)
class ExperimentConfig:
    states: tuple[StateSpec, ...]
    thetas: Optional[tuple[float, ...]] = None
    n_samples: tuple[int, ...] = DEFAULTS["n_samples"]
    repetitions: int = DEFAULTS["repetitions"]
    seed: int = DEFAULTS["seed"]
    grid_points: int = DEFAULTS["grid_points"]
    out_path: Optional[str] = field(default=None, compare=True)

    @property
    def state(self) -> SqueezedThermalState:
        if len(self.states) != 1:
            raise ConfigError([f"state: exactly one state required, got {len(self.states)}"])
        return self.states[0].to_state()

    @property
    def n(self) -> int:
        if len(self.n_samples) != 1:
            raise ConfigError([f"run.n_samples: a single value required here, got {list(self.n_samples)}"])
        return self.n_samples[0]

    def to_mapping(self, include_out: bool = True) -> dict:
        """Plain-data form that :func:`config_from_mapping` reads back unchanged."""
        run: dict[str, Any] = {
            "n_samples": list(self.n_samples),
            "repetitions": self.repetitions,
            "seed": self.seed,
            "grid_points": self.grid_points,
        }
        if self.thetas is not None:
            run["thetas"] = list(self.thetas)
        out: dict[str, Any] = {"run": run}
        if len(self.states) == 1:
            out["state"] = self.states[0].to_mapping()
        else:
            out["states"] = [s.to_mapping() for s in self.states]
        if include_out and self.out_path is not None:
            out["out"] = {"path": self.out_path}
        return out

    def without_output(self) -> "ExperimentConfig":
        return replace(self, out_path=None)


def meta_line(config: ExperimentConfig, command: str, version: str) -> str:
    """Provenance header; excludes the output path so outputs compare byte-for-byte."""
    payload = {"command": command, "version": version, "config": config.to_mapping(include_out=False)}
    return f"{META_PREFIX} {json.dumps(payload, sort_keys=True, separators=(',', ':'))}"


def parse_config(text: str) -> ExperimentConfig:
    """Parse TOML config text, or a ``# meta:`` line taken from an output file."""
    return config_from_mapping(load_mapping(text))


def load_mapping(text: str) -> dict:
    stripped = text.lstrip()
    if stripped.startswith(META_PREFIX):
        first = stripped.splitlines()[0]
        try:
            return json.loads(first[len(META_PREFIX):])["config"]
        except (ValueError, KeyError) as exc:
            raise ConfigError([f"meta: unreadable header ({exc})"]) from None
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"syntax: {exc}"]) from None


def _number(errors, key, value, *, integer=False, minimum=None):
    ok_type = isinstance(value, int) if integer else isinstance(value, (int, float))
    if isinstance(value, bool) or not ok_type:
        errors.append(f"{key}: expected {'an integer' if integer else 'a number'}, got {value!r}")
        return None
    if not integer and not math.isfinite(value):
        errors.append(f"{key}: must be finite, got {value!r}")
        return None
    if minimum is not None and value < minimum:
        errors.append(f"{key}: must be >= {minimum}, got {value!r}")
        return None
    return int(value) if integer else float(value)


def _state_spec(errors, where: str, table) -> Optional[StateSpec]:
    if not isinstance(table, dict):
        errors.append(f"{where}: expected a table, got {table!r}")
        return None
    unknown = sorted(set(table) - set(_R_PAIR) - set(_DB_PAIR))
    if unknown:
        errors.append(f"{where}: unknown keys {unknown}")
    has_r = any(k in table for k in _R_PAIR)
    has_db = any(k in table for k in _DB_PAIR)
    if has_r and has_db:
        present = [f"{where}.{k}" for k in _R_PAIR + _DB_PAIR if k in table]
        errors.append(f"{where}: both state forms given ({', '.join(present)}); use r/r_prime or squeezing_db/antisqueezing_db, not both")
        return None
    if not has_r and not has_db:
        errors.append(f"{where}: missing state; give r and r_prime, or squeezing_db and antisqueezing_db")
        return None
    pair = _R_PAIR if has_r else _DB_PAIR
    values = {}
    for k in pair:
        if k not in table:
            errors.append(f"{where}.{k}: missing required key")
        else:
            values[k] = _number(errors, f"{where}.{k}", table[k], minimum=0)
    if len(values) != 2 or None in values.values():
        return None
    spec = StateSpec(**values)
    try:
        spec.to_state()
    except InvalidState as exc:
        errors.append(f"{where}: {exc}")
        return None
    return spec


def config_from_mapping(data: dict) -> ExperimentConfig:
    """Validate a parsed mapping, reporting every problem at once."""
    errors: list[str] = []
    unknown = sorted(set(data) - {"state", "states", "run", "out"})
    if unknown:
        errors.append(f"config: unknown tables {unknown}")

    states: list[StateSpec] = []
    if "state" in data and "states" in data:
        errors.append("state: give either [state] or [[states]], not both")
    elif "state" in data:
        spec = _state_spec(errors, "state", data["state"])
        states = [spec] if spec else []
    elif "states" in data:
        raw = data["states"]
        if not isinstance(raw, list) or not raw:
            errors.append("states: expected a non-empty array of tables")
        else:
            for i, table in enumerate(raw):
                spec = _state_spec(errors, f"states[{i}]", table)
                if spec:
                    states.append(spec)
    else:
        errors.append("state: missing required table [state] (or [[states]])")

    run = data.get("run", {})
    if not isinstance(run, dict):
        errors.append("run: expected a table")
        run = {}
    bad_run = sorted(set(run) - _RUN_KEYS)
    if bad_run:
        errors.append(f"run: unknown keys {bad_run}")

    thetas: Optional[tuple[float, ...]] = None
    if "theta" in run and "thetas" in run:
        errors.append("run: give run.theta or run.thetas, not both")
    elif "theta" in run or "thetas" in run:
        key = "run.theta" if "theta" in run else "run.thetas"
        raw = run.get("theta", run.get("thetas"))
        raw = raw if isinstance(raw, list) else [raw]
        if not raw:
            errors.append(f"{key}: theta list is empty")
        parsed = []
        for v in raw:
            t = _number(errors, key, v)
            if t is None:
                continue
            if not 0.0 <= t <= HALF_PI:
                errors.append(f"{key}: {t!r} outside [0, pi/2]")
            parsed.append(t)
        thetas = tuple(parsed)

    n_raw = run.get("n_samples", list(DEFAULTS["n_samples"]))
    n_raw = n_raw if isinstance(n_raw, list) else [n_raw]
    if not n_raw:
        errors.append("run.n_samples: empty list")
    n_samples = tuple(
        v for v in (_number(errors, "run.n_samples", x, integer=True, minimum=1) for x in n_raw) if v is not None
    )
    repetitions = _number(errors, "run.repetitions", run.get("repetitions", DEFAULTS["repetitions"]), integer=True, minimum=1)
    seed = _number(errors, "run.seed", run.get("seed", DEFAULTS["seed"]), integer=True, minimum=0)
    if seed is not None and seed >= 1 << 64:
        errors.append(f"run.seed: must be < 2**64, got {seed}")
    grid_points = _number(
        errors, "run.grid_points", run.get("grid_points", DEFAULTS["grid_points"]), integer=True, minimum=MIN_GRID_POINTS
    )

    out = data.get("out", {})
    out_path = None
    if not isinstance(out, dict) or set(out) - {"path"}:
        errors.append("out: expected a table with the single key 'path'")
    elif "path" in out:
        if not isinstance(out["path"], str):
            errors.append(f"out.path: expected a string, got {out['path']!r}")
        else:
            out_path = out["path"]

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        states=tuple(states),
        thetas=thetas,
        n_samples=n_samples,
        repetitions=repetitions,
        seed=seed,
        grid_points=grid_points,
        out_path=out_path,
    )


def apply_overrides(data: dict, *, state: Optional[dict] = None, run: Optional[dict] = None, out_path=None) -> dict:
    """Overlay command-line values on a file mapping (flag beats file)."""
    merged = {k: (dict(v) if isinstance(v, dict) else v) for k, v in data.items()}
    if state:
        merged.pop("states", None)
        merged["state"] = dict(state)
    if run:
        section = merged.setdefault("run", {})
        if not isinstance(section, dict):
            section = merged["run"] = {}
        for key, value in run.items():
            if key in ("theta", "thetas"):
                section.pop("theta", None)
                section.pop("thetas", None)
            section[key] = value
    if out_path is not None:
        merged["out"] = {"path": out_path}
    return merged
