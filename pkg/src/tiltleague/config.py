"""TOML run configuration: parsing, validation, echo.

A config has two tables. ``[model]`` holds inline tables ``win``, ``mu`` and
``process``; ``[run]`` holds the experiment scalars. Every key is checked
against the schema and unknown keys fail with the nearest valid name, so a
typo can never silently fall back to a default. Randomness is governed by
the single ``seed`` key; commands that draw anything refuse to run without
it. ``emit_config`` writes an echo that re-parses to an equal RunConfig.
"""

from __future__ import annotations

import difflib
import math
from dataclasses import dataclass, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .match_model import (ConstantHalf, Ratio, TransformedRatio, WinFunction,
                          table_from_csv)
from .measures import (Empirical, Measure, UniformInterval, discrete,
                       discrete_renormalized, load_samples_csv)
from .processes import (TiltingProcess, iid_tilting, markov2, markov_tilting)


class ConfigError(ValueError):
    pass


RUN_KEYS = ("two_n", "s", "s_min", "s_max", "s_step", "replicas", "seed",
            "mode", "tol", "out", "threads")
MODEL_KEYS = ("win", "mu", "process")
WIN_KEYS = {
    "ratio": (),
    "const_half": (),
    "transformed_ratio": ("c1", "c2"),
    "table": ("path",),
}
MEASURE_KEYS = {
    "uniform": ("lo", "hi"),
    "discrete": ("values", "weights", "renormalize"),
    "empirical": ("path",),
}
PROCESS_KEYS = {
    "markov2": ("a", "b", "pa", "pb"),
    "markov": ("states", "transition"),
    "iid": ("marginal",),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; model pieces stay as canonical dicts.

    The dict form keeps RunConfig comparable (the round-trip invariant) and
    cheap to echo; ``build_win`` / ``build_mu`` / ``build_process`` construct
    the actual model objects on demand.
    """

    win: dict | None = None
    mu: dict | None = None
    process: dict | None = None
    two_n: int | None = None
    s: float | None = None
    s_min: float | None = None
    s_max: float | None = None
    s_step: float | None = None
    replicas: int | None = None
    seed: int | None = None
    mode: str = "focal"
    tol: float = 1e-8
    out: str | None = None
    threads: int = 1

    def build_win(self) -> WinFunction:
        return _build_win(self.require("win"))

    def build_mu(self) -> Measure:
        return _build_measure(self.require("mu"), "model.mu")

    def build_process(self) -> TiltingProcess:
        return _build_process(self.require("process"))

    def require(self, name: str):
        val = getattr(self, name)
        if val is None:
            raise ConfigError(f"missing required config key '{name}'")
        return val


def _reject_unknown(given: dict, valid: tuple[str, ...], where: str) -> None:
    for key in given:
        if key not in valid:
            near = difflib.get_close_matches(key, valid, n=1)
            hint = (f"nearest valid key: '{near[0]}'" if near
                    else f"valid keys: {', '.join(valid)}")
            raise ConfigError(f"unknown key '{key}' in {where}; {hint}")


def _spec_kind(spec: dict, table: dict[str, tuple[str, ...]],
               where: str) -> str:
    if not isinstance(spec, dict):
        raise ConfigError(f"{where} must be an inline table")
    kind = spec.get("kind")
    if kind not in table:
        near = difflib.get_close_matches(str(kind), list(table), n=1)
        hint = f"; nearest: '{near[0]}'" if near else ""
        raise ConfigError(
            f"{where}.kind must be one of {sorted(table)}, got {kind!r}{hint}")
    _reject_unknown({k: v for k, v in spec.items() if k != "kind"},
                    table[kind], where)
    return kind


def _build_win(spec: dict) -> WinFunction:
    kind = _spec_kind(spec, WIN_KEYS, "model.win")
    if kind == "ratio":
        return Ratio()
    if kind == "const_half":
        return ConstantHalf()
    if kind == "transformed_ratio":
        return TransformedRatio(float(spec.get("c1", 1.3)),
                                float(spec.get("c2", 0.999)))
    path = Path(spec["path"])
    if not path.exists():
        raise ConfigError(f"model.win.path does not exist: {path}")
    return table_from_csv(path)


def _build_measure(spec: dict, where: str) -> Measure:
    kind = _spec_kind(spec, MEASURE_KEYS, where)
    if kind == "uniform":
        return UniformInterval(float(spec["lo"]), float(spec["hi"]))
    if kind == "discrete":
        values = [float(v) for v in spec["values"]]
        weights = [float(w) for w in spec["weights"]]
        atoms = list(zip(values, weights))
        if spec.get("renormalize", False):
            return discrete_renormalized(atoms)
        return discrete(atoms)
    path = Path(spec["path"])
    if not path.exists():
        raise ConfigError(f"{where}.path does not exist: {path}")
    return Empirical(load_samples_csv(path))


def _build_process(spec: dict) -> TiltingProcess:
    kind = _spec_kind(spec, PROCESS_KEYS, "model.process")
    if kind == "markov2":
        return markov2(float(spec["a"]), float(spec["b"]),
                       float(spec["pa"]), float(spec["pb"]))
    if kind == "markov":
        return markov_tilting([float(v) for v in spec["states"]],
                              [[float(x) for x in row]
                               for row in spec["transition"]])
    return iid_tilting(_build_measure(spec["marginal"],
                                      "model.process.marginal"))


def _canonical_model(spec: dict, table: dict[str, tuple[str, ...]],
                     where: str) -> dict:
    """Normalize value types so emit -> parse is the identity."""
    kind = _spec_kind(spec, table, where)
    out: dict = {"kind": kind}
    for key in table[kind]:
        if key not in spec:
            continue
        val = spec[key]
        if key in ("values", "weights", "states"):
            out[key] = [float(v) for v in val]
        elif key == "transition":
            out[key] = [[float(x) for x in row] for row in val]
        elif key == "marginal":
            out[key] = _canonical_model(val, MEASURE_KEYS,
                                        where + ".marginal")
        elif key in ("path",):
            out[key] = str(val)
        elif key == "renormalize":
            out[key] = bool(val)
        else:
            out[key] = float(val)
    return out


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML config string."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    _reject_unknown(raw, ("model", "run"), "the top level")
    model = raw.get("model", {})
    run = raw.get("run", {})
    _reject_unknown(model, MODEL_KEYS, "[model]")
    _reject_unknown(run, RUN_KEYS, "[run]")

    kwargs: dict = {}
    if "win" in model:
        kwargs["win"] = _canonical_model(model["win"], WIN_KEYS, "model.win")
    if "mu" in model:
        kwargs["mu"] = _canonical_model(model["mu"], MEASURE_KEYS, "model.mu")
    if "process" in model:
        kwargs["process"] = _canonical_model(model["process"], PROCESS_KEYS,
                                             "model.process")

    ints = {"two_n", "replicas", "seed", "threads"}
    floats = {"s", "s_min", "s_max", "s_step", "tol"}
    for key, val in run.items():
        if key in ints:
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"run.{key} must be an integer, got {val!r}")
            kwargs[key] = val
        elif key in floats:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"run.{key} must be a number, got {val!r}")
            kwargs[key] = float(val)
        else:
            if not isinstance(val, str):
                raise ConfigError(f"run.{key} must be a string, got {val!r}")
            kwargs[key] = val

    cfg = RunConfig(**kwargs)
    _validate(cfg)
    return cfg


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text)


def _validate(cfg: RunConfig) -> None:
    if cfg.two_n is not None and (cfg.two_n < 2 or cfg.two_n % 2 != 0):
        raise ConfigError(f"run.two_n must be even and >= 2, got {cfg.two_n}")
    if cfg.replicas is not None and cfg.replicas < 1:
        raise ConfigError(f"run.replicas must be >= 1, got {cfg.replicas}")
    if not cfg.tol > 0:
        raise ConfigError(f"run.tol must be > 0, got {cfg.tol}")
    if cfg.threads < 1:
        raise ConfigError(f"run.threads must be >= 1, got {cfg.threads}")
    if cfg.mode not in ("focal", "full"):
        raise ConfigError(f"run.mode must be 'focal' or 'full', got {cfg.mode!r}")
    for key in ("s", "s_min", "s_max", "s_step"):
        val = getattr(cfg, key)
        if val is not None and (not math.isfinite(val) or val < 0):
            raise ConfigError(f"run.{key} must be finite and >= 0, got {val}")
    # Build model pieces eagerly so bad specs fail at load time.
    if cfg.win is not None:
        cfg.build_win()
    if cfg.mu is not None:
        cfg.build_mu()
    if cfg.process is not None:
        cfg.build_process()


def override(cfg: RunConfig, **flags) -> RunConfig:
    """Apply non-None command-line overrides on top of a config."""
    valid = {f.name for f in fields(RunConfig)}
    updates = {}
    for key, val in flags.items():
        if key not in valid:
            raise ConfigError(f"no such config field: {key}")
        if val is not None:
            updates[key] = val
    if not updates:
        return cfg
    merged = {f.name: getattr(cfg, f.name) for f in fields(RunConfig)}
    merged.update(updates)
    out = RunConfig(**merged)
    _validate(out)
    return out


def _toml_value(val) -> str:
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, (int, float)):
        return repr(val)
    if isinstance(val, str):
        return '"' + val.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(val, list):
        return "[" + ", ".join(_toml_value(v) for v in val) + "]"
    if isinstance(val, dict):
        inner = ", ".join(f"{k} = {_toml_value(v)}" for k, v in val.items())
        return "{" + inner + "}"
    raise ConfigError(f"cannot serialize {val!r}")


def emit_config(cfg: RunConfig) -> str:
    """Echo a config as TOML; ``parse_config(emit_config(c)) == c``."""
    lines = []
    model_items = [(k, getattr(cfg, k)) for k in MODEL_KEYS
                   if getattr(cfg, k) is not None]
    if model_items:
        lines.append("[model]")
        for key, val in model_items:
            lines.append(f"{key} = {_toml_value(val)}")
        lines.append("")
    lines.append("[run]")
    for key in RUN_KEYS:
        val = getattr(cfg, key)
        if val is not None:
            lines.append(f"{key} = {_toml_value(val)}")
    return "\n".join(lines) + "\n"
