"""Run configuration: nested dataclasses loaded from YAML or JSON.

Unknown keys are rejected and every missing key takes its documented
default, so the resolved configuration can be written back as a complete
record of a run.
"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .assimilation import Method
from .obs_operator import BinomialSelectionSpec
from .shallow_water import SWConfig, Window
from .spd import CorrelationKernel, KernelKind
from .twin import DynamicChainConfig, NoiseModel, Placement, ReferenceConfig, TwinConfig, _meta


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScalarConfig:
    B_A: float = field(default=3.0, metadata=_meta("", "assumed background variance"))
    B_E: float = field(default=3.0, metadata=_meta("", "exact background variance"))
    R: float = field(default=1.0, metadata=_meta("", "observation variance"))
    H: float = field(default=1.0, metadata=_meta("", "scalar observation operator"))
    alpha: float = field(default=1.0, metadata=_meta("", "trace rescaling weight in [0, 1]"))
    iterations: int = field(default=10, metadata=_meta("", "number of iterations"))

    def __post_init__(self):
        if self.B_A <= 0 or self.B_E < 0 or self.R <= 0:
            raise ValueError("variances must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")


@dataclass(frozen=True)
class RunConfig:
    out: str = field(default="out", metadata=_meta("path", "output directory"))
    threads: int = field(default=1, metadata=_meta("", "worker threads for Monte-Carlo trials"))
    scalar: ScalarConfig = field(default_factory=ScalarConfig, metadata=_meta("", "scalar experiment"))
    twin: TwinConfig = field(default_factory=TwinConfig, metadata=_meta("", "static twin experiment"))
    chain: DynamicChainConfig = field(default_factory=DynamicChainConfig, metadata=_meta(
        "", "dynamic chain (uses twin for noise, kernels and operator)"))


# dataclasses printed as a single value in --help
_KERNEL_TYPES = (CorrelationKernel,)

# units of keys whose classes live outside the harness
_EXTERNAL_META = {
    (SWConfig, "nx"): _meta("cells", "grid size along x"),
    (SWConfig, "ny"): _meta("cells", "grid size along y"),
    (SWConfig, "dx"): _meta("mm", "cell width"),
    (SWConfig, "dy"): _meta("mm", "cell height"),
    (SWConfig, "dt"): _meta("s", "time step"),
    (SWConfig, "g"): _meta("scaled", "gravity"),
    (SWConfig, "b"): _meta("1/s", "linear damping"),
    (Window, "row0"): _meta("cell", "first row of the window"),
    (Window, "col0"): _meta("cell", "first column of the window"),
    (Window, "nrows"): _meta("cells", "window rows"),
    (Window, "ncols"): _meta("cells", "window columns"),
    (BinomialSelectionSpec, "state_dim"): _meta("", "operator columns"),
    (BinomialSelectionSpec, "obs_dim"): _meta("", "operator rows"),
    (BinomialSelectionSpec, "p"): _meta("", "selection probability per entry"),
    (BinomialSelectionSpec, "seed"): _meta("", "operator seed (pinned)"),
}


def _is_dataclass_type(tp):
    return isinstance(tp, type) and dataclasses.is_dataclass(tp)


def _strip_optional(tp):
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if len(args) == 1:
            return args[0], True
    return tp, False


def _convert(value, tp, path):
    tp, optional = _strip_optional(tp)
    if value is None:
        if optional:
            return None
        raise ConfigError(f"{path}: null is not allowed")
    if _is_dataclass_type(tp):
        if isinstance(value, tp):
            return value
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected a mapping")
        return from_mapping(tp, value, path)
    if isinstance(tp, type) and issubclass(tp, enum.Enum):
        try:
            return tp(value)
        except ValueError:
            choices = ", ".join(m.value for m in tp)
            raise ConfigError(f"{path}: {value!r} is not one of {choices}") from None
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string")
        return value
    if tp is tuple or typing.get_origin(tp) is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{path}: expected a list")
        return tuple(value)
    return value


def from_mapping(cls, data: dict, path: str = ""):
    """Build dataclass ``cls`` from a nested mapping, rejecting unknown keys."""
    hints = typing.get_type_hints(cls)
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        where = path or "top level"
        raise ConfigError(f"unknown key(s) at {where}: {', '.join(unknown)}")
    kwargs = {}
    for name, value in data.items():
        kwargs[name] = _convert(value, hints[name], f"{path}.{name}" if path else name)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path or cls.__name__}: {exc}") from exc


def to_mapping(obj):
    """Plain nested dict/list form of a config, suitable for YAML or JSON."""
    if dataclasses.is_dataclass(obj):
        return {f.name: to_mapping(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (tuple, list)):
        return [to_mapping(v) for v in obj]
    return obj


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    data = {}
    if path is not None:
        text = Path(path).read_text()
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    if overrides:
        data = _merge(data, overrides)
    return from_mapping(RunConfig, data)


def _merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def dump_config(cfg: RunConfig, path) -> Path:
    path = Path(path)
    path.write_text(yaml.safe_dump(to_mapping(cfg), sort_keys=False))
    return path


def config_hash(cfg: RunConfig) -> str:
    blob = json.dumps(to_mapping(cfg), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def describe(cls=RunConfig, prefix: str = ""):
    """Yield ``(key, default, unit, help)`` for every leaf key of ``cls``."""
    hints = typing.get_type_hints(cls)
    for f in dataclasses.fields(cls):
        key = f"{prefix}{f.name}"
        tp, _ = _strip_optional(hints[f.name])
        if f.default is not dataclasses.MISSING:
            default = f.default
        elif f.default_factory is not dataclasses.MISSING:
            default = f.default_factory()
        else:
            default = None
        if _is_dataclass_type(tp) and tp not in _KERNEL_TYPES:
            yield from describe(tp, key + ".")
            continue
        meta = f.metadata or _EXTERNAL_META.get((cls, f.name), {})
        yield key, to_mapping(default), meta.get("unit", ""), meta.get("help", "")


def help_epilog() -> str:
    lines = ["configuration keys (default, unit):"]
    for key, default, unit, text in describe():
        shown = json.dumps(default)
        unit = f" [{unit}]" if unit else ""
        lines.append(f"  {key} = {shown}{unit}  {text}")
    return "\n".join(lines)


__all__ = [
    "BinomialSelectionSpec",
    "ConfigError",
    "CorrelationKernel",
    "DynamicChainConfig",
    "KernelKind",
    "Method",
    "NoiseModel",
    "Placement",
    "ReferenceConfig",
    "RunConfig",
    "SWConfig",
    "ScalarConfig",
    "TwinConfig",
    "Window",
    "config_hash",
    "describe",
    "dump_config",
    "from_mapping",
    "help_epilog",
    "load_config",
    "to_mapping",
]
