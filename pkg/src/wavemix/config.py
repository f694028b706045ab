"""JSON run configuration: strict parsing, defaults, and a lossless echo.

A configuration has three top-level blocks::

    {
      "system":   {... SystemParams fields ...},
      "<workflow>": {... workflow options ...},   # propagate | spectrum | validate | sweep
      "output":   {"path": "run.csv", "format": "csv"}
    }

Complex quantities (``omega_c``, ``omega_d``, ``probe_rabi0`` and the
validation drives) are given either as a plain number or as ``[re, im]``.
Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields as dc_fields

from .model import SystemParams

WORKFLOWS = ("propagate", "spectrum", "validate", "sweep")
FORMATS = ("csv", "json")
COMPLEX_SYSTEM_FIELDS = ("omega_c", "omega_d", "probe_rabi0")
REQUIRED_SYSTEM_FIELDS = ("omega_c", "omega_d", "delta_p")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class PropagateRun:
    z_max: float | None = None
    step: float | None = None
    stride: int | None = None


@dataclass(frozen=True)
class SpectrumRun:
    start: float = -6.0
    stop: float = 6.0
    num: int = 1201


@dataclass(frozen=True)
class Drives:
    """Validation drives; ``None`` means "take it from the system block"."""

    omega_p: complex | None = None
    omega_c: complex | None = None
    omega_d: complex | None = None
    omega_f: complex = 0j
    omega_t: complex = 0j
    delta_p: float | None = None


@dataclass(frozen=True)
class ValidateRun:
    drives: Drives = field(default_factory=Drives)
    ladder: tuple[float, ...] = (1e-3, 1e-4, 1e-5)
    method: str = "auto"


@dataclass(frozen=True)
class SweepRun:
    parameter: str = "omega_c"
    values: tuple[float, ...] = ()
    z_max: float | None = None
    points: int = 20001
    workers: int | None = None


@dataclass(frozen=True)
class OutputSpec:
    path: str | None = None
    format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    system: SystemParams
    workflow: str
    run: PropagateRun | SpectrumRun | ValidateRun | SweepRun
    output: OutputSpec = field(default_factory=OutputSpec)


_RUN_TYPES = {
    "propagate": PropagateRun,
    "spectrum": SpectrumRun,
    "validate": ValidateRun,
    "sweep": SweepRun,
}


def _number(value, path, *, integer=False, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return int(value)
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    return float(value)


def _complex(value, path, *, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, list):
        if len(value) != 2:
            raise ConfigError(path, "complex values are [re, im]")
        return complex(_number(value[0], path + "[0]"), _number(value[1], path + "[1]"))
    return complex(_number(value, path))


def _positive(value, path):
    if value is not None and not value > 0:
        raise ConfigError(path, f"must be > 0, got {value!r}")
    return value


def _check_keys(block, allowed, path):
    if not isinstance(block, dict):
        raise ConfigError(path, "expected an object")
    for key in block:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown key")


def _parse_system(block) -> SystemParams:
    names = [f.name for f in dc_fields(SystemParams)]
    _check_keys(block, names, "system")
    for name in REQUIRED_SYSTEM_FIELDS:
        if name not in block:
            raise ConfigError(f"system.{name}", "required")
    kwargs = {}
    for name, value in block.items():
        path = f"system.{name}"
        kwargs[name] = _complex(value, path) if name in COMPLEX_SYSTEM_FIELDS else _number(value, path)
    try:
        return SystemParams(**kwargs)
    except ValueError as exc:
        # SystemParams messages start with the field name
        name = str(exc).split()[0]
        raise ConfigError(f"system.{name}" if name in names else "system", str(exc)) from None


def _parse_propagate(block) -> PropagateRun:
    _check_keys(block, ("z_max", "step", "stride"), "propagate")
    z_max = _positive(_number(block.get("z_max"), "propagate.z_max", allow_none=True), "propagate.z_max")
    step = _positive(_number(block.get("step"), "propagate.step", allow_none=True), "propagate.step")
    stride = _number(block.get("stride"), "propagate.stride", integer=True, allow_none=True)
    _positive(stride, "propagate.stride")
    return PropagateRun(z_max, step, stride)


def _parse_spectrum(block) -> SpectrumRun:
    _check_keys(block, ("start", "stop", "num"), "spectrum")
    d = SpectrumRun()
    start = _number(block.get("start", d.start), "spectrum.start")
    stop = _number(block.get("stop", d.stop), "spectrum.stop")
    num = _number(block.get("num", d.num), "spectrum.num", integer=True)
    if num < 1:
        raise ConfigError("spectrum.num", "must be >= 1")
    if num > 1 and not stop > start:
        raise ConfigError("spectrum.stop", "must exceed spectrum.start")
    return SpectrumRun(start, stop, num)


def _parse_validate(block) -> ValidateRun:
    _check_keys(block, ("drives", "ladder", "method"), "validate")
    drives_block = block.get("drives", {})
    drive_names = [f.name for f in dc_fields(Drives)]
    _check_keys(drives_block, drive_names, "validate.drives")
    kw = {}
    for name, value in drives_block.items():
        path = f"validate.drives.{name}"
        kw[name] = _number(value, path) if name == "delta_p" else _complex(value, path)
    ladder = block.get("ladder", list(ValidateRun.ladder))
    if not isinstance(ladder, list) or not ladder:
        raise ConfigError("validate.ladder", "expected a non-empty list of probe amplitudes")
    ladder = tuple(_number(v, f"validate.ladder[{i}]") for i, v in enumerate(ladder))
    method = block.get("method", "auto")
    if method not in ("auto", "solve", "integrate"):
        raise ConfigError("validate.method", f"unknown method {method!r}")
    return ValidateRun(Drives(**kw), ladder, method)


def _parse_sweep(block) -> SweepRun:
    _check_keys(block, ("parameter", "values", "start", "stop", "num", "z_max", "points", "workers"), "sweep")
    parameter = block.get("parameter", "omega_c")
    sweepable = [f.name for f in dc_fields(SystemParams)]
    if parameter not in sweepable:
        raise ConfigError("sweep.parameter", f"not a system parameter: {parameter!r}")
    if "values" in block:
        if any(k in block for k in ("start", "stop", "num")):
            raise ConfigError("sweep.values", "give either values or start/stop/num")
        values = block["values"]
        if not isinstance(values, list) or not values:
            raise ConfigError("sweep.values", "expected a non-empty list")
        values = tuple(_number(v, f"sweep.values[{i}]") for i, v in enumerate(values))
    else:
        try:
            start, stop = block["start"], block["stop"]
        except KeyError as exc:
            raise ConfigError(f"sweep.{exc.args[0]}", "required without sweep.values") from None
        start = _number(start, "sweep.start")
        stop = _number(stop, "sweep.stop")
        num = _number(block.get("num", 20), "sweep.num", integer=True)
        if num < 1:
            raise ConfigError("sweep.num", "must be >= 1")
        values = tuple(start + (stop - start) * i / (num - 1) for i in range(num)) if num > 1 else (start,)
    z_max = _positive(_number(block.get("z_max"), "sweep.z_max", allow_none=True), "sweep.z_max")
    points = _number(block.get("points", SweepRun.points), "sweep.points", integer=True)
    if points < 3:
        raise ConfigError("sweep.points", "must be >= 3")
    workers = _number(block.get("workers"), "sweep.workers", integer=True, allow_none=True)
    _positive(workers, "sweep.workers")
    return SweepRun(parameter, values, z_max, points, workers)


def parse_config(text: str, workflow: str | None = None) -> RunConfig:
    """Parse and validate a JSON configuration document.

    ``workflow`` selects the workflow when the document has no workflow
    block (defaults are used); a block for any other workflow is an error.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON: {exc}") from None
    _check_keys(doc, ("system", "output") + WORKFLOWS, "")
    present = [w for w in WORKFLOWS if w in doc]
    if workflow is not None:
        if workflow not in WORKFLOWS:
            raise ConfigError("<workflow>", f"unknown workflow {workflow!r}")
        others = [w for w in present if w != workflow]
        if others:
            raise ConfigError(others[0], f"block does not match requested workflow {workflow!r}")
        selected = workflow
    else:
        if len(present) != 1:
            raise ConfigError("<document>", f"expected exactly one workflow block, found {present}")
        selected = present[0]

    if "system" not in doc:
        raise ConfigError("system", "required")
    system = _parse_system(doc["system"])
    parser = {
        "propagate": _parse_propagate,
        "spectrum": _parse_spectrum,
        "validate": _parse_validate,
        "sweep": _parse_sweep,
    }[selected]
    run = parser(doc.get(selected, {}))

    out = doc.get("output", {})
    _check_keys(out, ("path", "format"), "output")
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path", "expected a string")
    fmt = out.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigError("output.format", f"expected one of {FORMATS}, got {fmt!r}")
    return RunConfig(system, selected, run, OutputSpec(path, fmt))


def _encode(value):
    if isinstance(value, complex):
        return value.real if value.imag == 0 else [value.real, value.imag]
    if isinstance(value, tuple):
        return [_encode(v) for v in value]
    if isinstance(value, dict):
        return {k: _encode(v) for k, v in value.items() if v is not None}
    return value


def config_to_dict(config: RunConfig) -> dict:
    """JSON-ready echo of a configuration; ``parse_config`` of it reproduces ``config``."""
    return {
        "system": _encode(asdict(config.system)),
        config.workflow: _encode(asdict(config.run)),
        "output": _encode(asdict(config.output)),
    }
