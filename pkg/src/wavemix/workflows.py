"""Run the four workflows and write their results to disk."""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .analysis import (
    absorption_spectrum,
    peak_efficiencies,
    synchrony_check,
    trace_interleaving,
    transparency_window,
)
from .config import RunConfig, config_to_dict
from .model import SystemParams
from .oracle import DriveSet, validate_perturbation
from .propagation import (
    build_coupling_matrix,
    closed_form_trace,
    default_step,
    default_z_max,
    integrate_rk4,
    launch_vector,
)

UNITS = "rates in units of γ13, distance in units of 1/κ12"
ALPHA_DEFINITION = "alpha = kappa12 * Re(Gamma31 / (2 lambda)), probe amplitude attenuation per unit z"

TRACE_COLUMNS = (
    "Z",
    "re_omega_p", "im_omega_p",
    "re_omega_t", "im_omega_t",
    "re_omega_f", "im_omega_f",
    "eta_t", "eta_f", "eta_total", "transmission",
)
SPECTRUM_COLUMNS = ("delta_p", "alpha")
VALIDATION_COLUMNS = (
    "omega_p", "coherence",
    "re_oracle", "im_oracle",
    "re_predicted", "im_predicted",
    "abs_error", "rel_error",
)
SWEEP_VALUE_COLUMNS = ("z_t", "eta_t_max", "z_f", "eta_f_max", "eta_total_max", "max_re_eigenvalue")


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)


@dataclass
class ResultBundle:
    metadata: dict
    payload: Table


def _trace_table(trace) -> Table:
    v = trace.fields
    cols = [trace.z]
    for k in range(3):
        cols += [v[:, k].real, v[:, k].imag]
    cols += [trace.eta_t, trace.eta_f, trace.eta_total, trace.transmission]
    rows = [tuple(float(x) for x in row) for row in np.column_stack(cols)]
    return Table(TRACE_COLUMNS, rows)


def run_propagate(config: RunConfig) -> tuple[Table, dict]:
    params, run = config.system, config.run
    matrix = build_coupling_matrix(params)
    z_max = run.z_max if run.z_max is not None else default_z_max(matrix)
    step = default_step(matrix, run.step)
    trace = integrate_rk4(matrix, launch_vector(params), z_max, step, run.stride)
    pk = peak_efficiencies(trace)
    summary = {
        "z_max": z_max,
        "step_cap": step,
        "peak": {
            "z_t": pk.z_t, "eta_t_max": pk.eta_t_max,
            "z_f": pk.z_f, "eta_f_max": pk.eta_f_max,
            "eta_total_max": pk.eta_total_max,
        },
        "alternating": trace_interleaving(trace).passed,
        "synchronous": synchrony_check(trace).passed,
        "operational_definitions": {
            "alternating": "one FWM maximum between consecutive TWM maxima; TWM maxima within "
                           "10% of the TWM peak spacing of FWM minima and vice versa",
            "synchronous": "every TWM maximum within 5% of the first-peak distance of a FWM maximum",
            "prominence": 1e-4,
        },
    }
    return _trace_table(trace), summary


def run_spectrum(config: RunConfig) -> tuple[Table, dict]:
    run = config.run
    spectrum = absorption_spectrum(config.system, np.linspace(run.start, run.stop, run.num))
    rows = [(float(d), float(a)) for d, a in zip(spectrum.delta_p, spectrum.alpha)]
    window = transparency_window(spectrum) if len(spectrum) >= 3 else None
    summary = {
        "alpha_definition": ALPHA_DEFINITION,
        "transparency_window": None if window is None else {
            "center": window.center, "width": window.width,
            "floor": window.floor, "peak_alpha": window.peak_alpha,
        },
    }
    return Table(SPECTRUM_COLUMNS, rows), summary


def _part(value, attr):
    return None if value is None else float(getattr(value, attr))


def run_validate(config: RunConfig) -> tuple[Table, dict]:
    params, run = config.system, config.run
    d = run.drives
    base = DriveSet(
        omega_p=params.probe_rabi0 if d.omega_p is None else d.omega_p,
        omega_c=params.omega_c if d.omega_c is None else d.omega_c,
        omega_d=params.omega_d if d.omega_d is None else d.omega_d,
        omega_f=d.omega_f,
        omega_t=d.omega_t,
        delta_p=params.delta_p if d.delta_p is None else d.delta_p,
    )
    rows = []
    for amplitude in run.ladder:
        report = validate_perturbation(params, replace(base, omega_p=amplitude), run.method)
        for r in report.rows:
            rows.append((
                float(amplitude), r.name,
                _part(r.oracle, "real"), _part(r.oracle, "imag"),
                _part(r.predicted, "real"), _part(r.predicted, "imag"),
                r.abs_error, r.rel_error,
            ))
    return Table(VALIDATION_COLUMNS, rows), {"comparison": "rho21 vs orders 1-3, rho31 vs orders 1-2; rho32 has no perturbative target"}


def sweep_point(params: SystemParams, z_max: float | None, points: int) -> tuple:
    """Peak efficiencies of one sweep point from the closed-form solution.

    The last entry is the largest real part among the eigenvalues of the
    coupling matrix; a positive value flags parametric gain, where the
    efficiencies grow without bound instead of oscillating.
    """
    matrix = build_coupling_matrix(params)
    if z_max is None:
        z_max = default_z_max(matrix)
    trace = closed_form_trace(matrix, launch_vector(params), np.linspace(0.0, z_max, points))
    pk = peak_efficiencies(trace)
    growth = float(matrix.eigenvalues().real.max())
    return (pk.z_t, pk.eta_t_max, pk.z_f, pk.eta_f_max, pk.eta_total_max, growth)


def _sweep_task(args):
    return sweep_point(*args)


def run_sweep(config: RunConfig) -> tuple[Table, dict]:
    run = config.run
    tasks = [
        (replace(config.system, **{run.parameter: value}), run.z_max, run.points)
        for value in run.values
    ]
    workers = run.workers if run.workers is not None else (os.cpu_count() or 1)
    workers = min(workers, len(tasks))
    if workers <= 1:
        results = [_sweep_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map keeps grid order regardless of completion order
            results = list(pool.map(_sweep_task, tasks))
    rows = [(float(value),) + tuple(float(x) for x in res) for value, res in zip(run.values, results)]
    summary = {"method": "closed-form matrix exponential on a uniform Z grid"}
    return Table((run.parameter,) + SWEEP_VALUE_COLUMNS, rows), summary


_RUNNERS = {
    "propagate": run_propagate,
    "spectrum": run_spectrum,
    "validate": run_validate,
    "sweep": run_sweep,
}


def run_workflow(config: RunConfig) -> ResultBundle:
    payload, summary = _RUNNERS[config.workflow](config)
    metadata = {
        "tool": "wavemix",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "workflow": config.workflow,
        "units": UNITS,
        "config": config_to_dict(config),
        "columns": list(payload.columns),
        "rows": len(payload.rows),
        "summary": summary,
    }
    return ResultBundle(metadata, payload)


class EmitError(OSError):
    pass


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


def emit(bundle: ResultBundle, path: str, fmt: str = "csv") -> list[str]:
    """Write the payload to ``path`` and the metadata to ``path + '.meta.json'``.

    CSV cells use 17 significant digits; JSON floats use the shortest
    round-tripping representation. Both are deterministic for a given payload.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    meta_path = path + ".meta.json"
    table = bundle.payload
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if fmt == "csv":
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(table.columns)
                for row in table.rows:
                    writer.writerow([_csv_cell(v) for v in row])
            else:
                doc = {
                    "columns": list(table.columns),
                    "rows": [[_json_value(v) for v in row] for row in table.rows],
                }
                json.dump(doc, fh, ensure_ascii=False)
                fh.write("\n")
        with open(meta_path, "w", encoding="utf-8") as fh:
            json.dump(bundle.metadata, fh, ensure_ascii=False, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise EmitError(f"cannot write {exc.filename or path}: {exc.strerror}") from exc
    return [path, meta_path]
