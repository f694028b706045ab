"""Spectra, extrema and the oscillation/synchrony signatures of the efficiency curves."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import SingularParameterError, SystemParams, probe_absorption
from .propagation import PropagationTrace

DEFAULT_THRESHOLD = 1e-4
DEFAULT_SYNC_TOL = 0.05
DEFAULT_INTERLEAVE_TOL = 0.10


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Probe absorption ``alpha`` (units of kappa12) on a detuning grid."""

    delta_p: np.ndarray
    alpha: np.ndarray

    def __len__(self):
        return len(self.delta_p)


def default_grid() -> np.ndarray:
    return np.linspace(-6.0, 6.0, 1201)


def absorption_spectrum(params: SystemParams, delta_grid=None) -> Spectrum:
    grid = default_grid() if delta_grid is None else np.asarray(delta_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("delta grid must be a non-empty 1-D sequence")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("delta grid must be strictly increasing")
    alpha = np.empty_like(grid)
    for i, dp in enumerate(grid):
        try:
            alpha[i] = probe_absorption(params, float(dp))
        except SingularParameterError as exc:
            raise SingularParameterError(f"spectrum point delta_p={float(dp)!r}: {exc}") from exc
    return Spectrum(grid, alpha)


@dataclass(frozen=True)
class ExtremaReport:
    maxima: list[tuple[float, float]] = field(default_factory=list)
    minima: list[tuple[float, float]] = field(default_factory=list)
    threshold: float = DEFAULT_THRESHOLD

    @property
    def max_z(self) -> np.ndarray:
        return np.array([z for z, _ in self.maxima])

    @property
    def min_z(self) -> np.ndarray:
        return np.array([z for z, _ in self.minima])


def find_extrema(z, values, threshold: float = DEFAULT_THRESHOLD) -> ExtremaReport:
    """Interior local extrema separated by swings of at least ``threshold``.

    A running maximum is confirmed once the series has dropped by
    ``threshold`` below it, and a running minimum once the series has risen
    by ``threshold`` above it. Confirmed extrema therefore alternate, each
    one stands out from its neighbours by at least ``threshold`` on the
    confirming side, and the endpoints are never reported.
    """
    z = np.asarray(z, dtype=float)
    x = np.asarray(values, dtype=float)
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    report = ExtremaReport([], [], threshold)
    n = len(x)
    if n < 3:
        return report

    def swing(delta):
        return delta > 0 and delta >= threshold

    direction = 0  # +1 rising, -1 falling, 0 unknown
    i_hi = i_lo = 0
    for i in range(1, n):
        if direction >= 0 and x[i] > x[i_hi]:
            i_hi = i
        if direction <= 0 and x[i] < x[i_lo]:
            i_lo = i
        if direction == 0:
            if swing(x[i] - x[i_lo]):
                if i_lo > 0:
                    report.minima.append((float(z[i_lo]), float(x[i_lo])))
                direction, i_hi = 1, i
            elif swing(x[i_hi] - x[i]):
                if i_hi > 0:
                    report.maxima.append((float(z[i_hi]), float(x[i_hi])))
                direction, i_lo = -1, i
        elif direction > 0 and swing(x[i_hi] - x[i]):
            report.maxima.append((float(z[i_hi]), float(x[i_hi])))
            direction, i_lo = -1, i
        elif direction < 0 and swing(x[i] - x[i_lo]):
            report.minima.append((float(z[i_lo]), float(x[i_lo])))
            direction, i_hi = 1, i
    return report


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    diagnostics: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.passed


def _nearest(points: np.ndarray, z: float) -> float:
    return float(np.abs(points - z).min()) if points.size else np.inf


def interleaving_check(
    report_t: ExtremaReport,
    report_f: ExtremaReport,
    tolerance_z: float | None = None,
    grid_step: float = 0.0,
) -> CheckResult:
    """Anti-phase test: TWM peaks coincide with FWM troughs and vice versa.

    Passes when exactly one FWM maximum lies between each pair of consecutive
    TWM maxima, every TWM maximum sits within ``tolerance_z`` of a FWM
    minimum, and every FWM maximum inside the span of the TWM maxima sits
    within ``tolerance_z`` of a TWM minimum. The default tolerance is 10% of
    the median spacing of TWM maxima (never below ``grid_step``): the peaks
    of a decaying oscillation shift slightly ahead of the partner's troughs.
    """
    diag = []
    t_max, f_max = report_t.max_z, report_f.max_z
    t_min, f_min = report_t.min_z, report_f.min_z
    if t_max.size < 2:
        return CheckResult(False, [f"need >= 2 TWM maxima, found {t_max.size}"])
    if tolerance_z is None:
        tolerance_z = DEFAULT_INTERLEAVE_TOL * float(np.median(np.diff(t_max)))
    tolerance_z = max(tolerance_z, grid_step)

    for a, b in zip(t_max[:-1], t_max[1:]):
        count = int(np.count_nonzero((f_max > a) & (f_max < b)))
        if count != 1:
            diag.append(f"{count} FWM maxima between TWM maxima at Z={a:.6g} and Z={b:.6g}")
    for z in t_max:
        d = _nearest(f_min, z)
        if d > tolerance_z:
            diag.append(f"TWM maximum at Z={z:.6g} is {d:.3g} from nearest FWM minimum")
    for z in f_max[(f_max > t_max[0]) & (f_max < t_max[-1])]:
        d = _nearest(t_min, z)
        if d > tolerance_z:
            diag.append(f"FWM maximum at Z={z:.6g} is {d:.3g} from nearest TWM minimum")
    return CheckResult(not diag, diag)


def synchrony_check(
    trace: PropagationTrace,
    tolerance_z: float | None = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> CheckResult:
    """In-phase test: every TWM maximum has a FWM maximum within ``tolerance_z``.

    The default tolerance is 5% of the distance to the first TWM maximum.
    """
    rt = find_extrema(trace.z, trace.eta_t, threshold)
    rf = find_extrema(trace.z, trace.eta_f, threshold)
    t_max, f_max = rt.max_z, rf.max_z
    if t_max.size == 0:
        return CheckResult(False, ["no TWM maxima"])
    if tolerance_z is None:
        tolerance_z = DEFAULT_SYNC_TOL * float(t_max[0])
    diag = []
    for z in t_max:
        d = _nearest(f_max, z)
        if d > tolerance_z:
            diag.append(f"TWM maximum at Z={z:.6g} is {d:.3g} from nearest FWM maximum")
    return CheckResult(not diag, diag)


def trace_interleaving(
    trace: PropagationTrace,
    threshold: float = DEFAULT_THRESHOLD,
    tolerance_z: float | None = None,
) -> CheckResult:
    """:func:`interleaving_check` applied to the two efficiency curves of a trace."""
    rt = find_extrema(trace.z, trace.eta_t, threshold)
    rf = find_extrema(trace.z, trace.eta_f, threshold)
    step = float(np.diff(trace.z).max()) if len(trace) > 1 else 0.0
    return interleaving_check(rt, rf, tolerance_z, grid_step=step)


@dataclass(frozen=True)
class PeakEfficiencies:
    z_t: float
    eta_t_max: float
    z_f: float
    eta_f_max: float
    eta_total_max: float


def peak_efficiencies(trace: PropagationTrace) -> PeakEfficiencies:
    """Global maxima over the trace; ties resolve to the smallest Z."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    it = int(np.argmax(trace.eta_t))
    jf = int(np.argmax(trace.eta_f))
    return PeakEfficiencies(
        float(trace.z[it]),
        float(trace.eta_t[it]),
        float(trace.z[jf]),
        float(trace.eta_f[jf]),
        float(trace.eta_total.max()),
    )


@dataclass(frozen=True)
class TransparencyWindow:
    center: float
    width: float
    floor: float
    peak_alpha: float
    left_peak: tuple[float, float]
    right_peak: tuple[float, float]


def _crossing(x, y, i0, i1, level):
    """Linear-interpolated position where y crosses ``level`` walking from i0 to i1."""
    step = 1 if i1 > i0 else -1
    for i in range(i0, i1, step):
        j = i + step
        if (y[i] - level) * (y[j] - level) <= 0 and y[j] != y[i]:
            return x[i] + (level - y[i]) * (x[j] - x[i]) / (y[j] - y[i])
    return x[i1]


def transparency_window(spectrum: Spectrum) -> TransparencyWindow | None:
    """Locate the dip between the two dominant absorption peaks.

    Returns ``None`` when the spectrum has fewer than two interior maxima
    (a single absorption line has no window). ``width`` is the separation of
    the half-depth crossings, where half depth is measured from the floor up
    to the lower of the two flanking peaks.
    """
    x, y = spectrum.delta_p, spectrum.alpha
    n = len(y)
    peaks = [i for i in range(1, n - 1) if y[i] > y[i - 1] and y[i] >= y[i + 1]]
    if len(peaks) < 2:
        return None
    a, b = sorted(sorted(peaks, key=lambda i: y[i], reverse=True)[:2])
    if b - a < 2:
        return None
    c = a + int(np.argmin(y[a : b + 1]))
    if not (y[c] < y[a] and y[c] < y[b]):
        return None
    level = y[c] + 0.5 * (min(y[a], y[b]) - y[c])
    left = _crossing(x, y, c, a, level)
    right = _crossing(x, y, c, b, level)
    return TransparencyWindow(
        center=float(x[c]),
        width=float(right - left),
        floor=float(y[c]),
        peak_alpha=float(max(y[a], y[b])),
        left_peak=(float(x[a]), float(y[a])),
        right_peak=(float(x[b]), float(y[b])),
    )
