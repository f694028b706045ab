"""Coupled propagation of probe, TWM and FWM amplitudes.

The slowly-varying-amplitude equations are linear with constant
coefficients once the control and driving fields are taken as undepleted,
so they reduce to ``dv/dZ = M v`` with ``v = (omega_p, omega_t, omega_f)``.
Two independent solvers are provided: fixed-step RK4 and the exact matrix
exponential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .model import FieldVector, SystemParams, derive_rates, SingularParameterError
from .rk4 import linear_step_matrix

#: RK4 step is capped at ``STEP_FACTOR / rho(M)``
STEP_FACTOR = 0.01
#: eigenvector condition number above which the closed form switches to expm
COND_LIMIT = 1e8
MAX_SAMPLES = 100_000

P, T, F = 0, 1, 2


@dataclass(frozen=True)
class IntegrationDiagnostics:
    z_reached: float
    spectral_radius: float
    step: float


class NumericalDivergenceError(RuntimeError):
    def __init__(self, message, diagnostics: IntegrationDiagnostics | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Constant coupling matrix, in units of 1/Z, with the params it came from."""

    m: np.ndarray
    params: SystemParams = field(default_factory=SystemParams)

    @property
    def row_sum_bound(self) -> float:
        """Max absolute row sum, an upper bound on the spectral radius."""
        return float(np.abs(self.m).sum(axis=1).max())

    @property
    def spectral_radius(self) -> float:
        return float(np.abs(np.linalg.eigvals(self.m)).max())

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.m)


def build_coupling_matrix(params: SystemParams) -> CouplingMatrix:
    """Factor the propagation equations into ``dv/dZ = M v``.

    Each row carries a linear self-absorption term plus the TWM/FWM
    conversion terms. Z is normalized by ``kappa12`` so the FWM and probe
    rows carry unit coupling and the TWM row carries ``kappa13/kappa12``.
    """
    r = derive_rates(params)
    if r.lam == 0:
        raise SingularParameterError("lambda vanishes; coupling matrix undefined")
    if r.Gamma21 == 0:
        raise SingularParameterError("Gamma21 vanishes; coupling matrix undefined")
    k12 = 1.0
    k13 = params.kappa13 / params.kappa12
    oc, od = params.omega_c, params.omega_d
    lam, G21, G31 = r.lam, r.Gamma21, r.Gamma31

    m = np.empty((3, 3), dtype=complex)
    m[P, P] = -k12 * G31 / (2 * lam)
    m[P, T] = -1j * k12 * oc.conjugate() / (4 * lam)
    m[P, F] = k12 * od * oc.conjugate() / (8 * G21 * lam)

    m[T, P] = -1j * k13 * oc / (4 * lam)
    m[T, T] = -k13 * G21 / (2 * lam)
    m[T, F] = -1j * k13 * od / (4 * lam)

    m[F, P] = k12 * oc * od.conjugate() / (8 * G21 * lam)
    m[F, T] = -1j * k12 * od.conjugate() / (4 * lam)
    m[F, F] = -k12 * G31 / (2 * lam)
    return CouplingMatrix(m, params)


def default_step(matrix: CouplingMatrix, step: float | None = None) -> float:
    bound = matrix.row_sum_bound
    cap = STEP_FACTOR / bound if bound > 0 else math.inf
    if step is None:
        return cap if math.isfinite(cap) else 1.0
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step!r}")
    return min(step, cap)


def default_z_max(matrix: CouplingMatrix, periods: float = 4.0) -> float:
    """Distance covering ``periods`` of the fastest eigenmode beat.

    Efficiency oscillations come from beating between eigenmodes, so the
    largest spread of eigenvalue imaginary parts sets the period. Without
    any beat, fall back to a few decay lengths of the slowest mode.
    """
    w = matrix.eigenvalues()
    spread = float(np.ptp(w.imag))
    if spread > 1e-12 * max(1.0, float(np.abs(w).max())):
        return periods * 2 * math.pi / spread
    decay = float(np.abs(w.real).min()) if w.size else 0.0
    return 5.0 / decay if decay > 0 else 1.0


def efficiencies(params: SystemParams, fields: FieldVector) -> tuple[float, float, float, float]:
    """Return ``(eta_t, eta_f, eta_total, transmission)`` for one field vector.

    Efficiencies are photon-number ratios against the launched probe; the
    TWM channel carries the dipole and frequency corrections.
    """
    p0 = params.probe_rabi0
    eta_t = abs(params.mu_ratio * fields.omega_t / p0) ** 2 / params.freq_ratio
    eta_f = abs(fields.omega_f / p0) ** 2
    transmission = abs(fields.omega_p / p0) ** 2
    return eta_t, eta_f, eta_t + eta_f, transmission


@dataclass(frozen=True, eq=False)
class PropagationTrace:
    """Fields and efficiencies sampled along Z (arrays share the first axis)."""

    z: np.ndarray
    fields: np.ndarray  # (n, 3) complex, columns omega_p, omega_t, omega_f
    eta_t: np.ndarray
    eta_f: np.ndarray
    eta_total: np.ndarray
    transmission: np.ndarray

    def __len__(self):
        return len(self.z)

    def field_vector(self, i: int) -> FieldVector:
        return FieldVector.from_array(self.fields[i])

    @classmethod
    def from_fields(cls, params: SystemParams, z, v) -> PropagationTrace:
        z = np.asarray(z, dtype=float)
        v = np.asarray(v, dtype=complex).reshape(len(z), 3)
        p0 = params.probe_rabi0
        eta_t = np.abs(params.mu_ratio * v[:, T] / p0) ** 2 / params.freq_ratio
        eta_f = np.abs(v[:, F] / p0) ** 2
        transmission = np.abs(v[:, P] / p0) ** 2
        return cls(z, v, eta_t, eta_f, eta_t + eta_f, transmission)


def _initial_array(initial) -> np.ndarray:
    if isinstance(initial, FieldVector):
        return initial.as_array()
    v0 = np.asarray(initial, dtype=complex)
    if v0.shape != (3,) or not np.all(np.isfinite(v0)):
        raise ValueError("initial field vector must be 3 finite complex numbers")
    return v0


def integrate_rk4(
    matrix: CouplingMatrix,
    initial,
    z_max: float,
    step: float,
    stride: int | None = None,
    max_samples: int = MAX_SAMPLES,
) -> PropagationTrace:
    """Integrate ``dv/dZ = M v`` from Z = 0 to ``z_max`` with classical RK4.

    The step actually used is ``z_max / n`` with ``n = ceil(z_max / step)``,
    so the last sample lands exactly on ``z_max``. Every ``stride``-th step is
    recorded (plus the final one); by default every step is recorded until
    the trace would exceed ``max_samples``, after which it is decimated.

    Raises
    ------
    NumericalDivergenceError
        If the state becomes non-finite. ``err.diagnostics`` records the
        distance reached, the spectral radius of M and the step.
    """
    if not z_max > 0:
        raise ValueError(f"z_max must be > 0, got {z_max!r}")
    if not step > 0:
        raise ValueError(f"step must be > 0, got {step!r}")
    v = _initial_array(initial)
    n = max(1, math.ceil(z_max / step - 1e-9))
    h = z_max / n
    if stride is None:
        # leave room for Z = 0 and the forced final sample
        stride = 1 if n + 1 <= max_samples else math.ceil(n / (max_samples - 2))
    if stride < 1:
        raise ValueError("stride must be >= 1")

    step_matrix = linear_step_matrix(matrix.m, h)
    zs = [0.0]
    vs = [v]
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, n + 1):
            v = step_matrix @ v
            if k % stride == 0 or k == n:
                if not np.all(np.isfinite(v)):
                    diag = IntegrationDiagnostics(k * h, matrix.spectral_radius, h)
                    raise NumericalDivergenceError(
                        f"non-finite field at Z={k * h:g} (step {h:g}, "
                        f"spectral radius {diag.spectral_radius:g})",
                        diag,
                    )
                zs.append(k * h if k < n else z_max)
                vs.append(v)
    return PropagationTrace.from_fields(matrix.params, zs, np.array(vs))


class _Exponential:
    """Evaluates ``exp(M z) v0`` for many z, via eigendecomposition when safe."""

    def __init__(self, m: np.ndarray, v0: np.ndarray):
        self.m = m
        self.v0 = v0
        w, vecs = np.linalg.eig(m)
        self.cond = np.linalg.cond(vecs)
        self.use_eig = bool(np.isfinite(self.cond) and self.cond <= COND_LIMIT)
        if self.use_eig:
            self.w = w
            self.vecs = vecs
            self.coef = np.linalg.solve(vecs, v0)

    def __call__(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        with np.errstate(over="ignore", invalid="ignore"):
            out = self._evaluate(z)
        if not np.all(np.isfinite(out)):
            raise NumericalDivergenceError("matrix exponential overflowed")
        return out

    def _evaluate(self, z):
        if self.use_eig:
            out = (np.exp(np.outer(z, self.w)) * self.coef) @ self.vecs.T
        else:
            out = np.array([scipy.linalg.expm(self.m * zi) @ self.v0 for zi in z])
        return out


def propagate_closed_form(matrix: CouplingMatrix, initial, z: float) -> FieldVector:
    """Exact solution ``exp(M z) v0``.

    Uses the eigendecomposition of M unless its eigenvector matrix has a
    condition number above ``COND_LIMIT``, in which case scaling-and-squaring
    (``scipy.linalg.expm``) is used.
    """
    if z < 0:
        raise ValueError(f"z must be >= 0, got {z!r}")
    v0 = _initial_array(initial)
    return FieldVector.from_array(_Exponential(matrix.m, v0)(z)[0])


def closed_form_trace(matrix: CouplingMatrix, initial, z_grid) -> PropagationTrace:
    """Closed-form fields and efficiencies on an arbitrary grid of distances."""
    z_grid = np.asarray(z_grid, dtype=float)
    if np.any(z_grid < 0):
        raise ValueError("z_grid must be non-negative")
    v0 = _initial_array(initial)
    return PropagationTrace.from_fields(matrix.params, z_grid, _Exponential(matrix.m, v0)(z_grid))


def launch_vector(params: SystemParams) -> FieldVector:
    """Probe at its launch amplitude, no generated signals."""
    return FieldVector(params.probe_rabi0, 0j, 0j)


def propagate(
    params: SystemParams,
    z_max: float | None = None,
    step: float | None = None,
    stride: int | None = None,
) -> PropagationTrace:
    """RK4 propagation from the launch condition with default step and range."""
    matrix = build_coupling_matrix(params)
    if z_max is None:
        z_max = default_z_max(matrix)
    return integrate_rk4(matrix, launch_vector(params), z_max, default_step(matrix, step), stride)


def max_relative_deviation(a: PropagationTrace, b: PropagationTrace) -> float:
    """Largest ``|v_a - v_b| / |v_b|`` (vector 2-norms) over matching samples."""
    num = np.linalg.norm(a.fields - b.fields, axis=1)
    den = np.linalg.norm(b.fields, axis=1)
    mask = den > 0
    if np.any(num[~mask] > 0):
        return math.inf
    return float((num[mask] / den[mask]).max()) if mask.any() else 0.0
