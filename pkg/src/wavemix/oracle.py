"""Full Lindblad master-equation solution of the driven three-level system.

This module does not use any of the perturbative formulas; it serves as an
independent reference for them. Density matrices are indexed by levels
|1>, |2>, |3> -> 0, 1, 2, so ``rho[1, 0]`` is rho21. Superoperators act on
the row-major vectorization ``rho.ravel()``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import FieldVector, SystemParams, coherences, derive_rates
from .rk4 import linear_step_matrix

#: convergence target on max |d rho / dt| for the integration route
RESIDUAL_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = -1e-10


class NoUniqueSteadyStateError(RuntimeError):
    pass


def sigma(i: int, j: int) -> np.ndarray:
    """Transition operator |i><j| with 1-based level labels."""
    s = np.zeros((3, 3), dtype=complex)
    s[i - 1, j - 1] = 1.0
    return s


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (3, 3):
            raise ValueError("density matrix must be 3x3")
        if np.abs(rho - rho.conj().T).max() > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > TRACE_TOL:
            raise ValueError(f"trace is {np.trace(rho)!r}, expected 1")
        if np.linalg.eigvalsh(rho).min() < POSITIVITY_TOL:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "rho", rho)

    def __getitem__(self, idx):
        return self.rho[idx]

    @classmethod
    def ground(cls) -> DensityMatrix:
        return cls(sigma(1, 1))


@dataclass(frozen=True)
class DriveSet:
    """Every coherent drive appearing in the interaction-picture Hamiltonian."""

    omega_p: complex = 0j
    omega_c: complex = 0j
    omega_d: complex = 0j
    omega_f: complex = 0j
    omega_t: complex = 0j
    delta_p: float = 0.0

    def __post_init__(self):
        for name in ("omega_p", "omega_c", "omega_d", "omega_f", "omega_t"):
            value = complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if not math.isfinite(self.delta_p):
            raise ValueError("delta_p must be finite")
        object.__setattr__(self, "delta_p", float(self.delta_p))

    @classmethod
    def from_params(cls, params: SystemParams, fields: FieldVector) -> DriveSet:
        return cls(
            omega_p=fields.omega_p,
            omega_c=params.omega_c,
            omega_d=params.omega_d,
            omega_f=fields.omega_f,
            omega_t=fields.omega_t,
            delta_p=params.delta_p,
        )

    @property
    def fields(self) -> FieldVector:
        return FieldVector(self.omega_p, self.omega_t, self.omega_f)


def hamiltonian_interaction(drives: DriveSet) -> np.ndarray:
    """Interaction-picture Hamiltonian (hbar = 1) in the rotating frame."""
    d = drives
    coupling = (
        (d.omega_p + d.omega_f) * sigma(2, 1)
        + (d.omega_c + d.omega_d) * sigma(3, 2)
        + d.omega_t * sigma(3, 1)
    )
    h = d.delta_p * (sigma(2, 2) + sigma(3, 3)) - 0.5 * (coupling + coupling.conj().T)
    return h


def _dissipators(params: SystemParams):
    """``(rate, jump operator)`` pairs: dephasing on |2>,|3>, then downward decays."""
    return [
        (params.gamma_phi2, sigma(2, 2)),
        (params.gamma_phi3, sigma(3, 3)),
        (params.gamma12, sigma(1, 2)),
        (params.gamma13, sigma(1, 3)),
        (params.gamma23, sigma(2, 3)),
    ]


def lindblad_rhs(params: SystemParams, drives: DriveSet, rho) -> np.ndarray:
    """Right-hand side ``d rho / dt`` of the master equation.

    ``rho`` may be any 3x3 array; it is not required to be a valid state.
    """
    rho = rho.rho if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    h = hamiltonian_interaction(drives)
    out = -1j * (h @ rho - rho @ h)
    for rate, c in _dissipators(params):
        if rate == 0:
            continue
        cd = c.conj().T
        n = cd @ c
        out += 0.5 * rate * (2 * c @ rho @ cd - n @ rho - rho @ n)
    return out


def liouvillian(params: SystemParams, drives: DriveSet) -> np.ndarray:
    """9x9 generator with ``vec(d rho/dt) = L @ vec(rho)``, row-major vec."""
    eye = np.eye(3)
    h = hamiltonian_interaction(drives)
    lv = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for rate, c in _dissipators(params):
        if rate == 0:
            continue
        n = c.conj().T @ c
        lv += 0.5 * rate * (2 * np.kron(c, c.conj()) - np.kron(n, eye) - np.kron(eye, n.T))
    return lv


def coherence_equations(params: SystemParams, drives: DriveSet, rho) -> tuple[complex, complex, complex]:
    """Closed-form time derivatives of rho21, rho31, rho32 written with the tau rates.

    Independent transcription used to cross-check :func:`lindblad_rhs`.
    """
    r = np.asarray(rho.rho if isinstance(rho, DensityMatrix) else rho, dtype=complex)
    rates = derive_rates(params, drives.delta_p)
    d = drives
    probe = d.omega_p + d.omega_f
    pump = d.omega_c + d.omega_d
    dp = d.delta_p
    r11, r22, r33 = r[0, 0], r[1, 1], r[2, 2]
    r21, r31, r32 = r[1, 0], r[2, 0], r[2, 1]
    r12, r23 = r[0, 1], r[1, 2]

    d21 = (
        0.5j * probe * (r11 - r22)
        + 0.5j * pump.conjugate() * r31
        - 0.5j * d.omega_t * r23
        - (rates.tau21 + 1j * dp) * r21
    )
    d31 = (
        0.5j * d.omega_t * (r11 - r33)
        + 0.5j * pump * r21
        - 0.5j * probe * r32
        - (rates.tau31 + 1j * dp) * r31
    )
    d32 = (
        0.5j * pump * (r22 - r33)
        - 0.5j * probe.conjugate() * r31
        + 0.5j * d.omega_t * r12
        - rates.tau32 * r32
    )
    return d21, d31, d32


def _check_unique(lv: np.ndarray):
    sv = np.linalg.svd(lv, compute_uv=False)
    scale = max(sv[0], 1.0)
    if np.count_nonzero(sv < 1e-12 * scale) > 1:
        raise NoUniqueSteadyStateError(
            "Liouvillian has a degenerate null space; the steady state is not unique "
            "(is any dissipation rate nonzero?)"
        )


def _solve_linear(lv: np.ndarray) -> np.ndarray:
    a = lv.copy()
    b = np.zeros(9, dtype=complex)
    # The population rows (vec indices 0, 4, 8) sum to zero, so one of them is
    # redundant; the largest one is swapped for the trace condition.
    pop_rows = [0, 4, 8]
    k = max(pop_rows, key=lambda i: np.linalg.norm(a[i]))
    a[k] = np.eye(3).ravel()
    b[k] = 1.0
    return np.linalg.solve(a, b).reshape(3, 3)


def _solve_integrate(lv: np.ndarray, rho0: np.ndarray, t_max: float = 1e9) -> np.ndarray:
    """Long-time RK4 evolution until ``max |L rho| < RESIDUAL_TOL``."""
    norm = np.abs(lv).sum(axis=1).max()
    h = 0.5 / norm
    # 256 RK4 steps per residual check
    block = np.linalg.matrix_power(linear_step_matrix(lv, h), 256)
    v = rho0.ravel().astype(complex)
    t = 0.0
    while np.abs(lv @ v).max() >= RESIDUAL_TOL:
        v = block @ v
        t += 256 * h
        if t > t_max or not np.all(np.isfinite(v)):
            raise NoUniqueSteadyStateError(f"no convergence to a steady state by t={t:g}")
    return v.reshape(3, 3)


def steady_state(params: SystemParams, drives: DriveSet, method: str = "auto") -> DensityMatrix:
    """Steady state of the master equation.

    ``method`` is ``"solve"`` (null vector of the Liouvillian with a trace
    row), ``"integrate"`` (RK4 from the ground state until the residual drops
    below ``RESIDUAL_TOL``) or ``"auto"`` (solve, falling back to integration
    when the linear system is singular).
    """
    lv = liouvillian(params, drives)
    _check_unique(lv)
    if method == "solve":
        rho = _solve_linear(lv)
    elif method == "integrate":
        rho = _solve_integrate(lv, sigma(1, 1))
    elif method == "auto":
        try:
            rho = _solve_linear(lv)
            if not np.all(np.isfinite(rho)):
                raise np.linalg.LinAlgError("non-finite solution")
        except np.linalg.LinAlgError:
            rho = _solve_integrate(lv, sigma(1, 1))
    else:
        raise ValueError(f"unknown method {method!r}")
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real)


@dataclass(frozen=True)
class CoherenceComparison:
    name: str
    oracle: complex
    predicted: complex | None
    abs_error: float | None
    rel_error: float | None


@dataclass(frozen=True)
class ValidationReport:
    drives: DriveSet
    rows: tuple[CoherenceComparison, ...]

    def __getitem__(self, name: str) -> CoherenceComparison:
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)


def _compare(name, oracle, predicted):
    if predicted is None:
        return CoherenceComparison(name, oracle, None, None, None)
    err = abs(oracle - predicted)
    if predicted != 0:
        rel = err / abs(predicted)
    else:
        rel = 0.0 if err == 0 else math.inf
    return CoherenceComparison(name, oracle, predicted, err, rel)


def validate_perturbation(params: SystemParams, drives: DriveSet, method: str = "auto") -> ValidationReport:
    """Compare the exact steady state with the printed perturbative orders.

    The pumps and detuning are taken from ``drives``; relaxation rates from
    ``params``. rho21 is compared with the sum of its first three orders and
    rho31 with its first two; rho32 has no perturbative counterpart and is
    reported alone. Large errors are data, not failures.
    """
    pert_params = _with_drives(params, drives)
    pred = coherences(pert_params, drives.fields)
    rho = steady_state(params, drives, method).rho
    rows = (
        _compare("rho21", complex(rho[1, 0]), pred.rho21),
        _compare("rho31", complex(rho[2, 0]), pred.rho31),
        _compare("rho32", complex(rho[2, 1]), None),
    )
    return ValidationReport(drives, rows)


def _with_drives(params: SystemParams, drives: DriveSet) -> SystemParams:
    return replace(params, omega_c=drives.omega_c, omega_d=drives.omega_d, delta_p=drives.delta_p)
