"""Physical parameters and steady-state coherences of the cyclic three-level system.

Every rate and Rabi frequency is measured in units of the 1-3 relaxation
rate ``gamma13``; distances are measured in ``Z = kappa12 * z``.

Coherence conventions: ``rho21`` is the element <2|rho|1>, so it carries the
polarization at the probe transition and ``rho31`` the polarization at the
three-wave-mixing transition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields as dc_fields

import numpy as np


class SingularParameterError(ValueError):
    """A denominator of the perturbative solution vanishes (lambda or Gamma21)."""


_RATE_FIELDS = ("gamma12", "gamma13", "gamma23", "gamma_phi2", "gamma_phi3")
_POSITIVE_FIELDS = ("gamma13", "kappa12", "kappa13", "freq_ratio", "mu_ratio")


@dataclass(frozen=True)
class SystemParams:
    """All physical inputs of one configuration.

    ``mu_ratio`` is the dipole ratio mu12/mu13 and ``freq_ratio`` is
    omega_t/omega_p; both only enter the TWM conversion efficiency.
    The defaults reproduce the weak-control-field configuration.
    """

    gamma12: float = 0.01
    gamma13: float = 1.0
    gamma23: float = 0.005
    gamma_phi2: float = 0.0
    gamma_phi3: float = 0.0
    omega_c: complex = 0.1
    omega_d: complex = 0.1
    delta_p: float = 0.0
    kappa12: float = 1.0
    kappa13: float = 3.3
    mu_ratio: float = 1.0
    freq_ratio: float = 3.3
    probe_rabi0: complex = 1e-3

    def __post_init__(self):
        for f in dc_fields(self):
            value = getattr(self, f.name)
            if f.name in ("omega_c", "omega_d", "probe_rabi0"):
                value = complex(value)
            else:
                value = float(value)
            if not np.isfinite(value):
                raise ValueError(f"{f.name} must be finite, got {value!r}")
            object.__setattr__(self, f.name, value)
        for name in _RATE_FIELDS:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)!r}")
        for name in _POSITIVE_FIELDS:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if self.probe_rabi0 == 0:
            raise ValueError("probe_rabi0 must be nonzero")


# Parameter sets of the two regimes discussed in the text (Figs. 2 and 3).
WEAK_FIELD = SystemParams(omega_c=0.1, omega_d=0.1, delta_p=0.0)
STRONG_FIELD = SystemParams(omega_c=8.0, omega_d=0.65, delta_p=0.16)


@dataclass(frozen=True)
class DerivedRates:
    tau21: float
    tau31: float
    tau32: float
    Gamma21: complex
    Gamma31: complex
    lam: complex


@dataclass(frozen=True)
class FieldVector:
    """Complex Rabi amplitudes of probe, TWM signal and FWM signal."""

    omega_p: complex = 0j
    omega_t: complex = 0j
    omega_f: complex = 0j

    def __post_init__(self):
        for name in ("omega_p", "omega_t", "omega_f"):
            value = complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    def as_array(self) -> np.ndarray:
        return np.array([self.omega_p, self.omega_t, self.omega_f], dtype=complex)

    @classmethod
    def from_array(cls, v) -> FieldVector:
        p, t, f = np.asarray(v, dtype=complex)
        return cls(p, t, f)


@dataclass(frozen=True)
class CoherenceSet:
    rho31_1: complex
    rho21_1: complex
    rho31_2: complex
    rho21_2: complex
    rho21_3: complex

    @property
    def rho21(self) -> complex:
        """Probe-transition coherence summed over all printed orders."""
        return self.rho21_1 + self.rho21_2 + self.rho21_3

    @property
    def rho31(self) -> complex:
        return self.rho31_1 + self.rho31_2


def derive_rates(params: SystemParams, delta_p: float | None = None) -> DerivedRates:
    """Decoherence rates and the complex denominators of the steady-state solution.

    ``delta_p`` overrides ``params.delta_p`` (used when scanning a spectrum).
    """
    dp = params.delta_p if delta_p is None else float(delta_p)
    tau21 = 0.5 * (params.gamma12 + params.gamma_phi2)
    tau31 = 0.5 * (params.gamma13 + params.gamma23 + params.gamma_phi3)
    tau32 = 0.5 * (
        params.gamma12 + params.gamma13 + params.gamma23
        + params.gamma_phi2 + params.gamma_phi3
    )
    G21 = complex(tau21, dp)
    G31 = complex(tau31, dp)
    lam = G21 * G31 + abs(params.omega_c) ** 2 / 4
    return DerivedRates(tau21, tau31, tau32, G21, G31, lam)


def _require_lambda(rates: DerivedRates):
    if rates.lam == 0:
        raise SingularParameterError("lambda = Gamma21*Gamma31 + |omega_c|^2/4 vanishes")


def _require_gamma21(rates: DerivedRates):
    if rates.Gamma21 == 0:
        raise SingularParameterError(
            "Gamma21 vanishes (gamma12 = gamma_phi2 = 0 at zero detuning)"
        )


def coherence_first_order(rates: DerivedRates, fields: FieldVector) -> tuple[complex, complex]:
    """Return ``(rho31_1, rho21_1)``, the linear responses at both transitions."""
    _require_lambda(rates)
    lam = rates.lam
    rho31 = 1j * fields.omega_t * rates.Gamma21 / (2 * lam)
    rho21 = 1j * (fields.omega_f + fields.omega_p) * rates.Gamma31 / (2 * lam)
    return rho31, rho21


def coherence_second_order(
    rates: DerivedRates, params: SystemParams, fields: FieldVector
) -> tuple[complex, complex]:
    """Return ``(rho31_2, rho21_2)``.

    ``rho31_2`` holds the TWM source (probe x control) plus the FWM-to-TWM
    conversion (FWM x drive); ``rho21_2`` is the back-conversion of the TWM
    field through both pumps.
    """
    _require_lambda(rates)
    lam = rates.lam
    oc, od = params.omega_c, params.omega_d
    rho31 = -(fields.omega_p * oc + fields.omega_f * od) / (4 * lam)
    rho21 = -fields.omega_t * (oc.conjugate() + od.conjugate()) / (4 * lam)
    return rho31, rho21


def coherence_third_order(
    rates: DerivedRates, params: SystemParams, fields: FieldVector
) -> complex:
    _require_lambda(rates)
    _require_gamma21(rates)
    oc, od = params.omega_c, params.omega_d
    num = fields.omega_p * oc * od.conjugate() + fields.omega_f * od * oc.conjugate()
    # i**3 == -i
    return -1j * num / (8 * rates.lam * rates.Gamma21)


def coherences(params: SystemParams, fields: FieldVector) -> CoherenceSet:
    """Evaluate every printed order of the perturbative steady state."""
    rates = derive_rates(params)
    r31_1, r21_1 = coherence_first_order(rates, fields)
    r31_2, r21_2 = coherence_second_order(rates, params, fields)
    r21_3 = coherence_third_order(rates, params, fields)
    return CoherenceSet(r31_1, r21_1, r31_2, r21_2, r21_3)


def probe_absorption(params: SystemParams, delta_p: float | None = None) -> float:
    """Exponential attenuation rate of the probe amplitude per unit length.

    This is ``kappa12 * Re(Gamma31 / (2 lambda))``, the real part of the
    self-coupling of the probe in the propagation equations with its sign
    flipped. Positive values mean absorption.
    """
    rates = derive_rates(params, delta_p)
    if rates.lam == 0:
        dp = params.delta_p if delta_p is None else delta_p
        raise SingularParameterError(f"lambda vanishes at delta_p={dp!r}")
    return float(params.kappa12 * (rates.Gamma31 / (2 * rates.lam)).real)
