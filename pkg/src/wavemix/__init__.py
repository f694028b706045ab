"""Coexisting three-wave and four-wave mixing in a cyclic three-level system."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    STRONG_FIELD,
    WEAK_FIELD,
    CoherenceSet,
    DerivedRates,
    FieldVector,
    SingularParameterError,
    SystemParams,
    coherences,
    derive_rates,
    probe_absorption,
)
from .propagation import (  # noqa: E402
    CouplingMatrix,
    PropagationTrace,
    build_coupling_matrix,
    closed_form_trace,
    efficiencies,
    integrate_rk4,
    propagate,
    propagate_closed_form,
)
