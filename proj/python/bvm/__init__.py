"""Bratteli-Vershik stochastic adding machines.

Thin wrapper over the compiled core: diagram construction and validation,
the (F,G) numeration codec, transition-operator rows, chain simulation,
recurrence classification and escape-time membership/rendering for the
associated spectral sets.
"""

from ._bvm import (
    Diagram,
    Schedule,
    classify,
    critical_escape,
    decode,
    eigen_residual,
    encode,
    iterate_from_zero,
    operator_csv,
    operator_row,
    path_of,
    probe,
    render_pgm,
    return_time_bound,
    simulate,
    successor_of,
    validate_digits,
    __version__,
)

__all__ = [
    "Diagram",
    "Schedule",
    "classify",
    "critical_escape",
    "decode",
    "eigen_residual",
    "encode",
    "iterate_from_zero",
    "operator_csv",
    "operator_row",
    "path_of",
    "probe",
    "render_pgm",
    "return_time_bound",
    "simulate",
    "successor_of",
    "validate_digits",
    "__version__",
]
