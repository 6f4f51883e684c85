"""Rigorous verification of the generalized Riemann hypothesis at desk scale.

Interval-certified evaluation of completed Dirichlet L-functions on the
critical line, sign-change zero location, and zero-count certification.
"""

__version__ = "0.1.0"

from .interval import (
    HARDWARE,
    ComplexBox,
    PrecisionTier,
    RealInterval,
    bigfloat,
    log_gamma,
    pi_interval,
)

__all__ = [
    "HARDWARE",
    "ComplexBox",
    "PrecisionTier",
    "RealInterval",
    "bigfloat",
    "log_gamma",
    "pi_interval",
    "__version__",
]
