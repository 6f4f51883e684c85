"""Exception types raised by the numerical kernels.

Every failure mode that a caller can act on gets its own class; anything else
is a plain ValueError/TypeError from argument validation.
"""


class GrhdeskError(Exception):
    """Base class for all domain errors raised by this package."""


class DivisorContainsZero(GrhdeskError):
    """Interval division where the divisor interval straddles or touches 0."""


class NegativeSqrtDomain(GrhdeskError):
    """sqrt of an interval whose lower endpoint is negative."""


class LogDomain(GrhdeskError):
    """log of an interval that is not strictly positive."""


class NonPositiveRealPart(GrhdeskError):
    """Complex log / log-gamma argument left of the imaginary axis."""


class DomainError(GrhdeskError):
    """Argument outside the domain an operation is specified for."""


class QTooSmall(GrhdeskError):
    """Modulus below 3; there are no primitive characters to work with."""


class NotPrimitive(GrhdeskError):
    """Operation requires a primitive character."""


class PoleProximity(GrhdeskError):
    """Hurwitz zeta evaluated on an s-interval that contains the pole s=1."""


class RadiusViolation(GrhdeskError):
    """Taylor shift |delta| too large for the requested lattice row."""


class TailDivergence(GrhdeskError):
    """A geometric tail bound failed to certify a ratio < 1."""


class GeometricRatioNotDecreasing(GrhdeskError):
    """Theta-sum truncation could not establish a decreasing term ratio."""


class XConditionViolated(GrhdeskError):
    """Alias bound requested outside its X(x) > 1 region of validity."""


class BetaConditionViolated(GrhdeskError):
    """Grid-error bound requested where the beta exponent is not positive."""


class WindowUnderflow(GrhdeskError):
    """Up-sampling window extends past the ends of the sample grid."""


class QuadratureNotTight(GrhdeskError):
    """Interval quadrature failed to reach the requested enclosure width."""


class HypothesisViolated(GrhdeskError):
    """An analytic bound was requested outside its hypotheses (e.g. t0 <= 50)."""


class RealnessViolation(GrhdeskError):
    """A provably-real quantity came out with an imaginary part excluding 0."""


class CertificationFailed(GrhdeskError):
    """Zero-count certification could not be completed for a window."""
