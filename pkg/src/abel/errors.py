"""Exception hierarchy shared by every module of the package."""


class AbelError(Exception):
    """Base class for all domain errors raised by :mod:`abel`."""

    code = "abel_error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class InvalidPolynomial(AbelError, ValueError):
    code = "invalid_polynomial"


class DegenerateEquation(AbelError, ValueError):
    code = "degenerate_equation"


class DiscontinuousPath(AbelError, ValueError):
    code = "discontinuous_path"


class DomainError(AbelError, ValueError):
    code = "domain_error"


class DenominatorVanished(AbelError):
    code = "denominator_vanished"


class StepFailure(AbelError):
    code = "step_failure"


class PerturbationEscaped(AbelError):
    code = "perturbation_escaped"


class SingularOnPath(AbelError):
    """Continuation of the solution hit a singularity before reaching ``b``."""

    code = "singular_on_path"

    def __init__(self, message, record=None, fixed_point=None):
        super().__init__(message)
        self.record = record
        self.fixed_point = fixed_point


class DeformationFailed(AbelError):
    code = "deformation_failed"


class FitRejected(AbelError):
    code = "fit_rejected"


class PoleLocus(AbelError, ValueError):
    code = "pole_locus"


class QuarterCase(AbelError, ValueError):
    code = "quarter_case"


class DegenerateC(AbelError, ValueError):
    code = "degenerate_c"


class TrackingAmbiguous(AbelError):
    code = "tracking_ambiguous"


class NoWitnessFound(AbelError):
    code = "no_witness_found"


class BracketFailed(AbelError):
    code = "bracket_failed"
