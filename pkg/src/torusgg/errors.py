"""Exception types shared across the package."""


class TorusGGError(Exception):
    """Base class for all errors raised by torusgg."""


class DegenerateForm(TorusGGError):
    pass


class InvalidTorus(TorusGGError):
    pass


class InvalidIsogeny(TorusGGError):
    pass


class InvalidHermitianForm(TorusGGError):
    pass


class TorusMismatch(TorusGGError):
    pass


class NotAmple(TorusGGError):
    pass


class IndefiniteBorderline(TorusGGError):
    """An eigenvalue of H sits inside the positivity tolerance band."""


class TruncationInsufficient(TorusGGError):
    pass


class RealizationMismatch(TorusGGError):
    pass


class NonIntegralChernClass(TorusGGError):
    pass


class IdentityViolation(TorusGGError):
    pass


class LatticeMismatch(TorusGGError):
    pass


class ZeroVector(TorusGGError):
    pass


class EffectivityUndecidable(TorusGGError):
    pass


class HypothesisNotMet(TorusGGError):
    pass


class UnboundedEntry(TorusGGError):
    pass


class ParseError(TorusGGError):
    pass


class SceneReferenceError(TorusGGError):
    pass
