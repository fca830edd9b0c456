"""Exception types shared across the package."""


class RegNasError(Exception):
    pass


class ShapeMismatch(RegNasError):
    pass


class DivergedError(RegNasError):
    """A forward pass or loss produced non-finite values."""


class MissingForwardCache(RegNasError):
    pass


class LabelOutOfRange(RegNasError):
    pass


class DegenerateError(RegNasError):
    """Genotype has no usable path from input to output."""


class SamplingExhausted(RegNasError):
    pass


class ScopeError(RegNasError):
    pass


class InvalidSpec(RegNasError):
    pass


class InvalidFrequency(RegNasError):
    pass


class LengthMismatch(RegNasError):
    pass


class MissingGroundtruth(RegNasError):
    pass


class ParseError(RegNasError):
    pass


class DuplicateId(RegNasError):
    pass
