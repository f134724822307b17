"""Exception hierarchy shared by all noisestab modules."""


class NoiseStabError(ValueError):
    """Base class for every error raised by noisestab."""


class DegenerateProbability(NoiseStabError):
    """A probability argument sits on {0, 1} where the function is undefined."""


class CorrelationOutOfRange(NoiseStabError):
    pass


class DegreeTooLarge(NoiseStabError):
    """Requested Hermite degree exceeds the overflow guard.

    ``partial`` optionally carries the best result computed before the guard
    was hit.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class MalformedInterval(NoiseStabError):
    pass


class SetLiteralError(MalformedInterval):
    """Unparseable set literal; records the offending token and its offset."""

    def __init__(self, message, token, position):
        super().__init__(f"{message}: {token!r} at position {position}")
        self.token = token
        self.position = position


class DegenerateMeasure(NoiseStabError):
    """The set has Gaussian measure 0 or 1."""


class DegenerateEpsilon(NoiseStabError):
    pass


class TimeOutOfRange(NoiseStabError):
    pass


class BadExponent(NoiseStabError):
    pass


class NotConverged(NoiseStabError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DegenerateClock(NoiseStabError):
    pass


class InsufficientEnsemble(NoiseStabError):
    pass


class FamilyDegenerate(NoiseStabError):
    pass
