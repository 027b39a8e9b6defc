"""Exception hierarchy shared by every module of the package."""


class BellError(Exception):
    """Base class for all errors raised by bellstrength."""


class NotHermitian(BellError):
    pass


class NoConvergence(BellError):
    pass


class ZeroSettingWeight(BellError):
    pass


class ShapeMismatch(BellError):
    pass


class InvalidLaw(BellError):
    """A probability law (or its JSON form) violates one of its invariants."""


class TooManyVertices(BellError):
    pass


class ValidityCheckFailed(BellError):
    """A built inequality is violated by some deterministic vertex."""


class InvalidModel(BellError):
    pass


class DegenerateEigenvector(BellError):
    pass


class IterationCapExceeded(BellError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NotConverged(BellError):
    pass


class ZeroDivergence(BellError):
    pass
