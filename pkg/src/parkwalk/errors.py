"""Exception hierarchy shared across the package."""


class ParkwalkError(Exception):
    pass


class ValidationError(ParkwalkError, ValueError):
    pass


class DegenerateGeometryError(ValidationError):
    pass


class ReferentialIntegrityError(ValidationError):
    pass


class FormatError(ValidationError):
    """Unparseable input; the message names the file, line or feature."""


class NoAccessError(ParkwalkError):
    pass


class ZeroAreaWalkshedError(ParkwalkError):
    pass


class UndefinedProfileError(ParkwalkError):
    pass


class DomainError(ValidationError):
    pass


class SingularFitError(ParkwalkError):
    pass


class GridSearchFailedError(ParkwalkError):
    pass


class PipelineError(ParkwalkError):
    pass
