class ArtsohError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(ArtsohError, ValueError):
    pass


class ImageFormatError(ArtsohError):
    pass


class LayoutError(ArtsohError):
    pass


class TrainingError(ArtsohError):
    pass


class CurveError(ArtsohError, ValueError):
    pass
