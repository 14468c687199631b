"""Exception hierarchy shared by every module."""


class IrpError(Exception):
    """Base class for all errors raised by :mod:`irp`."""


class DataError(IrpError, ValueError):
    """Input data is malformed or degenerate (CLI exit code 2)."""


class NumericalError(IrpError, ArithmeticError):
    """A numerical routine failed (CLI exit code 3)."""


class DegenerateSpace(DataError):
    """All anchors coincide, so the space has no spread to normalize by."""


class ZeroNormRow(DataError):
    def __init__(self, index, message=None):
        self.index = int(index)
        super().__init__(message or f"row {self.index} has (near-)zero norm")


class ShapeMismatch(DataError):
    pass


class InvalidShape(DataError):
    pass


class MissingSpace(DataError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvalidLabels(DataError):
    pass


class ZeroVariance(DataError):
    pass


class LengthMismatch(DataError):
    pass


class FileFormatError(DataError):
    pass


class SvdFailure(NumericalError):
    pass
