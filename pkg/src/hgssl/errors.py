"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operands have incompatible dimensions."""


class FormatError(ValueError):
    """A file does not conform to its declared on-disk format."""


class NumericalError(ArithmeticError):
    """A non-finite value appeared where finite arithmetic was required."""


class SolverError(NumericalError):
    """An iterative solve failed to reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateStructureError(ValueError):
    """A graph or hypergraph has a zero degree where positivity is required."""


class ConfigError(ValueError):
    """A benchmark config file is malformed; carries the offending line."""

    def __init__(self, message, path=None, line=None):
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
        if line is not None:
            prefix += f"{line}:"
        if prefix:
            message = f"{prefix} {message}"
        super().__init__(message)
        self.path = path
        self.line = line
