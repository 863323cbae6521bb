"""Exception types shared across the package."""


class CuspGeomError(Exception):
    """Base class for all package errors."""


class InputError(CuspGeomError, ValueError):
    """Invalid arguments: unknown vertices, bad parameters, malformed files."""


class ResourceError(CuspGeomError, RuntimeError):
    """A requested computation exceeds a configured size cap."""


class DataError(CuspGeomError, ValueError):
    """The data is well-formed but degenerate for the requested measurement."""
