class RoofkitError(Exception):
    """Base class for all roofkit errors."""


class SchemaError(RoofkitError, ValueError):
    """Input document does not match its schema.

    ``path`` is the offending key path, e.g. ``memory_ceilings[0].bytes_per_sec``.
    """

    def __init__(self, path, message):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)


class InvariantError(RoofkitError):
    """An internal model invariant was violated."""
