"""Exception hierarchy shared across the pipeline."""


class VreError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(VreError):
    """Invalid pipeline configuration (syntax or semantics).

    ``line``/``column`` are 1-based positions when the underlying parser
    reported one, else None.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class GraphError(VreError):
    """Dependency graph violation (unknown node, bad partition, ...)."""


class CycleError(GraphError):
    """The dependency graph contains a cycle.

    ``path`` holds one concrete cycle as a list of names, first == last.
    """

    def __init__(self, path: list[str]):
        self.path = list(path)
        super().__init__("dependency cycle: " + " -> ".join(self.path))


class RepresentationError(VreError):
    """A representation rejected its params, deps or inputs."""


class ResourceExhausted(VreError):
    """Distinguished failure class: the compute ran out of memory/resources.

    The engine reacts by halving the batch and retrying; every other error
    class fails the batch outright.
    """


class ExpertProtocolError(VreError):
    """The external expert child violated the wire protocol or died."""


class StorageError(VreError):
    """Export directory problem (corrupt metadata, missing frame, ...)."""


class StreamProtocolError(VreError):
    """Malformed stream handshake or frame framing."""
