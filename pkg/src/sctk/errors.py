"""Shared exception hierarchy.

Every error raised on a user-facing path (file loading, generation,
execution) derives from ToolchainError so the CLI can map it to the
usage/format exit code.
"""


class ToolchainError(Exception):
    pass


class FormatError(ToolchainError):
    """Malformed artifact file (JSON structure, text grammar, schema)."""


class ParameterError(ToolchainError):
    """Invalid operation parameters, e.g. a fault bound below the state count."""
