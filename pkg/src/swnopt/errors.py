"""Shared exception bases.

Concrete exceptions live next to the code that raises them; these two bases
exist so the CLI can map whole error families onto exit codes (input problems
vs failures that occur after the inputs were accepted).
"""


class InputError(Exception):
    """The provided net or log is malformed or violates a structural contract."""


class ComputationError(Exception):
    """A computation failed on structurally valid inputs."""
