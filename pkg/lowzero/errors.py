"""
Exception types for lowzero.

Argument problems raise the built-in ``ValueError``; everything that goes
wrong while computing raises :class:`NumericalError`. The CLI maps the first
to exit code 2 and the second to exit code 1.
"""


class NumericalError(RuntimeError):
    """A computation could not produce a trustworthy number."""
