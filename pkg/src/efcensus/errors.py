"""Shared exception types for the census engine.

Input validation failures raise the built-in ValueError, arithmetic domain
failures raise the built-in ValueError as well (log of a non-positive
intermediate, for instance), and shifts that would push bits past the end of
a bitmap raise OverflowError.  The one custom type below covers the remaining
category: a request that is well-formed but too large for the configured
resources.
"""


class CapacityError(Exception):
    """A well-formed request exceeds a configured resource limit.

    Carries enough context to act on: the number of bytes the request would
    need (when applicable) and a suggested splitting modulus when the census
    engine can see a cheaper route.
    """

    def __init__(self, message, required_bytes=None, suggested_split=None):
        super().__init__(message)
        self.required_bytes = required_bytes
        self.suggested_split = suggested_split


def format_bytes(n: int) -> str:
    """Human-readable byte count, e.g. 125000000000 -> '125.0 GB'."""
    value = float(n)
    for unit in ("B", "KB", "MB", "GB", "TB", "PB"):
        if value < 1000.0 or unit == "PB":
            return f"{value:.1f} {unit}" if unit != "B" else f"{int(value)} B"
        value /= 1000.0
    return f"{int(n)} B"
