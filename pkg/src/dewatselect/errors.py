"""Error types shared across the toolkit.

The CLI maps these onto distinct exit codes and the HTTP service onto
status codes, so raising the right class matters more than the message.
"""


class DewatError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(DewatError):
    """Malformed input document (CSV/JSON rows, shapes, value domains)."""


class MissingDataError(DewatError):
    """A required measurement or injection value is absent."""


class UnsupportedOrderError(DewatError):
    """Pairwise matrix order outside the random-index table (n > 10)."""


class ConsistencyGateError(DewatError):
    """One or more judgment matrices failed the CR < 0.1 acceptability rule."""

    def __init__(self, offending):
        # offending: list of (criterion_id, cr)
        self.offending = list(offending)
        detail = ", ".join(f"criterion {cid}: CR={cr:.4f}" for cid, cr in self.offending)
        super().__init__(f"inconsistent judgment matrices: {detail}")


class SessionStateError(DewatError):
    """Operation not allowed in the session's current state."""


class IncompleteRoundError(SessionStateError):
    """Round cannot close because first-round submissions are missing."""
