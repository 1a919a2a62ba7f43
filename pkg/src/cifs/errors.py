"""Exception hierarchy.

Every error carries a short machine-readable ``code`` which the command line
front end prints alongside the message.
"""


class IFSError(Exception):
    code = "E_IFS"


class ContractionError(IFSError, ValueError):
    """A map is not a strict contraction (``|ratio| >= 1``)."""

    code = "E_CONTRACTION"


class DimensionError(IFSError, ValueError):
    code = "E_DIMENSION"


class DSLSyntaxError(IFSError, ValueError):
    """Malformed expression; ``position`` is the 0-based offset in the source."""

    code = "E_DSL_SYNTAX"

    def __init__(self, message, source, position):
        self.source = source
        self.position = position
        super().__init__(f"{message} at position {position}: {source!r}")


class DSLEvaluationError(IFSError, ArithmeticError):
    code = "E_DSL_EVAL"

    def __init__(self, message, i):
        self.i = i
        super().__init__(f"{message} (i={i})")


class FamilyError(IFSError, ValueError):
    code = "E_FAMILY"


class BudgetError(IFSError, ValueError):
    code = "E_BUDGET"


class PreconditionError(IFSError, ValueError):
    """An operation's documented precondition does not hold (refusal)."""

    code = "E_PRECONDITION"
