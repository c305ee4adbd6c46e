"""Exception types shared across the package."""


class SelectionGameError(Exception):
    """Base class for every error raised by selgames."""


class BudgetExhausted(SelectionGameError):
    """A budgeted search over a lazy family ended without deciding the question."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotProper(SelectionGameError):
    """An open set equal to the whole space was used where a proper subset is required."""


class NotContained(SelectionGameError):
    """A finite set is not contained in the open set it was paired with."""


class DegenerateDistance(SelectionGameError):
    """A point of F sits at distance zero from the complement of U."""


class IllegalMove(SelectionGameError):
    def __init__(self, player, inning, reason):
        super().__init__(f"illegal move by player {player} at inning {inning}: {reason}")
        self.player = player
        self.inning = inning
        self.reason = reason


class CertificateMismatch(SelectionGameError):
    """The degenerate-branch search found a function whose sublevel is proper."""


class NonTestMember(SelectionGameError):
    """A selected function does not carry its (F, U) test-function tag."""


class NormalizationRequired(SelectionGameError):
    """A function-space homeomorphism does not send the constant identity to itself."""


class SearchSpaceOverflow(SelectionGameError):
    pass


class ScenarioError(SelectionGameError):
    def __init__(self, message, line=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


class ApproximateOnly(UserWarning):
    """Emitted when a result rests on sampling rather than exact geometry."""
