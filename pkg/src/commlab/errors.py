"""Shared exception types."""


class CommlabError(Exception):
    pass


class BudgetExceededError(CommlabError):
    """A configured resource cap (element count, term count, cube count) was hit."""


class InvalidTripleError(CommlabError, ValueError):
    """The (p, q, r) triple does not name a unary operation of the algebra."""


class DomainError(CommlabError, ValueError):
    """Arguments outside the domain of a partial operation."""


class ParseError(CommlabError, ValueError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position
