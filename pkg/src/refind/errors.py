"""Exception types shared across the package."""


class RefindError(Exception):
    """Base class for all errors raised by this package."""


class MalformedInputError(RefindError):
    """Input that violates a documented precondition (bad URL, bad span, ...)."""


class MalformedQueryError(MalformedInputError):
    """A query that is empty or unusable after tokenization."""


class NotFoundError(RefindError):
    """A referenced page, annotation, category, or session does not exist."""


class ConflictError(RefindError):
    """The operation collides with existing state (e.g. duplicate category)."""


class ConsistencyError(RefindError):
    """Cross-store invariant violated (e.g. nugget referencing a missing page)."""


class EmptyGrammarError(RefindError):
    """Grammar generation was asked to cover an empty vocabulary."""


class MalformedGrammarError(RefindError):
    """A grammar violates its structural invariants (dangling rule, recursion)."""


class SessionClosedError(RefindError):
    """An utterance was sent to a dialog session that already finished."""
