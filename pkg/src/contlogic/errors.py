"""Exception hierarchy shared by all modules."""


class ContlogicError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(ContlogicError):
    """Malformed input object: wrong arity, wrong length, unbound variable, ..."""


class DomainError(ContlogicError):
    """Input outside the documented domain of an operation."""


class GrammarError(StructuralError):
    """Lexical or syntactic error in formula text, with a position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownSymbolError(StructuralError):
    """A symbol used in a formula is not declared in the signature."""


class SortMismatchError(StructuralError):
    """A term or variable is used at an incompatible sort."""


class CompletionError(StructuralError):
    """Quotient completion failed: a table is not well defined on classes."""

    def __init__(self, message: str, witnesses):
        super().__init__(message)
        self.witnesses = witnesses


class DefinitionAbort(ContlogicError):
    """A constructive definition search aborted; carries the diagnostic."""

    def __init__(self, reason: str, **details):
        self.reason = reason
        self.details = details
        parts = ", ".join(f"{k}={v}" for k, v in sorted(details.items()))
        super().__init__(f"{reason}" + (f" ({parts})" if parts else ""))
