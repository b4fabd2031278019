"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SubsError(Exception):
    """Base class for all data errors raised by this package."""


class ProgramParseError(SubsError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (token {position})"
        super().__init__(message)


class EmptyInput(ProgramParseError):
    pass


class UnbalancedParens(ProgramParseError):
    pass


class UnexpectedToken(ProgramParseError):
    pass


class InvalidPath(SubsError):
    pass


class DomainError(SubsError):
    pass


class SchemaViolation(DomainError):
    pass


class DanglingTypeReference(DomainError):
    pass


class DanglingFuncMapEntry(DomainError):
    pass


class UnknownConstant(DomainError):
    def __init__(self, symbol: str):
        self.symbol = symbol
        super().__init__(f"unknown constant {symbol!r}")


class TypeMismatch(DomainError):
    def __init__(self, message: str, path: tuple[int, ...]):
        self.path = path
        super().__init__(f"{message} at path {list(path)}")


class CompositionError(SubsError):
    pass


class NoLegalApplication(CompositionError):
    pass


class AmbiguousApplication(CompositionError):
    pass


class TreeError(SubsError):
    pass


class NullRoot(TreeError):
    pass


class IndexOutOfRange(TreeError):
    pass


class CategoryMismatch(TreeError):
    pass


class CorpusError(SubsError):
    pass


class MalformedLine(CorpusError):
    def __init__(self, path, lineno: int, reason: str):
        self.path = path
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {reason}")


class DuplicateId(CorpusError):
    pass


class UnknownId(CorpusError):
    pass


class ValidationFailure(CorpusError):
    pass


class MissingProvenance(SubsError):
    pass
