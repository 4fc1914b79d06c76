"""Exception types raised across the engine."""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine errors."""


class MissingColumn(EngineError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"declared column not found in table: {name}")


class NoTimeColumn(EngineError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"time column not found in table: {name}")


class EmptyDataset(EngineError):
    pass


class UnknownAttribute(EngineError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"attribute not declared in schema: {name}")


class ParseError(EngineError):
    """Task text did not match the expression grammar."""

    def __init__(self, line: int, expected: str):
        self.line = line
        self.expected = expected
        super().__init__(f"line {line}: expected {expected}")


class UnknownOperator(EngineError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown operator: {name}")


class InvalidTask(EngineError):
    def __init__(self, reasons: tuple[str, ...]):
        self.reasons = reasons
        super().__init__(f"task failed validity checks: {', '.join(reasons)}")


class NoEntityAttribute(EngineError):
    pass


class NoDataForAttribute(EngineError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"attribute has no present values: {name}")


class WindowExceedsSpan(EngineError):
    pass


class UnresolvedThreshold(EngineError):
    def __init__(self, attribute: str):
        self.attribute = attribute
        super().__init__(f"filter threshold on {attribute} is unresolved")


class EmptyTrainingSet(EngineError):
    pass


class MissingMetrics(EngineError):
    pass


class VersionError(EngineError):
    def __init__(self, got: object, want: object):
        self.got = got
        self.want = want
        super().__init__(f"model blob version {got!r}, expected {want!r}")


class CorruptBlob(EngineError):
    pass
