"""Exception hierarchy. Every error raised on bad user input derives from AappError."""

from __future__ import annotations

from typing import Optional


class AappError(Exception):
    """Base class for toolkit errors."""


# model / semantics


class UnknownWorker(AappError, KeyError):
    def __str__(self) -> str:
        return f"unknown worker: {self.args[0]}"


class UnknownFunction(AappError, KeyError):
    def __str__(self) -> str:
        return f"unknown function: {self.args[0]}"


class CapacityExceeded(AappError):
    pass


class FunctionNotAllocated(AappError):
    pass


class InvariantViolation(AappError):
    pass


class UntaggedFunction(AappError):
    pass


class IllegalTransition(AappError):
    def __init__(self, reason: str, rule: str, index: Optional[int] = None):
        self.reason = reason
        self.rule = rule
        self.index = index
        where = f"step {index}: " if index is not None else ""
        super().__init__(f"{where}{rule}: {reason}")


# analysis


class WrongFragment(AappError):
    pass


class UnknownName(AappError):
    pass


# parsing


class ParseError(AappError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.message = message
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ScriptSyntaxError(ParseError):
    pass


class DuplicateTag(ParseError):
    pass


class UnknownOption(ParseError):
    pass


class EmptyBlockList(ParseError):
    pass


class PercentOutOfRange(ParseError):
    pass


class DuplicateName(ParseError):
    pass


class ZeroMemory(ParseError):
    pass


class InitialOverCapacity(ParseError):
    pass


# pddl


class ValidationFailed(AappError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))
