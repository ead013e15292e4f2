"""Exception hierarchy. Every domain error derives from ``SubgreedyError`` so the
CLI can map it to exit code 1 and print the class name."""


class SubgreedyError(Exception):
    pass


class UnknownElement(SubgreedyError):
    pass


class NotABase(SubgreedyError):
    pass


class TooLarge(SubgreedyError):
    pass


class OutOfRange(SubgreedyError):
    pass


class InvariantViolation(SubgreedyError):
    pass


class EmptyPart(InvariantViolation):
    pass


class OverlappingParts(InvariantViolation):
    pass


class DuplicateName(InvariantViolation):
    pass


class InvalidName(InvariantViolation):
    pass


class ParseError(SubgreedyError):
    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.field = field
