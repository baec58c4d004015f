from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from dynamic_covering.models import ValidationReport


class DynamicCoveringError(ValueError):
    pass


class DimensionError(DynamicCoveringError):
    def __init__(
        self, operation: str, left: tuple[int, int], right: tuple[int, int]
    ) -> None:
        self.operation = operation
        self.left = left
        self.right = right
        super().__init__(
            f"{operation}: incompatible shapes "
            f"{left[0]}x{left[1]} and {right[0]}x{right[1]}"
        )


class UnknownObjectError(DynamicCoveringError):
    def __init__(self, name: str, what: str = "object") -> None:
        self.name = name
        super().__init__(f"unknown {what} name: {name!r}")


class NameCollisionError(DynamicCoveringError):
    def __init__(self, names: list[str]) -> None:
        self.names = names
        super().__init__(f"names already in use: {', '.join(names)}")


class CoveringParseError(DynamicCoveringError):
    def __init__(self, message: str, line_number: int, source: str = "") -> None:
        self.line_number = line_number
        self.source = source
        prefix = f"{source}:" if source else "line "
        super().__init__(f"{prefix}{line_number}: {message}")


class CoveringValidationError(DynamicCoveringError):
    def __init__(self, report: "ValidationReport") -> None:
        self.report = report
        super().__init__("invalid covering:\n" + report.render())


class BatchValidationError(DynamicCoveringError):
    def __init__(self, report: "ValidationReport") -> None:
        self.report = report
        super().__init__("invalid update batch:\n" + report.render())


class StateFormatError(DynamicCoveringError):
    pass


class BadMagicError(StateFormatError):
    def __init__(self, found: bytes) -> None:
        self.found = found
        super().__init__(f"bad magic: {found!r}")


class TruncatedStateError(StateFormatError):
    def __init__(self, what: str, needed: int, available: int) -> None:
        super().__init__(
            f"truncated state file reading {what}: "
            f"needed {needed} bytes, {available} available"
        )


class StateInvariantError(StateFormatError):
    def __init__(
        self, message: str, entries: Optional[list[tuple[str, int, int]]] = None
    ) -> None:
        self.entries = entries or []
        super().__init__(message)


class TripwireError(DynamicCoveringError):
    """Raised when an incremental result diverges from full recomputation."""

    def __init__(self, message: str, entries: list[tuple[str, int, int]]) -> None:
        self.entries = entries
        shown = ", ".join(f"{name}[{i},{j}]" for name, i, j in entries[:20])
        more = f" (+{len(entries) - 20} more)" if len(entries) > 20 else ""
        super().__init__(f"{message}: {shown}{more}")
