import os
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__
from pathlib import Path
from typing import Final, Union

StrPath = Union[str, Path, os.PathLike[str]]

WORD_BITS: Final = 64
WORD_DTYPE: Final = "<u8"
ALL_ONES_WORD: Final = (1 << WORD_BITS) - 1

STATE_MAGIC: Final = b"DCAS1"

COMMENT_PREFIX: Final = "#"
OBJECTS_KEYWORD: Final = "objects"
ELEMENT_KEYWORD: Final = "element"
ADD_OBJECTS_KEYWORD: Final = "add-objects"
EXTEND_KEYWORD: Final = "extend"
NEW_KEYWORD: Final = "new"

CSV_HEADER: Final = ("algo", "n", "m", "t", "l", "phase", "ops", "nanos")

VERIFY_QUERY_COUNT: Final = 20


class ApproxOperator(StrEnum):
    SH = "SH"
    SL = "SL"
    XH = "XH"
    XL = "XL"
    IH = "IH"
    IL = "IL"

    @classmethod
    def from_string(cls, value: str) -> "ApproxOperator":
        return cls(value.strip().upper())

    @property
    def is_upper(self) -> bool:
        return self.value.endswith("H")

    @property
    def has_matrix_form(self) -> bool:
        return self not in (ApproxOperator.IH, ApproxOperator.IL)


class Algorithm(StrEnum):
    NCS = "NCS"
    ICS = "ICS"
    NCX = "NCX"
    ICX = "ICX"

    @property
    def incremental(self) -> bool:
        return self in (Algorithm.ICS, Algorithm.ICX)

    @property
    def counterpart(self) -> "Algorithm":
        return {
            Algorithm.NCS: Algorithm.ICS,
            Algorithm.ICS: Algorithm.NCS,
            Algorithm.NCX: Algorithm.ICX,
            Algorithm.ICX: Algorithm.NCX,
        }[self]


class Phase(StrEnum):
    MATRIX_BUILD = "matrix_build"
    DELTA_BUILD = "delta_build"
    APPROXIMATION = "approximation"


class MatrixName(StrEnum):
    M = "M"
    GAMMA = "gamma"
    PI = "pi"


class ViolationKind(StrEnum):
    EMPTY_ELEMENT = "empty element"
    UNCOVERED_OBJECT = "uncovered object"
    DUPLICATE_OBJECT = "duplicate object"
    DUPLICATE_ELEMENT = "duplicate element"
    UNKNOWN_MEMBER = "unknown member"
    EXTENSION_OLD_OBJECT = "extension must contain only new objects"
    EMPTY_EXTENSION = "empty extension"
    UNKNOWN_ELEMENT = "unknown element"
    UNCOVERED_NEW_OBJECT = "uncovered new object"
    NAME_COLLISION = "name collision"
    STRICT_TOO_FEW_OBJECTS = "strict: fewer than two new objects"
    STRICT_TOO_FEW_ELEMENTS = "strict: fewer than two new elements"
    STRICT_NOT_IN_NEW_ELEMENTS = "strict: new object outside new elements"
