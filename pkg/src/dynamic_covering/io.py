import csv
import logging
from collections.abc import Iterable
from pathlib import Path
from typing import Any, Optional

import yaml
from pydantic import ValidationError

from dynamic_covering.constants import (
    ADD_OBJECTS_KEYWORD,
    COMMENT_PREFIX,
    CSV_HEADER,
    ELEMENT_KEYWORD,
    EXTEND_KEYWORD,
    NEW_KEYWORD,
    OBJECTS_KEYWORD,
    StrPath,
)
from dynamic_covering.errors import CoveringParseError, DynamicCoveringError
from dynamic_covering.models import (
    BenchRecord,
    CoveringElement,
    CoveringSpace,
    GenParams,
    QuerySet,
    UpdateBatch,
)

logger = logging.getLogger(__name__)


def _statements(text: str) -> Iterable[tuple[int, str]]:
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split(COMMENT_PREFIX, 1)[0].strip()
        if line:
            yield number, line


def _split_statement(
    line: str, number: int, source: str
) -> tuple[list[str], list[str]]:
    if ":" not in line:
        raise CoveringParseError(
            f"expected '<keyword>: names', got {line!r}", number, source
        )
    head, tail = line.split(":", 1)
    if ":" in tail:
        raise CoveringParseError("names may not contain ':'", number, source)
    return head.split(), tail.split()


def parse_covering(text: str, source: str = "") -> CoveringSpace:
    """
    Parse the covering text format::

        objects: x1 x2 x3 x4
        element C1: x1 x4

    The ``objects:`` statement must come first and appear once.
    """
    objects: Optional[tuple[str, ...]] = None
    elements: list[CoveringElement] = []
    for number, line in _statements(text):
        head, names = _split_statement(line, number, source)
        if head == [OBJECTS_KEYWORD]:
            if objects is not None:
                raise CoveringParseError(
                    "more than one 'objects:' line", number, source
                )
            objects = tuple(names)
        elif len(head) == 2 and head[0] == ELEMENT_KEYWORD:
            if objects is None:
                raise CoveringParseError(
                    "missing 'objects:' line before elements", number, source
                )
            elements.append(CoveringElement(name=head[1], members=tuple(names)))
        else:
            raise CoveringParseError(
                f"unknown statement {' '.join(head)!r}", number, source
            )
    if objects is None:
        raise CoveringParseError("missing 'objects:' line", 1, source)
    return CoveringSpace(objects=objects, elements=tuple(elements))


def read_covering(path: StrPath) -> CoveringSpace:
    path = Path(path)
    return parse_covering(path.read_text(encoding="utf-8"), source=str(path))


def format_covering(space: CoveringSpace) -> str:
    lines = [f"{OBJECTS_KEYWORD}: {' '.join(space.objects)}"]
    for element in space.elements:
        lines.append(f"{ELEMENT_KEYWORD} {element.name}: {' '.join(element.members)}")
    return "\n".join(lines) + "\n"


def save_covering(space: CoveringSpace, path: StrPath) -> None:
    Path(path).write_text(format_covering(space), encoding="utf-8")


def parse_batch(text: str, source: str = "") -> UpdateBatch:
    """
    Parse the batch text format::

        add-objects: x5 x6
        extend C1: x5
        new C4: x3 x5 x6
    """
    new_objects: Optional[tuple[str, ...]] = None
    extensions: dict[str, tuple[str, ...]] = {}
    new_elements: list[CoveringElement] = []
    for number, line in _statements(text):
        head, names = _split_statement(line, number, source)
        if head == [ADD_OBJECTS_KEYWORD]:
            if new_objects is not None:
                raise CoveringParseError(
                    "more than one 'add-objects:' line", number, source
                )
            new_objects = tuple(names)
        elif len(head) == 2 and head[0] == EXTEND_KEYWORD:
            if head[1] in extensions:
                raise CoveringParseError(
                    f"element {head[1]} extended twice", number, source
                )
            extensions[head[1]] = tuple(names)
        elif len(head) == 2 and head[0] == NEW_KEYWORD:
            new_elements.append(CoveringElement(name=head[1], members=tuple(names)))
        else:
            raise CoveringParseError(
                f"unknown statement {' '.join(head)!r}", number, source
            )
    return UpdateBatch(
        new_objects=new_objects or (),
        extensions=extensions,
        new_elements=tuple(new_elements),
    )


def read_batch(path: StrPath) -> UpdateBatch:
    path = Path(path)
    return parse_batch(path.read_text(encoding="utf-8"), source=str(path))


def format_batch(batch: UpdateBatch) -> str:
    lines = []
    if batch.new_objects:
        lines.append(f"{ADD_OBJECTS_KEYWORD}: {' '.join(batch.new_objects)}")
    for name, extra in batch.extensions.items():
        lines.append(f"{EXTEND_KEYWORD} {name}: {' '.join(extra)}")
    for element in batch.new_elements:
        lines.append(f"{NEW_KEYWORD} {element.name}: {' '.join(element.members)}")
    return "\n".join(lines) + "\n"


def save_batch(batch: UpdateBatch, path: StrPath) -> None:
    Path(path).write_text(format_batch(batch), encoding="utf-8")


def parse_query_set(value: str) -> QuerySet:
    """
    ``"x3,x4,x5"`` inline, or ``"@names.txt"`` with one name per line.
    """
    value = value.strip()
    if value.startswith("@"):
        text = Path(value[1:]).read_text(encoding="utf-8")
        names = [line for _, line in _statements(text)]
    else:
        names = [token.strip() for token in value.split(",")]
    return QuerySet(members=frozenset(name for name in names if name))


def write_bench_csv(
    records: Iterable[BenchRecord], path: StrPath, wall_time: bool = True
) -> int:
    """Write one row per (record, phase); returns the number of data rows."""
    count = 0
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for record in records:
            for row in record.csv_rows(wall_time=wall_time):
                writer.writerow(row)
                count += 1
    logger.info("wrote %d bench rows to %s", count, path)
    return count


def read_bench_config(
    path: StrPath, overrides: Optional[dict[str, Any]] = None
) -> GenParams:
    """Load bench parameters from a YAML mapping; ``overrides`` win."""
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(data, dict):
        raise DynamicCoveringError(f"{path}: expected a mapping of bench parameters")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return GenParams.model_validate(data)
    except ValidationError as e:
        raise DynamicCoveringError(f"{path}: {e}") from e
