import logging
from collections.abc import Iterable

import numpy as np

from dynamic_covering.boolmat import BoolMatrix
from dynamic_covering.constants import ViolationKind
from dynamic_covering.errors import CoveringValidationError
from dynamic_covering.models import (
    CoveringElement,
    CoveringSpace,
    QuerySet,
    UpdateBatch,
    ValidationReport,
)

logger = logging.getLogger(__name__)


def validate(space: CoveringSpace) -> ValidationReport:
    """
    Check that every element is nonempty and the elements cover the universe.

    Name problems (duplicates, members outside the universe) are reported as
    well, since the matrix layout depends on unique, resolvable names.
    """
    report = ValidationReport()
    seen: set[str] = set()
    for name in space.objects:
        if name in seen:
            report.add(ViolationKind.DUPLICATE_OBJECT, name)
        seen.add(name)

    seen_elements: set[str] = set()
    covered: set[str] = set()
    for element in space.elements:
        if element.name in seen_elements:
            report.add(ViolationKind.DUPLICATE_ELEMENT, element.name)
        seen_elements.add(element.name)
        if not element.members:
            report.add(ViolationKind.EMPTY_ELEMENT, element.name)
        for member in element.members:
            if member not in space.object_index:
                report.add(
                    ViolationKind.UNKNOWN_MEMBER,
                    member,
                    f"element {element.name} lists unknown object {member}",
                )
        covered.update(element.members)

    for name in space.objects:
        if name not in covered:
            report.add(ViolationKind.UNCOVERED_OBJECT, name, f"{name} uncovered")
    if not report.ok:
        logger.debug("covering validation failed:\n%s", report.render())
    return report


def require_valid(space: CoveringSpace) -> None:
    report = validate(space)
    if not report.ok:
        raise CoveringValidationError(report)


def matrix_rep(space: CoveringSpace, check: bool = True) -> BoolMatrix:
    """The n x m membership matrix: entry (i, j) is 1 iff object i is in element j."""
    if check:
        require_valid(space)
    bits = np.zeros((space.n, space.m), dtype=bool)
    for j, element in enumerate(space.elements):
        for member in element.members:
            bits[space.index_of(member), j] = True
    return BoolMatrix.from_rows(bits, cols=space.m)


def resolve(space: CoveringSpace, query: QuerySet) -> list[int]:
    """Indices of the query's members, in universe order."""
    indices = [space.index_of(name) for name in query.members]
    return sorted(indices)


def char_vector(space: CoveringSpace, query: QuerySet) -> BoolMatrix:
    bits = np.zeros((space.n, 1), dtype=bool)
    for i in resolve(space, query):
        bits[i, 0] = True
    return BoolMatrix.from_rows(bits, cols=1)


def members_of(space: CoveringSpace, vector: BoolMatrix) -> tuple[str, ...]:
    """Names of the objects whose entry in a column vector is 1."""
    return tuple(space.objects[i] for i in np.flatnonzero(vector.to_array()[:, 0]))


def complement(space: CoveringSpace, query: QuerySet) -> QuerySet:
    for name in query.members:
        space.index_of(name)
    return QuerySet(members=frozenset(space.objects) - query.members)


def neighborhood(space: CoveringSpace, x: str) -> frozenset[str]:
    """Intersection of all elements containing ``x``."""
    space.index_of(x)
    containing = [frozenset(e.members) for e in space.elements if x in e.members]
    if not containing:
        # an uncovered object has no neighborhood in a covering; keep x in it
        return frozenset({x})
    return frozenset.intersection(*containing)


def neighborhoods(space: CoveringSpace) -> dict[str, frozenset[str]]:
    return {x: neighborhood(space, x) for x in space.objects}


def merge(space: CoveringSpace, batch: UpdateBatch) -> CoveringSpace:
    """
    The enlarged space: new objects appended, extended elements keep their
    position, new elements appended after the old ones.
    """
    elements: list[CoveringElement] = []
    for element in space.elements:
        extra = batch.extensions.get(element.name, ())
        if extra:
            element = CoveringElement(
                name=element.name, members=element.members + tuple(extra)
            )
        elements.append(element)
    elements.extend(batch.new_elements)
    return CoveringSpace(
        objects=space.objects + tuple(batch.new_objects), elements=tuple(elements)
    )


def space_from_matrix(
    objects: Iterable[str], element_names: Iterable[str], membership: BoolMatrix
) -> CoveringSpace:
    """Rebuild a space from names and its membership matrix."""
    objects = tuple(objects)
    element_names = tuple(element_names)
    bits = membership.to_array()
    elements = tuple(
        CoveringElement(
            name=name, members=tuple(objects[i] for i in np.flatnonzero(bits[:, j]))
        )
        for j, name in enumerate(element_names)
    )
    return CoveringSpace(objects=objects, elements=elements)
