"""
Set-theoretic reference implementations of the approximation operators.

Everything here works on plain Python sets with naive loops and shares no
code with the bit-packed path, so the two can be checked against each other.
"""

from dynamic_covering.boolmat import BoolMatrix
from dynamic_covering.covering import require_valid
from dynamic_covering.errors import UnknownObjectError
from dynamic_covering.models import CoveringSpace, QuerySet

SetPair = tuple[frozenset[str], frozenset[str]]


def _query_members(space: CoveringSpace, query: QuerySet) -> frozenset[str]:
    universe = set(space.objects)
    for name in sorted(query.members):
        if name not in universe:
            raise UnknownObjectError(name)
    return frozenset(query.members)


def _neighborhood(space: CoveringSpace, x: str) -> frozenset[str]:
    result = set(space.objects)
    for element in space.elements:
        if x in element.members:
            result &= set(element.members)
    return frozenset(result)


def _second_upper(space: CoveringSpace, members: frozenset[str]) -> frozenset[str]:
    result: set[str] = set()
    for element in space.elements:
        if any(x in members for x in element.members):
            result.update(element.members)
    return frozenset(result)


def oracle_second(space: CoveringSpace, query: QuerySet) -> SetPair:
    """SH is the union of elements meeting X; SL is the dual of SH."""
    members = _query_members(space, query)
    upper = _second_upper(space, members)
    outside = frozenset(space.objects) - members
    lower = frozenset(space.objects) - _second_upper(space, outside)
    return upper, lower


def oracle_fifth(space: CoveringSpace, query: QuerySet) -> SetPair:
    """Unions of the neighborhoods meeting X and of those contained in X."""
    members = _query_members(space, query)
    upper: set[str] = set()
    lower: set[str] = set()
    for x in space.objects:
        hood = _neighborhood(space, x)
        if hood & members:
            upper |= hood
        if hood <= members:
            lower |= hood
    return frozenset(upper), frozenset(lower)


def oracle_sixth(space: CoveringSpace, query: QuerySet) -> SetPair:
    """Objects whose neighborhood meets X, and those whose neighborhood lies in X."""
    members = _query_members(space, query)
    upper = set()
    lower = set()
    for x in space.objects:
        hood = _neighborhood(space, x)
        if hood & members:
            upper.add(x)
        if hood <= members:
            lower.add(x)
    return frozenset(upper), frozenset(lower)


def oracle_char_matrices(space: CoveringSpace) -> tuple[BoolMatrix, BoolMatrix]:
    """
    Gamma and Pi from their entrywise meaning.

    Gamma(i, j) = 1 iff some element holds both x_i and x_j;
    Pi(i, j) = 1 iff x_j lies in the neighborhood of x_i.
    """
    require_valid(space)
    gamma = []
    pi = []
    for xi in space.objects:
        hood = _neighborhood(space, xi)
        gamma_row = []
        pi_row = []
        for xj in space.objects:
            shared = any(
                xi in element.members and xj in element.members
                for element in space.elements
            )
            gamma_row.append(1 if shared else 0)
            pi_row.append(1 if xj in hood else 0)
        gamma.append(gamma_row)
        pi.append(pi_row)
    n = space.n
    return BoolMatrix.from_rows(gamma, cols=n), BoolMatrix.from_rows(pi, cols=n)
