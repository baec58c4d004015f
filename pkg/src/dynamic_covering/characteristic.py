import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from dynamic_covering import oracle
from dynamic_covering.boolmat import (
    BoolMatrix,
    bool_gram,
    bool_product,
    diff_entries,
    odot_gram,
    odot_product,
)
from dynamic_covering.constants import VERIFY_QUERY_COUNT, ApproxOperator, MatrixName
from dynamic_covering.covering import (
    char_vector,
    matrix_rep,
    members_of,
    require_valid,
)
from dynamic_covering.models import (
    ApproxResult,
    CharState,
    CoveringSpace,
    QuerySet,
    VerifyCheck,
)

logger = logging.getLogger(__name__)


@dataclass
class CharStateBuilder:
    """Builds M, Gamma = M . M^T and Pi = M (.) M^T for a valid space."""

    space: CoveringSpace
    membership: Optional[BoolMatrix] = field(default=None)

    def build(self) -> CharState:
        require_valid(self.space)
        membership = self.membership
        if membership is None:
            membership = matrix_rep(self.space, check=False)
        gamma = bool_gram(membership, membership)
        pi = odot_gram(membership, membership)
        logger.debug(
            "built characteristic matrices for %d objects, %d elements",
            self.space.n,
            self.space.m,
        )
        return CharState(space=self.space, membership=membership, gamma=gamma, pi=pi)


def build_char_state(space: CoveringSpace) -> CharState:
    return CharStateBuilder(space).build()


def _result(
    state: CharState, operator: ApproxOperator, query: QuerySet, vector: BoolMatrix
) -> ApproxResult:
    return ApproxResult(
        operator=operator,
        query=query,
        vector=vector,
        members=members_of(state.space, vector),
    )


def _matrix_pair(
    state: CharState,
    matrix: BoolMatrix,
    query: QuerySet,
    upper: ApproxOperator,
    lower: ApproxOperator,
) -> tuple[ApproxResult, ApproxResult]:
    chi = char_vector(state.space, query)
    return (
        _result(state, upper, query, bool_product(matrix, chi)),
        _result(state, lower, query, odot_product(matrix, chi)),
    )


def second_approx(
    state: CharState, query: QuerySet
) -> tuple[ApproxResult, ApproxResult]:
    """SH and SL through the type-1 characteristic matrix."""
    return _matrix_pair(
        state, state.gamma, query, ApproxOperator.SH, ApproxOperator.SL
    )


def sixth_approx(
    state: CharState, query: QuerySet
) -> tuple[ApproxResult, ApproxResult]:
    """XH and XL through the type-2 characteristic matrix."""
    return _matrix_pair(state, state.pi, query, ApproxOperator.XH, ApproxOperator.XL)


def _fifth_approx(
    state: CharState, query: QuerySet
) -> tuple[ApproxResult, ApproxResult]:
    # no matrix form for the fifth pair: answer from the set definitions
    upper, lower = oracle.oracle_fifth(state.space, query)
    return (
        _result(state, ApproxOperator.IH, query, _vector_of(state, upper)),
        _result(state, ApproxOperator.IL, query, _vector_of(state, lower)),
    )


def _vector_of(state: CharState, members: frozenset[str]) -> BoolMatrix:
    return char_vector(state.space, QuerySet(members=members))


def approximate(
    state: CharState, query: QuerySet, operator: ApproxOperator
) -> ApproxResult:
    if not operator.has_matrix_form:
        pair = _fifth_approx(state, query)
    elif operator in (ApproxOperator.SH, ApproxOperator.SL):
        pair = second_approx(state, query)
    else:
        pair = sixth_approx(state, query)
    return pair[0] if operator.is_upper else pair[1]


def approximate_all(state: CharState, query: QuerySet) -> list[ApproxResult]:
    sh, sl = second_approx(state, query)
    xh, xl = sixth_approx(state, query)
    ih, il = _fifth_approx(state, query)
    return [sh, sl, xh, xl, ih, il]


def check_state(state: CharState) -> list[tuple[str, int, int]]:
    """
    Re-derive Gamma and Pi from M and list every stored entry that differs.

    An empty list means the state is consistent.
    """
    expected_shape = (state.n, state.n)
    if state.membership.shape != (state.n, state.m):
        return [(MatrixName.M.value, -1, -1)]
    divergent: list[tuple[str, int, int]] = []
    for name, stored, derived in (
        (MatrixName.GAMMA, state.gamma, bool_gram),
        (MatrixName.PI, state.pi, odot_gram),
    ):
        if stored.shape != expected_shape:
            divergent.append((name.value, -1, -1))
            continue
        fresh = derived(state.membership, state.membership)
        divergent.extend((name.value, i, j) for i, j in diff_entries(stored, fresh))
    return divergent


def _entry_names(
    state: CharState, name: str, entries: list[tuple[int, int]], limit: int = 10
) -> str:
    objects = state.space.objects
    shown = ", ".join(f"{name}[{objects[i]},{objects[j]}]" for i, j in entries[:limit])
    more = len(entries) - limit
    return shown + (f" and {more} more" if more > 0 else "")


def _matrix_check(
    state: CharState,
    check: str,
    name: MatrixName,
    stored: BoolMatrix,
    fresh: BoolMatrix,
) -> VerifyCheck:
    if stored.shape != fresh.shape:
        return VerifyCheck(
            name=check,
            passed=False,
            detail=f"{name.value} is {stored.shape}, expected {fresh.shape}",
        )
    entries = diff_entries(stored, fresh)
    if not entries:
        return VerifyCheck(name=check, passed=True)
    return VerifyCheck(
        name=check,
        passed=False,
        detail="differs at " + _entry_names(state, name.value, entries),
    )


def verify_state(
    state: CharState, queries: int = VERIFY_QUERY_COUNT, seed: int = 0
) -> list[VerifyCheck]:
    """
    Re-derive Gamma and Pi from M and from the set definitions, then run
    ``queries`` random query sets through the matrix and set paths.
    """
    membership = state.membership
    oracle_gamma, oracle_pi = oracle.oracle_char_matrices(state.space)
    gamma, pi = MatrixName.GAMMA, MatrixName.PI
    checks = [
        _matrix_check(
            state, "gamma from M", gamma, state.gamma, bool_gram(membership, membership)
        ),
        _matrix_check(
            state, "pi from M", pi, state.pi, odot_gram(membership, membership)
        ),
        _matrix_check(state, "gamma by definition", gamma, state.gamma, oracle_gamma),
        _matrix_check(state, "pi by definition", pi, state.pi, oracle_pi),
    ]

    rng = np.random.default_rng(seed)
    objects = state.space.objects
    for k in range(queries):
        picked = rng.random(state.n) < 0.5
        query = QuerySet(members=frozenset(objects[i] for i in np.flatnonzero(picked)))
        expected = oracle.oracle_second(state.space, query) + oracle.oracle_sixth(
            state.space, query
        )
        got = second_approx(state, query) + sixth_approx(state, query)
        wrong = [
            result.operator.value
            for result, want in zip(got, expected)
            if frozenset(result.members) != want
        ]
        detail = f"{','.join(wrong)} differ from the set definitions" if wrong else None
        checks.append(
            VerifyCheck(
                name=f"query {k + 1} ({len(query)} objects)",
                passed=not wrong,
                detail=detail,
            )
        )
    passed = sum(check.passed for check in checks)
    logger.info("verify: %d of %d checks passed", passed, len(checks))
    return checks
