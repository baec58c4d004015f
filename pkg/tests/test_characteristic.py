import numpy as np
import pytest

from dynamic_covering.bench import gen_space
from dynamic_covering.boolmat import BoolMatrix, transpose
from dynamic_covering.characteristic import (
    approximate,
    approximate_all,
    build_char_state,
    check_state,
    second_approx,
    sixth_approx,
    verify_state,
)
from dynamic_covering.constants import ApproxOperator
from dynamic_covering.covering import complement, merge
from dynamic_covering.errors import CoveringValidationError, UnknownObjectError
from dynamic_covering.models import CoveringElement, CoveringSpace, GenParams, QuerySet
from tests.conftest import BASE_GAMMA, BASE_PI, GROWN_GAMMA, GROWN_PI


def names(result) -> set[str]:
    return set(result.members)


@pytest.fixture
def grown_state(base_space, growth_batch):
    return build_char_state(merge(base_space, growth_batch))


def test_base_characteristic_matrices(base_state):
    assert base_state.gamma.tolist() == BASE_GAMMA
    assert base_state.pi.tolist() == BASE_PI


def test_grown_characteristic_matrices(grown_state):
    assert grown_state.gamma.tolist() == GROWN_GAMMA
    assert grown_state.pi.tolist() == GROWN_PI


def test_partition_gives_identity():
    space = CoveringSpace(
        objects=("x1", "x2"),
        elements=(
            CoveringElement(name="C1", members=("x1",)),
            CoveringElement(name="C2", members=("x2",)),
        ),
    )
    state = build_char_state(space)
    assert state.gamma == BoolMatrix.identity(2)
    assert state.pi == BoolMatrix.identity(2)


def test_build_rejects_invalid_space():
    space = CoveringSpace(
        objects=("x1", "x2"), elements=(CoveringElement(name="C1", members=("x1",)),)
    )
    with pytest.raises(CoveringValidationError):
        build_char_state(space)


def test_second_approx_on_base_space(base_state):
    upper, lower = second_approx(base_state, QuerySet.of("x3", "x4"))
    assert names(upper) == {"x1", "x2", "x3", "x4"}
    assert names(lower) == {"x3"}
    assert upper.render() == "SH: {x1,x2,x3,x4}"
    assert lower.render() == "SL: {x3}"


def test_universe_is_fixed_by_both_pairs(base_state):
    universe = QuerySet(members=frozenset(base_state.space.objects))
    for result in second_approx(base_state, universe) + sixth_approx(
        base_state, universe
    ):
        assert names(result) == set(base_state.space.objects)


def test_empty_set_is_fixed_by_sixth_pair(base_state):
    upper, lower = sixth_approx(base_state, QuerySet())
    assert names(upper) == set()
    assert names(lower) == set()


def test_sixth_approx_after_growth(grown_state):
    upper, lower = sixth_approx(grown_state, QuerySet.of("x3", "x4", "x5"))
    assert names(upper) == {"x2", "x3", "x4", "x5"}
    assert names(lower) == {"x3", "x4", "x5"}
    assert upper.render_vector() == "XH: 011110"


def test_second_approx_after_growth_follows_element_lists(grown_state):
    # every element but C5 meets X, and every object lies in one of them
    upper, lower = second_approx(grown_state, QuerySet.of("x3", "x4", "x5"))
    assert names(upper) == set(grown_state.space.objects)
    assert names(lower) == set()


def test_approximate_dispatches_single_operators(base_state):
    query = QuerySet.of("x3", "x4")
    assert names(approximate(base_state, query, ApproxOperator.SL)) == {"x3"}
    assert names(approximate(base_state, query, ApproxOperator.IH)) == {
        "x1",
        "x2",
        "x3",
        "x4",
    }
    assert names(approximate(base_state, query, ApproxOperator.IL)) == {"x3", "x4"}


def test_approximate_all_order(base_state):
    results = approximate_all(base_state, QuerySet())
    assert [r.operator for r in results] == list(ApproxOperator)
    assert all(not r.members for r in results)


def test_unknown_query_name(base_state):
    with pytest.raises(UnknownObjectError):
        second_approx(base_state, QuerySet.of("x42"))


def test_check_state_lists_divergent_entries(base_state):
    assert check_state(base_state) == []
    bits = base_state.gamma.to_array()
    bits[0, 2] = True
    broken = base_state.model_copy(update={"gamma": BoolMatrix.from_rows(bits)})
    assert check_state(broken) == [("gamma", 0, 2)]


def test_verify_state_names_flipped_entry(base_state):
    assert all(check.passed for check in verify_state(base_state))
    bits = base_state.pi.to_array()
    bits[3, 0] = True
    broken = base_state.model_copy(update={"pi": BoolMatrix.from_rows(bits)})
    failed = [check for check in verify_state(broken) if not check.passed]
    assert failed
    assert "pi[x4,x1]" in failed[0].detail


def random_spaces(count: int):
    rng = np.random.default_rng(11)
    for k in range(count):
        params = GenParams(
            n=int(rng.integers(1, 11)),
            m=int(rng.integers(1, 7)),
            density=float(rng.uniform(0.1, 0.7)),
            seed=k,
        )
        yield gen_space(params)


def pick(space: CoveringSpace, rng, p: float = 0.5) -> frozenset[str]:
    return frozenset(x for x in space.objects if rng.random() < p)


def subsets_of(space: CoveringSpace, rng):
    for x in space.objects:
        yield QuerySet.of(x)
    for _ in range(20):
        yield QuerySet(members=pick(space, rng))


def test_structural_properties():
    rng = np.random.default_rng(5)
    for space in random_spaces(60):
        state = build_char_state(space)
        assert state.gamma == transpose(state.gamma)
        assert state.gamma.to_array().diagonal().all()
        assert state.pi.to_array().diagonal().all()
        for query in subsets_of(space, rng):
            sh, sl = second_approx(state, query)
            xh, xl = sixth_approx(state, query)
            # the lower approximation is the dual of the upper one
            dual = second_approx(state, complement(space, query))[0]
            assert names(sl) == set(space.objects) - names(dual)
            assert names(xl) <= query.members <= names(xh)
            assert names(sl) <= query.members <= names(sh)


def test_monotone_in_the_query():
    rng = np.random.default_rng(9)
    for space in random_spaces(40):
        state = build_char_state(space)
        for small in subsets_of(space, rng):
            extra = pick(space, rng, 0.3)
            large = QuerySet(members=small.members | extra)
            pairs_small = second_approx(state, small) + sixth_approx(state, small)
            pairs_large = second_approx(state, large) + sixth_approx(state, large)
            for lo, hi in zip(pairs_small, pairs_large):
                assert names(lo) <= names(hi)
