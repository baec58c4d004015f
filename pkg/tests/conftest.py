from pathlib import Path

import pytest

from dynamic_covering.characteristic import build_char_state
from dynamic_covering.io import parse_batch, parse_covering
from dynamic_covering.models import CharState, CoveringSpace, UpdateBatch
from dynamic_covering.persistence import save_state

BASE_COVERING = """\
# four objects, three elements
objects: x1 x2 x3 x4
element C1: x1 x4
element C2: x1 x2 x4
element C3: x3 x4
"""

GROWTH_BATCH = """\
add-objects: x5 x6
extend C1: x5
extend C2: x5
new C4: x3 x5 x6
new C5: x1 x6
"""

BASE_GAMMA = [[1, 1, 0, 1], [1, 1, 0, 1], [0, 0, 1, 1], [1, 1, 1, 1]]
BASE_PI = [[1, 0, 0, 1], [1, 1, 0, 1], [0, 0, 1, 1], [0, 0, 0, 1]]

GROWN_MEMBERSHIP = [
    [1, 1, 0, 0, 1],
    [0, 1, 0, 0, 0],
    [0, 0, 1, 1, 0],
    [1, 1, 1, 0, 0],
    [1, 1, 0, 1, 0],
    [0, 0, 0, 1, 1],
]
# derived from the element lists above, entry by entry
GROWN_GAMMA = [
    [1, 1, 0, 1, 1, 1],
    [1, 1, 0, 1, 1, 0],
    [0, 0, 1, 1, 1, 1],
    [1, 1, 1, 1, 1, 0],
    [1, 1, 1, 1, 1, 1],
    [1, 0, 1, 0, 1, 1],
]
GROWN_PI = [
    [1, 0, 0, 0, 0, 0],
    [1, 1, 0, 1, 1, 0],
    [0, 0, 1, 0, 0, 0],
    [0, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 1],
]


@pytest.fixture
def base_space() -> CoveringSpace:
    return parse_covering(BASE_COVERING)


@pytest.fixture
def growth_batch() -> UpdateBatch:
    return parse_batch(GROWTH_BATCH)


@pytest.fixture
def base_state(base_space) -> CharState:
    return build_char_state(base_space)


@pytest.fixture
def covering_file(tmp_path) -> Path:
    path = tmp_path / "covering.txt"
    path.write_text(BASE_COVERING, encoding="utf-8")
    return path


@pytest.fixture
def batch_file(tmp_path) -> Path:
    path = tmp_path / "batch.txt"
    path.write_text(GROWTH_BATCH, encoding="utf-8")
    return path


@pytest.fixture
def state_file(tmp_path, base_state) -> Path:
    path = tmp_path / "base.dcas"
    save_state(base_state, path)
    return path
