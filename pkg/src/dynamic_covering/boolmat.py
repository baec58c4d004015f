"""
Bit-packed Boolean matrices.

Rows are stored as little-endian 64-bit words, row-major; column ``j`` of a
row lives in word ``j // 64`` at bit ``j % 64``. Bits past the last column
are always zero. Matrices are immutable once built.
"""

import logging
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field
from typing import Any, Optional, Union

import numpy as np
import numpy.typing as npt

from dynamic_covering.constants import ALL_ONES_WORD, WORD_BITS, WORD_DTYPE
from dynamic_covering.errors import DimensionError, DynamicCoveringError

logger = logging.getLogger(__name__)

WordArray = npt.NDArray[Any]
BitsLike = Union[Sequence[Sequence[int]], npt.ArrayLike]

# rows per slab in the pairwise kernels, bounds the (rows, p, words) temporary
_PAIRWISE_CHUNK = 256


def word_count(cols: int) -> int:
    return (cols + WORD_BITS - 1) // WORD_BITS


def tail_mask(cols: int) -> int:
    """Mask of the used bits in the last word of a row with ``cols`` columns."""
    rem = cols % WORD_BITS
    return ALL_ONES_WORD if rem == 0 else (1 << rem) - 1


def _pack(bits: npt.ArrayLike) -> WordArray:
    bits = np.asarray(bits, dtype=bool)
    rows, cols = bits.shape
    words = word_count(cols)
    if words == 0:
        return np.zeros((rows, 0), dtype=WORD_DTYPE)
    out = np.zeros((rows, words * 8), dtype=np.uint8)
    if rows:
        packed = np.packbits(bits, axis=1, bitorder="little")
        out[:, : packed.shape[1]] = packed
    return out.view(WORD_DTYPE)


def _unpack(data: WordArray, cols: int) -> npt.NDArray[np.bool_]:
    rows = data.shape[0]
    if rows == 0 or cols == 0:
        return np.zeros((rows, cols), dtype=bool)
    as_bytes = np.ascontiguousarray(data, dtype=WORD_DTYPE).view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=1, count=cols, bitorder="little")
    return bits.astype(bool)


def _clear_padding(data: WordArray, cols: int) -> WordArray:
    if data.shape[1]:
        data[:, -1] &= np.array(tail_mask(cols), dtype=WORD_DTYPE)
    return data


@dataclass
class OpCounter:
    """Accumulates the modeled word-operation cost of kernel calls."""

    word_ops: int = 0
    by_kernel: dict[str, int] = field(default_factory=dict)

    def add(self, kernel: str, ops: int) -> None:
        self.word_ops += ops
        self.by_kernel[kernel] = self.by_kernel.get(kernel, 0) + ops


_ACTIVE_COUNTERS: ContextVar[tuple[OpCounter, ...]] = ContextVar(
    "active_op_counters", default=()
)


@contextmanager
def count_word_ops(counter: Optional[OpCounter] = None) -> Iterator[OpCounter]:
    """
    Count word operations of every kernel run inside the block.

    Counters nest: an outer counter also sees the work of inner blocks.
    """
    counter = counter if counter is not None else OpCounter()
    token = _ACTIVE_COUNTERS.set(_ACTIVE_COUNTERS.get() + (counter,))
    try:
        yield counter
    finally:
        _ACTIVE_COUNTERS.reset(token)


def _tally(kernel: str, ops: int) -> None:
    for counter in _ACTIVE_COUNTERS.get():
        counter.add(kernel, ops)


@dataclass(frozen=True, eq=False, repr=False)
class BoolMatrix:
    rows: int
    cols: int
    data: WordArray

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise DynamicCoveringError(
                f"negative matrix shape {self.rows}x{self.cols}"
            )
        data = np.ascontiguousarray(self.data, dtype=WORD_DTYPE)
        if data.shape != (self.rows, word_count(self.cols)):
            raise DynamicCoveringError(
                f"word array of shape {data.shape} does not hold a "
                f"{self.rows}x{self.cols} matrix"
            )
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        if not self.padding_is_clean():
            raise DynamicCoveringError("padding bits beyond the last column are set")

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BoolMatrix":
        return cls(rows, cols, np.zeros((rows, word_count(cols)), dtype=WORD_DTYPE))

    @classmethod
    def ones(cls, rows: int, cols: int) -> "BoolMatrix":
        data = np.full((rows, word_count(cols)), ALL_ONES_WORD, dtype=WORD_DTYPE)
        return cls(rows, cols, _clear_padding(data, cols))

    @classmethod
    def identity(cls, n: int) -> "BoolMatrix":
        return cls.from_rows(np.eye(n, dtype=bool))

    @classmethod
    def from_rows(cls, rows: BitsLike, cols: Optional[int] = None) -> "BoolMatrix":
        """
        Build from nested 0/1 sequences or a 2-D array.

        ``cols`` is only needed for an empty row list.
        """
        bits = np.asarray(rows)
        if bits.size == 0:
            n = bits.shape[0] if bits.ndim >= 1 else 0
            if cols is None:
                cols = bits.shape[1] if bits.ndim == 2 else 0
            return cls.zeros(n, cols)
        if bits.ndim != 2:
            raise DynamicCoveringError(f"expected a 2-D 0/1 array, got {bits.ndim}-D")
        if not np.isin(bits, (0, 1)).all():
            raise DynamicCoveringError("matrix entries must be 0 or 1")
        bits = bits.astype(bool)
        _tally("pack", bits.shape[0] * word_count(bits.shape[1]))
        return cls(bits.shape[0], bits.shape[1], _pack(bits))

    @classmethod
    def from_words(cls, rows: int, cols: int, words: npt.ArrayLike) -> "BoolMatrix":
        data = np.array(words, dtype=WORD_DTYPE, copy=True)
        data = data.reshape(rows, word_count(cols))
        return cls(rows, cols, data)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def words_per_row(self) -> int:
        return self.data.shape[1]

    @property
    def T(self) -> "BoolMatrix":
        return transpose(self)

    def padding_is_clean(self) -> bool:
        if self.words_per_row == 0 or self.cols % WORD_BITS == 0:
            return True
        spare = np.array(~tail_mask(self.cols) & ALL_ONES_WORD, dtype=WORD_DTYPE)
        return not bool((self.data[:, -1] & spare).any())

    def entry(self, i: int, j: int) -> int:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"entry ({i}, {j}) outside {self.rows}x{self.cols}")
        word = int(self.data[i, j // WORD_BITS])
        return (word >> (j % WORD_BITS)) & 1

    def row_members(self, i: int) -> list[int]:
        row = _unpack(self.data[i : i + 1], self.cols)[0]
        return [int(j) for j in np.flatnonzero(row)]

    def to_array(self) -> npt.NDArray[np.bool_]:
        return _unpack(self.data, self.cols)

    def tolist(self) -> list[list[int]]:
        return self.to_array().astype(int).tolist()

    def to_bytes(self) -> bytes:
        return self.data.astype(WORD_DTYPE, copy=False).tobytes()

    def count_ones(self) -> int:
        return int(self.to_array().sum())

    def density(self) -> float:
        cells = self.rows * self.cols
        return self.count_ones() / cells if cells else 0.0

    def take_rows(self, start: int, stop: int) -> "BoolMatrix":
        return BoolMatrix(stop - start, self.cols, self.data[start:stop].copy())

    def take_cols(self, start: int, stop: int) -> "BoolMatrix":
        if start % WORD_BITS == 0 and stop == self.cols:
            first = start // WORD_BITS
            return BoolMatrix(self.rows, stop - start, self.data[:, first:].copy())
        return BoolMatrix.from_rows(
            self.to_array()[:, start:stop], cols=max(stop - start, 0)
        )

    def complement(self) -> "BoolMatrix":
        data = _clear_padding(~self.data, self.cols)
        _tally("complement", self.rows * self.words_per_row)
        return BoolMatrix(self.rows, self.cols, data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BoolMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.data, other.data)

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.to_bytes()))

    def __le__(self, other: "BoolMatrix") -> bool:
        _require_same_shape("entrywise comparison", self, other)
        return not bool((self.data & ~other.data).any())

    def __or__(self, other: "BoolMatrix") -> "BoolMatrix":
        return elementwise_or(self, other)

    def __and__(self, other: "BoolMatrix") -> "BoolMatrix":
        return elementwise_and(self, other)

    def __str__(self) -> str:
        return "\n".join("".join(str(b) for b in row) for row in self.tolist())

    def __repr__(self) -> str:
        return f"BoolMatrix({self.rows}x{self.cols}, {self.tolist()})"


def _require_same_shape(operation: str, a: BoolMatrix, b: BoolMatrix) -> None:
    if a.shape != b.shape:
        raise DimensionError(operation, a.shape, b.shape)


def transpose(a: BoolMatrix) -> BoolMatrix:
    _tally("transpose", a.cols * word_count(a.rows))
    return BoolMatrix(a.cols, a.rows, _pack(a.to_array().T))


def elementwise_or(a: BoolMatrix, b: BoolMatrix) -> BoolMatrix:
    _require_same_shape("elementwise_or", a, b)
    _tally("elementwise", a.rows * a.words_per_row)
    return BoolMatrix(a.rows, a.cols, a.data | b.data)


def elementwise_and(a: BoolMatrix, b: BoolMatrix) -> BoolMatrix:
    _require_same_shape("elementwise_and", a, b)
    _tally("elementwise", a.rows * a.words_per_row)
    return BoolMatrix(a.rows, a.cols, a.data & b.data)


def _reduce_rows(a: BoolMatrix, b: BoolMatrix, meet: bool) -> BoolMatrix:
    """
    Row-reduce kernel: output row i folds the rows k of ``b`` with a[i, k] = 1.

    Folding is OR for the Boolean product and AND for the odot product,
    starting from all-zeros and all-ones respectively.
    """
    n, p = a.rows, b.cols
    _tally("row_reduce", n * a.cols * b.words_per_row)
    if meet:
        out = np.full((n, b.words_per_row), ALL_ONES_WORD, dtype=WORD_DTYPE)
    else:
        out = np.zeros((n, b.words_per_row), dtype=WORD_DTYPE)
    a_bits = a.to_array()
    for k in range(a.cols):
        selected = a_bits[:, k]
        if not selected.any():
            continue
        if meet:
            out[selected] &= b.data[k]
        else:
            out[selected] |= b.data[k]
    return BoolMatrix(n, p, _clear_padding(out, p))


def _pairwise_rows(a: BoolMatrix, bt: BoolMatrix, meet: bool) -> BoolMatrix:
    """
    Pairwise kernel over rows of ``a`` and rows of ``bt`` (the columns of B).

    Entry (i, j) is ``any(a_i & bt_j)`` for the Boolean product and
    ``not any(a_i & ~bt_j)`` for the odot product.
    """
    n, p = a.rows, bt.rows
    _tally("pairwise", n * p * a.words_per_row)
    bits = np.zeros((n, p), dtype=bool)
    other = ~bt.data if meet else bt.data
    for start in range(0, n, _PAIRWISE_CHUNK):
        block = a.data[start : start + _PAIRWISE_CHUNK]
        hits = block[:, None, :] & other[None, :, :]
        if meet:
            bits[start : start + _PAIRWISE_CHUNK] = ~hits.any(axis=2)
        else:
            bits[start : start + _PAIRWISE_CHUNK] = hits.any(axis=2)
    return BoolMatrix(n, p, _pack(bits))


def _reduce_cost(n: int, m: int, p: int) -> int:
    return n * m * word_count(p)


def _pairwise_cost(n: int, m: int, p: int) -> int:
    return n * p * word_count(m)


def _product(
    name: str, a: BoolMatrix, b: BoolMatrix, meet: bool, b_is_transposed: bool
) -> BoolMatrix:
    inner = b.cols if b_is_transposed else b.rows
    if a.cols != inner:
        right = (b.cols, b.rows) if b_is_transposed else b.shape
        raise DimensionError(name, a.shape, right)
    n, m = a.shape
    p = b.rows if b_is_transposed else b.cols
    # the kernel whose operand is not already in row form pays for a transpose
    reduce_cost = _reduce_cost(n, m, p) + (m * word_count(p) if b_is_transposed else 0)
    pair_cost = _pairwise_cost(n, m, p) + (0 if b_is_transposed else p * word_count(m))
    if pair_cost < reduce_cost:
        logger.debug("%s %dx%dx%d: pairwise kernel", name, n, m, p)
        bt = b if b_is_transposed else transpose(b)
        return _pairwise_rows(a, bt, meet)
    logger.debug("%s %dx%dx%d: row-reduce kernel", name, n, m, p)
    rows_b = transpose(b) if b_is_transposed else b
    return _reduce_rows(a, rows_b, meet)


def bool_product(a: BoolMatrix, b: BoolMatrix) -> BoolMatrix:
    """Boolean product: entry (i, j) is 1 iff a[i, k] = b[k, j] = 1 for some k."""
    return _product("bool_product", a, b, meet=False, b_is_transposed=False)


def odot_product(a: BoolMatrix, b: BoolMatrix) -> BoolMatrix:
    """Implication product: entry (i, j) is 1 iff a[i, k] <= b[k, j] for all k."""
    return _product("odot_product", a, b, meet=True, b_is_transposed=False)


def bool_gram(a: BoolMatrix, b: BoolMatrix) -> BoolMatrix:
    """``bool_product(a, transpose(b))`` with ``b`` given as rows."""
    return _product("bool_gram", a, b, meet=False, b_is_transposed=True)


def odot_gram(a: BoolMatrix, b: BoolMatrix) -> BoolMatrix:
    """``odot_product(a, transpose(b))`` with ``b`` given as rows."""
    return _product("odot_gram", a, b, meet=True, b_is_transposed=True)


def block_compose(
    top_left: BoolMatrix,
    top_right: BoolMatrix,
    bottom_left: BoolMatrix,
    bottom_right: BoolMatrix,
) -> BoolMatrix:
    if (
        top_left.rows != top_right.rows
        or bottom_left.rows != bottom_right.rows
        or top_left.cols != bottom_left.cols
        or top_right.cols != bottom_right.cols
    ):
        raise DimensionError(
            "block_compose",
            (top_left.rows + bottom_left.rows, top_left.cols + top_right.cols),
            (top_right.rows + bottom_right.rows, bottom_left.cols + bottom_right.cols),
        )
    rows = top_left.rows + bottom_left.rows
    cols = top_left.cols + top_right.cols
    bits = np.zeros((rows, cols), dtype=bool)
    bits[: top_left.rows, : top_left.cols] = top_left.to_array()
    bits[: top_left.rows, top_left.cols :] = top_right.to_array()
    bits[top_left.rows :, : top_left.cols] = bottom_left.to_array()
    bits[top_left.rows :, top_left.cols :] = bottom_right.to_array()
    _tally("block_compose", rows * word_count(cols))
    return BoolMatrix(rows, cols, _pack(bits))


def diff_entries(a: BoolMatrix, b: BoolMatrix) -> list[tuple[int, int]]:
    _require_same_shape("diff_entries", a, b)
    return [(int(i), int(j)) for i, j in np.argwhere(a.to_array() != b.to_array())]
