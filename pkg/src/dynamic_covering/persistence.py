"""
Binary state files.

Layout, all integers little-endian::

    b"DCAS1"
    n: u32, m: u32
    n object names, m element names: u32 byte length + UTF-8 bytes each
    M (n rows), Gamma (n rows), Pi (n rows): rows of u64 words, padding zero
"""

import io
import logging
import os
import struct
import tempfile
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from dynamic_covering.boolmat import BoolMatrix, word_count
from dynamic_covering.characteristic import check_state
from dynamic_covering.constants import STATE_MAGIC, WORD_DTYPE, StrPath
from dynamic_covering.covering import space_from_matrix, validate
from dynamic_covering.errors import (
    BadMagicError,
    DynamicCoveringError,
    StateFormatError,
    StateInvariantError,
    TruncatedStateError,
)
from dynamic_covering.models import CharState

logger = logging.getLogger(__name__)

_U32 = struct.Struct("<I")

Sink = Union[StrPath, BinaryIO]
Source = Union[StrPath, BinaryIO, bytes]


def _encode_names(names: tuple[str, ...]) -> bytes:
    chunks = []
    for name in names:
        raw = name.encode("utf-8")
        chunks.append(_U32.pack(len(raw)))
        chunks.append(raw)
    return b"".join(chunks)


def state_to_bytes(state: CharState) -> bytes:
    parts = [
        STATE_MAGIC,
        _U32.pack(state.n),
        _U32.pack(state.m),
        _encode_names(state.space.objects),
        _encode_names(state.space.element_names),
        state.membership.to_bytes(),
        state.gamma.to_bytes(),
        state.pi.to_bytes(),
    ]
    return b"".join(parts)


class _Reader:
    def __init__(self, payload: bytes) -> None:
        self.payload = payload
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        available = len(self.payload) - self.offset
        if size > available:
            raise TruncatedStateError(what, size, available)
        chunk = self.payload[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def u32(self, what: str) -> int:
        return _U32.unpack(self.take(_U32.size, what))[0]

    def names(self, count: int, what: str) -> tuple[str, ...]:
        names = []
        for k in range(count):
            size = self.u32(f"{what} name {k} length")
            raw = self.take(size, f"{what} name {k}")
            try:
                names.append(raw.decode("utf-8"))
            except UnicodeDecodeError as e:
                raise StateFormatError(f"{what} name {k} is not UTF-8: {e}") from e
        return tuple(names)

    def matrix(self, rows: int, cols: int, what: str) -> BoolMatrix:
        size = rows * word_count(cols) * 8
        words = np.frombuffer(self.take(size, what), dtype=WORD_DTYPE)
        try:
            return BoolMatrix.from_words(rows, cols, words)
        except DynamicCoveringError as e:
            raise StateInvariantError(f"{what}: {e}") from e


def state_from_bytes(payload: bytes, trust: bool = False) -> CharState:
    reader = _Reader(payload)
    magic = reader.take(len(STATE_MAGIC), "magic")
    if magic != STATE_MAGIC:
        raise BadMagicError(magic)
    n = reader.u32("object count")
    m = reader.u32("element count")
    objects = reader.names(n, "object")
    elements = reader.names(m, "element")
    membership = reader.matrix(n, m, "M")
    gamma = reader.matrix(n, n, "gamma")
    pi = reader.matrix(n, n, "pi")
    if reader.offset != len(payload):
        raise StateFormatError(
            f"{len(payload) - reader.offset} trailing bytes after the pi matrix"
        )

    space = space_from_matrix(objects, elements, membership)
    report = validate(space)
    if not report.ok:
        raise StateInvariantError("stored covering is invalid:\n" + report.render())
    state = CharState(space=space, membership=membership, gamma=gamma, pi=pi)
    if trust:
        logger.warning("loaded state without re-deriving gamma and pi")
        return state
    divergent = check_state(state)
    if divergent:
        shown = ", ".join(f"{name}[{i},{j}]" for name, i, j in divergent[:10])
        raise StateInvariantError(
            f"stored matrices disagree with M at {shown}", entries=divergent
        )
    return state


def save_state(state: CharState, sink: Sink) -> int:
    """
    Write ``state`` to a path (atomically, via a temporary file in the same
    directory) or to an open binary stream. Returns the byte count.
    """
    payload = state_to_bytes(state)
    if isinstance(sink, (str, Path, os.PathLike)):
        path = Path(sink)
        with tempfile.NamedTemporaryFile(
            dir=path.parent, prefix=f".{path.name}.", delete=False
        ) as tmp:
            try:
                tmp.write(payload)
                tmp.flush()
                os.fsync(tmp.fileno())
            except OSError:
                os.unlink(tmp.name)
                raise
        os.replace(tmp.name, path)
        logger.info("saved state with %d objects to %s", state.n, path)
    else:
        sink.write(payload)
    return len(payload)


def load_state(source: Source, trust: bool = False) -> CharState:
    if isinstance(source, bytes):
        payload = source
    elif isinstance(source, (str, Path, os.PathLike)):
        payload = Path(source).read_bytes()
    elif isinstance(source, io.IOBase) or hasattr(source, "read"):
        payload = source.read()
    else:
        raise TypeError(f"cannot read a state from {type(source).__name__}")
    state = state_from_bytes(payload, trust=trust)
    logger.debug("loaded state with %d objects, %d elements", state.n, state.m)
    return state
