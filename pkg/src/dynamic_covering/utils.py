import cProfile
import time
from collections.abc import Iterator
from contextlib import contextmanager
from functools import wraps

from dynamic_covering.boolmat import OpCounter, count_word_ops
from dynamic_covering.constants import Phase


def profile(func):
    @wraps(func)
    def wrapper(*args, **kwargs):
        profiler = cProfile.Profile()
        profiler.enable()
        try:
            result = func(*args, **kwargs)
        finally:
            profiler.disable()
            profiler.print_stats(sort="cumulative")
        return result

    return wrapper


@contextmanager
def timed_phase(
    phase: Phase, ops: dict[Phase, int], nanos: dict[Phase, int]
) -> Iterator[OpCounter]:
    """Add the wall time and word-op count of the block to ``phase``."""
    with count_word_ops() as counter:
        start = time.perf_counter_ns()
        try:
            yield counter
        finally:
            nanos[phase] = nanos.get(phase, 0) + time.perf_counter_ns() - start
            ops[phase] = ops.get(phase, 0) + counter.word_ops
