import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from typing import Union

import tqdm
import yaml

from dynamic_covering.boolmat import (
    BoolMatrix,
    OpCounter,
    block_compose,
    bool_gram,
    bool_product,
    count_word_ops,
    elementwise_and,
    elementwise_or,
    odot_gram,
    odot_product,
    transpose,
)
from dynamic_covering.characteristic import (
    approximate,
    approximate_all,
    build_char_state,
    check_state,
    second_approx,
    sixth_approx,
)
from dynamic_covering.constants import Algorithm, ApproxOperator, Phase, StrPath
from dynamic_covering.covering import (
    char_vector,
    matrix_rep,
    merge,
    neighborhood,
    validate,
)
from dynamic_covering.errors import (
    BatchValidationError,
    CoveringParseError,
    CoveringValidationError,
    DimensionError,
    DynamicCoveringError,
    NameCollisionError,
    StateFormatError,
    TripwireError,
    UnknownObjectError,
)
from dynamic_covering.incremental import (
    apply_update,
    gamma_deltas,
    merge_batches,
    pi_deltas,
    update_gamma,
    update_pi,
    validate_batch,
)
from dynamic_covering.io import read_batch, read_covering
from dynamic_covering.models import (
    ApproxResult,
    BenchRecord,
    CharState,
    CoveringElement,
    CoveringSpace,
    GenParams,
    QuerySet,
    UpdateBatch,
)
from dynamic_covering.oracle import oracle_fifth, oracle_second, oracle_sixth
from dynamic_covering.persistence import load_state, save_state


class YAMLformatter(logging.Formatter):
    def __init__(self, *arg, **kwargs) -> None:
        yaml.SafeDumper.add_representer(str, self.str_representer)
        super().__init__(*arg, **kwargs)

    COLORS = {
        "DEBUG": "\033[95m",  # Purple
        "INFO": "\033[92m",  # Green
        "WARNING": "\033[93m",  # Yellow
        "ERROR": "\033[91m",  # Red
        "CRITICAL": "\033[95m",  # Magenta
    }
    RESET = "\033[0m"

    def str_representer(self, dumper, data):
        # block style for multi-line messages such as validation reports
        if "\n" in data:
            return dumper.represent_scalar("tag:yaml.org,2002:str", data, style="|")
        return dumper.represent_scalar("tag:yaml.org,2002:str", data)

    def format(self, record):
        if record.levelno != logging.INFO:
            log_record = {
                "level": record.levelname,
                "timestamp": self.formatTime(record, self.datefmt),
                "pathname": f"{record.pathname}:{record.lineno}",
                "logger_name": record.name,
                "function": record.funcName,
                "message": record.getMessage(),
            }
        else:
            log_record = {
                "level": record.levelname,
                "timestamp": self.formatTime(record, self.datefmt),
                "message": record.getMessage(),
            }

        msg: str = yaml.safe_dump(log_record, default_flow_style=False, sort_keys=False)
        if record.levelname in self.COLORS:
            msg = f"{self.COLORS[record.levelname]}{msg}{self.RESET}"
        return msg


class TqdmLoggingHandler(logging.Handler):
    def __init__(self, level=logging.NOTSET):
        super().__init__(level)
        self.setFormatter(YAMLformatter())

    def emit(self, record: logging.LogRecord) -> None:
        try:
            msg = self.format(record)
            tqdm.tqdm.write(msg, file=sys.stderr)
            self.flush()
        except Exception:
            self.handleError(record)


logging.basicConfig(level=logging.INFO)
for handler in logging.getLogger().handlers:
    handler.setFormatter(YAMLformatter())

logging.getLogger("dynamic_covering").setLevel(logging.INFO)


def set_logging_level(level: Union[int, str]) -> None:
    logging.getLogger("dynamic_covering").setLevel(level)


@contextmanager
def route_logs_through_tqdm() -> Iterator[None]:
    """Send package log records through ``tqdm.write`` while the block runs."""
    package_logger = logging.getLogger("dynamic_covering")
    handler = TqdmLoggingHandler()
    propagate = package_logger.propagate
    package_logger.addHandler(handler)
    package_logger.propagate = False
    try:
        yield
    finally:
        package_logger.removeHandler(handler)
        package_logger.propagate = propagate


__all__ = [
    "set_logging_level",
    "route_logs_through_tqdm",
    "YAMLformatter",
    "TqdmLoggingHandler",
    "StrPath",
    "Algorithm",
    "ApproxOperator",
    "Phase",
    "BoolMatrix",
    "OpCounter",
    "count_word_ops",
    "bool_product",
    "odot_product",
    "bool_gram",
    "odot_gram",
    "transpose",
    "elementwise_or",
    "elementwise_and",
    "block_compose",
    "CoveringElement",
    "CoveringSpace",
    "QuerySet",
    "UpdateBatch",
    "CharState",
    "ApproxResult",
    "GenParams",
    "BenchRecord",
    "validate",
    "matrix_rep",
    "char_vector",
    "neighborhood",
    "merge",
    "build_char_state",
    "second_approx",
    "sixth_approx",
    "approximate",
    "approximate_all",
    "check_state",
    "oracle_second",
    "oracle_fifth",
    "oracle_sixth",
    "validate_batch",
    "gamma_deltas",
    "pi_deltas",
    "update_gamma",
    "update_pi",
    "apply_update",
    "merge_batches",
    "read_covering",
    "read_batch",
    "load_state",
    "save_state",
    "DynamicCoveringError",
    "DimensionError",
    "UnknownObjectError",
    "NameCollisionError",
    "CoveringParseError",
    "CoveringValidationError",
    "BatchValidationError",
    "StateFormatError",
    "TripwireError",
]
