import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional

from dynamic_covering import route_logs_through_tqdm, set_logging_level
from dynamic_covering.bench import gen_batch, gen_space, run_trials, summarize
from dynamic_covering.boolmat import BoolMatrix
from dynamic_covering.characteristic import (
    approximate,
    approximate_all,
    build_char_state,
    verify_state,
)
from dynamic_covering.constants import VERIFY_QUERY_COUNT, ApproxOperator, MatrixName
from dynamic_covering.covering import merge
from dynamic_covering.errors import TripwireError
from dynamic_covering.incremental import CharStateUpdater
from dynamic_covering.io import (
    parse_query_set,
    read_batch,
    read_bench_config,
    read_covering,
    save_batch,
    save_covering,
    write_bench_csv,
)
from dynamic_covering.models import GenParams
from dynamic_covering.persistence import load_state, save_state
from dynamic_covering.utils import profile

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TRIPWIRE = 2

OP_CHOICES = [op.value.lower() for op in ApproxOperator] + ["all"]
BENCH_FLAGS = ("n", "m", "density", "t", "l", "ext_prob", "batches", "seed")


def _emit(
    options: argparse.Namespace, lines: list[str], payload: dict[str, Any]
) -> None:
    if options.json:
        print(json.dumps(payload, sort_keys=False))
    else:
        for line in lines:
            print(line)


def _matrix_lines(matrix: BoolMatrix) -> list[str]:
    return ["".join(str(bit) for bit in row) for row in matrix.tolist()]


def cmd_build(options: argparse.Namespace) -> int:
    space = read_covering(options.covering)
    state = build_char_state(space)
    size = save_state(state, options.out)
    logger.debug("built %s\n%s", options.out, state.summary_yaml())
    summary = state.summary()
    lines = [f"{key}: {value}" for key, value in summary.items()]
    _emit(options, lines, {**summary, "bytes": size, "out": str(options.out)})
    return EXIT_OK


def cmd_approx(options: argparse.Namespace) -> int:
    state = load_state(options.state, trust=options.trust)
    query = parse_query_set(options.set)
    if options.op == "all":
        results = approximate_all(state, query)
    else:
        operator = ApproxOperator.from_string(options.op)
        results = [approximate(state, query, operator)]
    render = (lambda r: r.render_vector()) if options.vector else (lambda r: r.render())
    _emit(
        options,
        [render(result) for result in results],
        {"results": [result.simple_json() for result in results]},
    )
    return EXIT_OK


def cmd_update(options: argparse.Namespace) -> int:
    state = load_state(options.state, trust=options.trust)
    batch = read_batch(options.batch)
    updater = CharStateUpdater(state, batch, strict=options.strict)
    updated = updater.run()
    save_state(updated, options.out)
    report = updater.report
    lines = [
        f"t: {report.t}",
        f"l: {report.l}",
        f"matrix_ops: {report.matrix_ops}",
        f"gamma_ops: {report.gamma_ops}",
        f"pi_ops: {report.pi_ops}",
    ]
    _emit(options, lines, {**report.model_dump(), **updated.summary()})
    return EXIT_OK


def cmd_verify(options: argparse.Namespace) -> int:
    # load without the re-derivation check; the checks below report divergence
    state = load_state(options.state, trust=True)
    checks = verify_state(state, queries=options.queries, seed=options.seed)
    _emit(
        options,
        [check.render() for check in checks],
        {"checks": [check.model_dump() for check in checks]},
    )
    return EXIT_OK if all(check.passed for check in checks) else EXIT_ERROR


def cmd_show(options: argparse.Namespace) -> int:
    state = load_state(options.state, trust=options.trust)
    names = [MatrixName(options.matrix)] if options.matrix else list(MatrixName)
    matrices = {
        MatrixName.M: state.membership,
        MatrixName.GAMMA: state.gamma,
        MatrixName.PI: state.pi,
    }
    lines = [
        f"objects: {' '.join(state.space.objects)}",
        f"elements: {' '.join(state.space.element_names)}",
    ]
    for name in names:
        lines.append(f"{name.value}:")
        lines.extend(_matrix_lines(matrices[name]))
    payload: dict[str, Any] = {
        "objects": list(state.space.objects),
        "elements": list(state.space.element_names),
    }
    payload.update({name.value: matrices[name].tolist() for name in names})
    _emit(options, lines, payload)
    return EXIT_OK


def _bench_params(options: argparse.Namespace) -> GenParams:
    overrides = {flag: getattr(options, flag) for flag in BENCH_FLAGS}
    if options.config is not None:
        return read_bench_config(options.config, overrides)
    return GenParams(**{k: v for k, v in overrides.items() if v is not None})


def cmd_gen(options: argparse.Namespace) -> int:
    params = _bench_params(options)
    out_dir = Path(options.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    space = gen_space(params)
    written = [out_dir / "covering.txt"]
    save_covering(space, written[0])
    for index in range(params.batches):
        batch = gen_batch(space, params, index)
        if batch.is_empty:
            logger.warning("batch %d is empty", index + 1)
        path = out_dir / f"batch-{index + 1}.txt"
        save_batch(batch, path)
        written.append(path)
        space = merge(space, batch)
    _emit(
        options,
        [str(path) for path in written],
        {"params": params.model_dump(), "files": [str(path) for path in written]},
    )
    return EXIT_OK


def cmd_bench(options: argparse.Namespace) -> int:
    params = _bench_params(options)
    runner = profile(run_trials) if options.profile else run_trials
    with route_logs_through_tqdm():
        records = runner(params, trials=options.trials, processes=options.processes)
    if options.csv is not None:
        write_bench_csv(records, options.csv, wall_time=not options.no_wall_time)
    summary = summarize(records)
    lines = []
    for algorithm, totals in summary["totals"].items():
        lines.append(
            f"{algorithm}: ops={totals['ops']} "
            f"maintenance_ops={totals['maintenance_ops']} nanos={totals['nanos']}"
        )
    for key in ("ratio_ics_ncs", "ratio_icx_ncx"):
        value = summary[key]
        lines.append(f"{key}: {'n/a' if value is None else f'{value:.4f}'}")
    _emit(options, lines, {"params": params.model_dump(), **summary})
    return EXIT_OK


def _add_state_loading(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--trust",
        action="store_true",
        help="Skip re-deriving gamma and pi from M when loading the state",
    )


def build_cli() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", "-v", action="store_true")
    common.add_argument("--quiet", "-q", action="store_true")
    common.add_argument(
        "--json", action="store_true", help="Print the result as one JSON object"
    )

    parser = argparse.ArgumentParser(
        prog="dcas",
        description="Characteristic-matrix approximations over dynamic coverings",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    build = subparsers.add_parser(
        "build", parents=[common], help="Build a state file from a covering file"
    )
    build.add_argument("covering", type=Path, help="Path to the covering file")
    build.add_argument("--out", type=Path, required=True, help="State file to write")
    build.set_defaults(handler=cmd_build)

    approx = subparsers.add_parser(
        "approx", parents=[common], help="Approximate a set of objects"
    )
    approx.add_argument("state", type=Path)
    approx.add_argument(
        "--set",
        required=True,
        help="Comma separated object names, or @file with one name per line",
    )
    approx.add_argument("--op", choices=OP_CHOICES, default="all")
    approx.add_argument(
        "--vector", action="store_true", help="Print 0/1 vectors instead of names"
    )
    _add_state_loading(approx)
    approx.set_defaults(handler=cmd_approx)

    update = subparsers.add_parser(
        "update", parents=[common], help="Apply an update batch incrementally"
    )
    update.add_argument("state", type=Path)
    update.add_argument("batch", type=Path)
    update.add_argument("--out", type=Path, required=True)
    update.add_argument(
        "--strict",
        action="store_true",
        help="Require at least two new objects and elements, and every new "
        "object inside a new element",
    )
    _add_state_loading(update)
    update.set_defaults(handler=cmd_update)

    verify = subparsers.add_parser(
        "verify", parents=[common], help="Check a state file against recomputation"
    )
    verify.add_argument("state", type=Path)
    verify.add_argument("--queries", type=int, default=VERIFY_QUERY_COUNT)
    verify.add_argument("--seed", type=int, default=0)
    verify.set_defaults(handler=cmd_verify)

    show = subparsers.add_parser(
        "show", parents=[common], help="Print the names and matrices of a state"
    )
    show.add_argument("state", type=Path)
    show.add_argument("--matrix", choices=[name.value for name in MatrixName])
    _add_state_loading(show)
    show.set_defaults(handler=cmd_show)

    generation = argparse.ArgumentParser(add_help=False)
    generation.add_argument("--n", type=int)
    generation.add_argument("--m", type=int)
    generation.add_argument("--density", type=float)
    generation.add_argument("--t", type=int)
    generation.add_argument("--l", type=int)
    generation.add_argument("--ext-prob", dest="ext_prob", type=float)
    generation.add_argument("--batches", type=int)
    generation.add_argument("--seed", type=int)
    generation.add_argument(
        "--config", type=Path, help="YAML file of generation parameters"
    )

    gen = subparsers.add_parser(
        "gen",
        parents=[common, generation],
        help="Write a random covering file and a chain of batch files",
    )
    gen.add_argument("--out-dir", type=Path, required=True)
    gen.set_defaults(handler=cmd_gen)

    bench = subparsers.add_parser(
        "bench",
        parents=[common, generation],
        help="Compare full and incremental maintenance",
    )
    bench.add_argument("--trials", type=int, default=1)
    bench.add_argument("--processes", type=int, default=1, help="0 uses every CPU")
    bench.add_argument("--csv", type=Path, help="Write one row per record and phase")
    bench.add_argument(
        "--no-wall-time",
        action="store_true",
        help="Write 0 for nanos so repeated runs give identical CSV files",
    )
    bench.add_argument("--profile", action="store_true")
    bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_cli()
    options = parser.parse_args(argv)
    if options.verbose:
        set_logging_level("DEBUG")
    elif options.quiet:
        set_logging_level("WARNING")
    try:
        return options.handler(options)
    except TripwireError as e:
        print(f"tripwire: {e}", file=sys.stderr)
        return EXIT_TRIPWIRE
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
