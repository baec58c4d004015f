import logging
import multiprocessing
import multiprocessing.pool
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from tqdm.auto import tqdm

from dynamic_covering.boolmat import BoolMatrix, bool_gram, diff_entries, odot_gram
from dynamic_covering.characteristic import (
    build_char_state,
    second_approx,
    sixth_approx,
)
from dynamic_covering.constants import Algorithm, MatrixName, Phase
from dynamic_covering.covering import matrix_rep, merge
from dynamic_covering.errors import TripwireError
from dynamic_covering.incremental import BatchSliceMixin, update_gamma, update_pi
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
from dynamic_covering.utils import timed_phase

logger = logging.getLogger(__name__)


def _fresh_names(prefix: str, taken: set[str], count: int, start: int) -> list[str]:
    names = []
    k = start
    while len(names) < count:
        k += 1
        candidate = f"{prefix}{k}"
        if candidate not in taken:
            names.append(candidate)
    return names


def gen_space(params: GenParams) -> CoveringSpace:
    """
    A random covering: object i joins element j with probability ``density``.

    Empty elements get one random object; uncovered objects are added to one
    uniformly chosen element.
    """
    rng = np.random.default_rng([params.seed, 0])
    n, m = params.n, params.m
    bits = rng.random((n, m)) < params.density
    for j in np.flatnonzero(~bits.any(axis=0)):
        bits[rng.integers(n), j] = True
    for i in np.flatnonzero(~bits.any(axis=1)):
        bits[i, rng.integers(m)] = True
    objects = tuple(f"x{i + 1}" for i in range(n))
    elements = tuple(
        CoveringElement(
            name=f"C{j + 1}",
            members=tuple(objects[i] for i in np.flatnonzero(bits[:, j])),
        )
        for j in range(m)
    )
    return CoveringSpace(objects=objects, elements=elements)


def gen_batch(space: CoveringSpace, params: GenParams, index: int = 0) -> UpdateBatch:
    """
    A random batch of ``params.t`` new objects and ``params.l`` new elements.

    Each old element is extended with probability ``ext_prob``. A new object
    left uncovered joins one uniformly chosen new element, or an extension of
    an old element when the batch has no new elements.
    """
    rng = np.random.default_rng([params.seed, index + 1])
    t, l = params.t, params.l  # noqa: E741
    new_objects = _fresh_names("x", set(space.objects), t, space.n)
    new_names = _fresh_names("C", set(space.element_names), l, space.m)
    universe = list(space.objects) + new_objects

    new_bits = rng.random((len(universe), l)) < params.density
    for j in np.flatnonzero(~new_bits.any(axis=0)):
        new_bits[rng.integers(len(universe)), j] = True

    extensions: dict[str, list[str]] = {}
    if t:
        for element in space.elements:
            if rng.random() < params.ext_prob:
                chosen = rng.random(t) < params.density
                if not chosen.any():
                    chosen[rng.integers(t)] = True
                extensions[element.name] = [
                    new_objects[k] for k in np.flatnonzero(chosen)
                ]

    covered = {x for members in extensions.values() for x in members}
    for k, name in enumerate(new_objects):
        i = space.n + k
        if name in covered or new_bits[i].any():
            continue
        if l:
            new_bits[i, rng.integers(l)] = True
        else:
            target = space.elements[rng.integers(space.m)].name
            extensions.setdefault(target, []).append(name)

    new_elements = tuple(
        CoveringElement(
            name=name,
            members=tuple(universe[i] for i in np.flatnonzero(new_bits[:, j])),
        )
        for j, name in enumerate(new_names)
    )
    return UpdateBatch(
        new_objects=tuple(new_objects),
        extensions={k: tuple(v) for k, v in extensions.items()},
        new_elements=new_elements,
    )


def gen_query(space: CoveringSpace, params: GenParams, index: int = 0) -> QuerySet:
    rng = np.random.default_rng([params.seed, index + 1, 1])
    size = int(space.n * params.query_fraction)
    chosen = rng.choice(space.n, size=size, replace=False) if size else []
    return QuerySet(members=frozenset(space.objects[i] for i in chosen))


def _compare(
    name: MatrixName, full: BoolMatrix, incremental: BoolMatrix
) -> list[tuple[str, int, int]]:
    if full.shape != incremental.shape:
        return [(name.value, -1, -1)]
    return [(name.value, i, j) for i, j in diff_entries(full, incremental)]


def _compare_results(
    full: tuple[ApproxResult, ApproxResult],
    incremental: tuple[ApproxResult, ApproxResult],
) -> list[tuple[str, int, int]]:
    divergent = []
    for a, b in zip(full, incremental):
        if a.vector != b.vector:
            divergent.extend(
                (a.operator.value, i, 0) for i, _ in diff_entries(a.vector, b.vector)
            )
    return divergent


@dataclass
class BenchSuite:
    """
    Runs the non-incremental and incremental pipelines side by side over a
    sequence of random batches, checking that they agree after every batch.
    """

    params: GenParams
    trial: int = 0
    records: list[BenchRecord] = field(default_factory=list, init=False)

    def _record(
        self,
        algorithm: Algorithm,
        batch_index: int,
        state: CharState,
        batch: UpdateBatch,
        ops: dict[Phase, int],
        nanos: dict[Phase, int],
    ) -> None:
        self.records.append(
            BenchRecord(
                algorithm=algorithm,
                trial=self.trial,
                batch=batch_index,
                n=state.n,
                m=state.m,
                t=batch.t,
                l=batch.l,
                ops=ops,
                nanos=nanos,
            )
        )

    def _non_incremental(
        self,
        space_plus: CoveringSpace,
        query: QuerySet,
        product: Callable[[BoolMatrix, BoolMatrix], BoolMatrix],
        approx: Callable[[CharState, QuerySet], tuple[ApproxResult, ApproxResult]],
    ) -> tuple[BoolMatrix, BoolMatrix, tuple[ApproxResult, ApproxResult], dict, dict]:
        ops: dict[Phase, int] = {}
        nanos: dict[Phase, int] = {}
        with timed_phase(Phase.MATRIX_BUILD, ops, nanos):
            membership = matrix_rep(space_plus, check=False)
            matrix = product(membership, membership)
        ops[Phase.DELTA_BUILD] = nanos[Phase.DELTA_BUILD] = 0
        # only the matrix the algorithm maintains is meaningful here
        state = CharState(
            space=space_plus, membership=membership, gamma=matrix, pi=matrix
        )
        with timed_phase(Phase.APPROXIMATION, ops, nanos):
            results = approx(state, query)
        return membership, matrix, results, ops, nanos

    def _incremental(
        self,
        state: CharState,
        batch: UpdateBatch,
        query: QuerySet,
        sixth: bool,
    ) -> tuple[BoolMatrix, BoolMatrix, tuple[ApproxResult, ApproxResult], dict, dict]:
        ops: dict[Phase, int] = {}
        nanos: dict[Phase, int] = {}
        slices = BatchSliceMixin(state, batch, validated=True)
        with timed_phase(Phase.MATRIX_BUILD, ops, nanos):
            slices.prepare_slices()
        with timed_phase(Phase.DELTA_BUILD, ops, nanos):
            if sixth:
                matrix = update_pi(state.pi, slices.pi_deltas())
            else:
                matrix = update_gamma(state.gamma, slices.gamma_deltas())
        interim = CharState(
            space=slices.merged_space,
            membership=slices.membership_plus,
            gamma=matrix,
            pi=matrix,
        )
        with timed_phase(Phase.APPROXIMATION, ops, nanos):
            approx = sixth_approx if sixth else second_approx
            results = approx(interim, query)
        return slices.membership_plus, matrix, results, ops, nanos

    def run_batch(
        self, state: CharState, batch: UpdateBatch, batch_index: int
    ) -> CharState:
        space_plus = merge(state.space, batch)
        query = gen_query(space_plus, self.params, batch_index)

        m_ncs, gamma_ncs, sets_ncs, ops, nanos = self._non_incremental(
            space_plus, query, bool_gram, second_approx
        )
        self._record(Algorithm.NCS, batch_index, state, batch, ops, nanos)
        m_ics, gamma_ics, sets_ics, ops, nanos = self._incremental(
            state, batch, query, sixth=False
        )
        self._record(Algorithm.ICS, batch_index, state, batch, ops, nanos)
        _, pi_ncx, sets_ncx, ops, nanos = self._non_incremental(
            space_plus, query, odot_gram, sixth_approx
        )
        self._record(Algorithm.NCX, batch_index, state, batch, ops, nanos)
        _, pi_icx, sets_icx, ops, nanos = self._incremental(
            state, batch, query, sixth=True
        )
        self._record(Algorithm.ICX, batch_index, state, batch, ops, nanos)

        divergent = (
            _compare(MatrixName.M, m_ncs, m_ics)
            + _compare(MatrixName.GAMMA, gamma_ncs, gamma_ics)
            + _compare(MatrixName.PI, pi_ncx, pi_icx)
            + _compare_results(sets_ncs, sets_ics)
            + _compare_results(sets_ncx, sets_icx)
        )
        if divergent:
            raise TripwireError(
                f"trial {self.trial} batch {batch_index}: incremental result "
                "differs from full recomputation",
                divergent,
            )
        return CharState(
            space=space_plus, membership=m_ics, gamma=gamma_ics, pi=pi_icx
        )

    def run(self, progress: bool = True) -> list[BenchRecord]:
        space = gen_space(self.params)
        state = build_char_state(space)
        logger.info(
            "trial %d: n=%d m=%d, %d batches of t=%d l=%d",
            self.trial,
            space.n,
            space.m,
            self.params.batches,
            self.params.t,
            self.params.l,
        )
        for index in tqdm(
            range(self.params.batches),
            desc=f"trial {self.trial}",
            disable=not progress,
            leave=False,
        ):
            batch = gen_batch(state.space, self.params, index)
            state = self.run_batch(state, batch, index)
        return self.records


def run_suite(params: GenParams, trial: int = 0, progress: bool = False) -> list[BenchRecord]:
    return BenchSuite(params, trial=trial).run(progress=progress)


def _run_trial(params: GenParams, trial: int) -> list[BenchRecord]:
    seeded = params.model_copy(update={"seed": (params.seed + trial) % 2**64})
    return BenchSuite(seeded, trial=trial).run(progress=False)


def run_trials(
    params: GenParams, trials: int = 1, processes: Optional[int] = 1
) -> list[BenchRecord]:
    """
    Run independent trials, trial k seeded with ``seed + k``. With more than
    one process the trials fan out to a worker pool; records come back in
    trial order either way.
    """
    if trials <= 0:
        return []
    processes = processes or multiprocessing.cpu_count()
    results: dict[int, list[BenchRecord]] = {}
    if processes == 1 or trials == 1:
        for trial in tqdm(range(trials), desc="trials", disable=trials == 1):
            results[trial] = _run_trial(params, trial)
    else:
        with multiprocessing.Pool(processes=min(processes, trials)) as pool:
            with tqdm(total=trials, desc="trials") as pbar:
                pending: list[tuple[int, multiprocessing.pool.AsyncResult]] = []
                for trial in range(trials):
                    pending.append(
                        (
                            trial,
                            pool.apply_async(
                                _run_trial,
                                (params, trial),
                                callback=lambda _: pbar.update(1),
                            ),
                        )
                    )
                for trial, handle in pending:
                    results[trial] = handle.get()
            pool.close()
            pool.join()
    return [record for trial in range(trials) for record in results[trial]]


def maintenance_ops(record: BenchRecord) -> int:
    return record.ops.get(Phase.MATRIX_BUILD, 0) + record.ops.get(Phase.DELTA_BUILD, 0)


def summarize(records: list[BenchRecord]) -> dict[str, Any]:
    """Per-algorithm totals and the incremental / non-incremental op ratios."""
    totals: dict[str, dict[str, int]] = {
        algorithm.value: {"ops": 0, "maintenance_ops": 0, "nanos": 0, "records": 0}
        for algorithm in Algorithm
    }
    for record in records:
        entry = totals[record.algorithm.value]
        entry["ops"] += record.total_ops
        entry["maintenance_ops"] += maintenance_ops(record)
        entry["nanos"] += record.total_nanos
        entry["records"] += 1

    def ratio(incremental: Algorithm) -> Optional[float]:
        denominator = totals[incremental.counterpart.value]["maintenance_ops"]
        if not denominator:
            return None
        return totals[incremental.value]["maintenance_ops"] / denominator

    ratios = {
        f"ratio_{a.value.lower()}_{a.counterpart.value.lower()}": ratio(a)
        for a in Algorithm
        if a.incremental
    }
    return {"totals": totals, **ratios}
