import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from dynamic_covering.boolmat import (
    BoolMatrix,
    OpCounter,
    block_compose,
    bool_gram,
    count_word_ops,
    elementwise_and,
    elementwise_or,
    odot_gram,
    transpose,
)
from dynamic_covering.constants import ViolationKind
from dynamic_covering.covering import merge
from dynamic_covering.errors import (
    BatchValidationError,
    DimensionError,
    NameCollisionError,
)
from dynamic_covering.models import (
    CharState,
    CoveringElement,
    CoveringSpace,
    GammaDeltas,
    PiDeltas,
    UpdateBatch,
    UpdateReport,
    ValidationReport,
)

logger = logging.getLogger(__name__)


def _check_names(
    report: ValidationReport, existing: set[str], incoming: tuple[str, ...]
) -> None:
    seen: set[str] = set()
    for name in incoming:
        if name in existing or name in seen:
            report.add(ViolationKind.NAME_COLLISION, name, f"{name} already exists")
        seen.add(name)


def validate_batch(
    state: CharState, batch: UpdateBatch, strict: bool = False
) -> ValidationReport:
    """
    Check a batch against the state it would be applied to.

    In lenient mode a new object may be covered by an extension or a new
    element and any t, l >= 0 is accepted. ``strict`` additionally requires
    t >= 2, l >= 2 and every new object inside some new element.
    """
    space = state.space
    report = ValidationReport()
    old_objects = set(space.objects)
    new_objects = set(batch.new_objects)
    _check_names(report, old_objects, batch.new_objects)
    _check_names(
        report,
        set(space.element_names),
        tuple(element.name for element in batch.new_elements),
    )

    covered: set[str] = set()
    for name, extra in batch.extensions.items():
        if name not in space.element_index:
            report.add(
                ViolationKind.UNKNOWN_ELEMENT, name, f"cannot extend unknown {name}"
            )
        if not extra:
            report.add(ViolationKind.EMPTY_EXTENSION, name)
        for member in extra:
            if member in old_objects:
                report.add(
                    ViolationKind.EXTENSION_OLD_OBJECT,
                    member,
                    f"extend {name} lists existing object {member}",
                )
            elif member not in new_objects:
                report.add(
                    ViolationKind.UNKNOWN_MEMBER,
                    member,
                    f"extend {name} lists unknown object {member}",
                )
        covered.update(extra)

    in_new_elements: set[str] = set()
    for element in batch.new_elements:
        if not element.members:
            report.add(ViolationKind.EMPTY_ELEMENT, element.name)
        for member in element.members:
            if member not in old_objects and member not in new_objects:
                report.add(
                    ViolationKind.UNKNOWN_MEMBER,
                    member,
                    f"new {element.name} lists unknown object {member}",
                )
        in_new_elements.update(element.members)
    covered |= in_new_elements

    for name in batch.new_objects:
        if name not in covered:
            report.add(ViolationKind.UNCOVERED_NEW_OBJECT, name)

    if strict:
        if batch.t < 2:
            report.add(ViolationKind.STRICT_TOO_FEW_OBJECTS, f"t={batch.t}")
        if batch.l < 2:
            report.add(ViolationKind.STRICT_TOO_FEW_ELEMENTS, f"l={batch.l}")
        for name in batch.new_objects:
            if name in covered and name not in in_new_elements:
                report.add(ViolationKind.STRICT_NOT_IN_NEW_ELEMENTS, name)
    elif not batch.is_empty and (batch.t < 2 or batch.l < 2):
        logger.warning(
            "batch with t=%d, l=%d accepted in lenient mode", batch.t, batch.l
        )
    return report


def require_valid_batch(
    state: CharState, batch: UpdateBatch, strict: bool = False
) -> None:
    report = validate_batch(state, batch, strict=strict)
    if report.ok:
        return
    if report.kinds() == {ViolationKind.NAME_COLLISION}:
        raise NameCollisionError([v.subject for v in report.violations])
    raise BatchValidationError(report)


@dataclass
class BatchSliceMixin:
    """
    Slices of the enlarged membership matrix shared by the delta builders.

    Rows 0..n-1 are old objects, columns 0..m-1 old elements; the new rows and
    columns follow.
    """

    state: CharState
    batch: UpdateBatch
    strict: bool = False
    validated: bool = field(default=False, repr=False)

    def _ensure_valid(self) -> None:
        if not self.validated:
            require_valid_batch(self.state, self.batch, strict=self.strict)
            self.validated = True

    @property
    def n(self) -> int:
        return self.state.n

    @property
    def m(self) -> int:
        return self.state.m

    @property
    def t(self) -> int:
        return self.batch.t

    @property
    def l(self) -> int:  # noqa: E743
        return self.batch.l

    @cached_property
    def merged_space(self) -> CoveringSpace:
        return merge(self.state.space, self.batch)

    @cached_property
    def membership_plus(self) -> BoolMatrix:
        self._ensure_valid()
        return _extend(self.state, self.batch)

    @cached_property
    def old_rows(self) -> BoolMatrix:
        return self.membership_plus.take_rows(0, self.n)

    @cached_property
    def new_rows(self) -> BoolMatrix:
        return self.membership_plus.take_rows(self.n, self.n + self.t)

    @cached_property
    def old_rows_new_cols(self) -> BoolMatrix:
        return self.old_rows.take_cols(self.m, self.m + self.l)

    def prepare_slices(self) -> None:
        for name in ("membership_plus", "old_rows", "new_rows", "old_rows_new_cols"):
            getattr(self, name)

    def gamma_deltas(self) -> GammaDeltas:
        a = self.old_rows_new_cols
        deltas = GammaDeltas(
            delta1=bool_gram(a, a),
            delta2=bool_gram(self.new_rows, self.old_rows),
            delta3=bool_gram(self.new_rows, self.new_rows),
        )
        logger.debug("gamma deltas for n=%d t=%d l=%d", self.n, self.t, self.l)
        return deltas

    def pi_deltas(self) -> PiDeltas:
        a = self.old_rows_new_cols
        deltas = PiDeltas(
            delta1=odot_gram(a, a),
            delta2=odot_gram(self.new_rows, self.old_rows),
            delta3=odot_gram(self.old_rows, self.new_rows),
            delta4=odot_gram(self.new_rows, self.new_rows),
        )
        logger.debug("pi deltas for n=%d t=%d l=%d", self.n, self.t, self.l)
        return deltas


def _extend(state: CharState, batch: UpdateBatch) -> BoolMatrix:
    space = state.space
    n, m, t, l = space.n, space.m, batch.t, batch.l  # noqa: E741
    new_index = {name: k for k, name in enumerate(batch.new_objects)}
    object_index = dict(space.object_index)
    object_index.update({name: n + k for name, k in new_index.items()})

    old_rows_new_cols = [[0] * l for _ in range(n)]
    new_rows_old_cols = [[0] * m for _ in range(t)]
    new_rows_new_cols = [[0] * l for _ in range(t)]
    for name, extra in batch.extensions.items():
        j = space.element_index[name]
        for member in extra:
            new_rows_old_cols[new_index[member]][j] = 1
    for j, element in enumerate(batch.new_elements):
        for member in element.members:
            i = object_index[member]
            if i < n:
                old_rows_new_cols[i][j] = 1
            else:
                new_rows_new_cols[i - n][j] = 1
    return block_compose(
        state.membership,
        BoolMatrix.from_rows(old_rows_new_cols, cols=l),
        BoolMatrix.from_rows(new_rows_old_cols, cols=m),
        BoolMatrix.from_rows(new_rows_new_cols, cols=l),
    )


def extend_matrix_rep(state: CharState, batch: UpdateBatch) -> BoolMatrix:
    """The (n+t) x (m+l) membership matrix of the enlarged space."""
    require_valid_batch(state, batch)
    return _extend(state, batch)


@dataclass
class GammaDeltaBuilder(BatchSliceMixin):
    def build(self) -> GammaDeltas:
        return self.gamma_deltas()


@dataclass
class PiDeltaBuilder(BatchSliceMixin):
    def build(self) -> PiDeltas:
        return self.pi_deltas()


def gamma_deltas(state: CharState, batch: UpdateBatch) -> GammaDeltas:
    return GammaDeltaBuilder(state, batch).build()


def pi_deltas(state: CharState, batch: UpdateBatch) -> PiDeltas:
    return PiDeltaBuilder(state, batch).build()


def _require_shape(
    operation: str, matrix: BoolMatrix, shape: tuple[int, int]
) -> None:
    if matrix.shape != shape:
        raise DimensionError(operation, matrix.shape, shape)


def update_gamma(gamma: BoolMatrix, deltas: GammaDeltas) -> BoolMatrix:
    """
    Join the zero-padded old Gamma with the delta blocks:
    [[Gamma, 0], [0, 0]] OR [[D1, D2^T], [D2, D3]].
    """
    n, t = gamma.rows, deltas.delta3.rows
    _require_shape("update_gamma", gamma, (n, n))
    _require_shape("update_gamma delta1", deltas.delta1, (n, n))
    _require_shape("update_gamma delta2", deltas.delta2, (t, n))
    _require_shape("update_gamma delta3", deltas.delta3, (t, t))
    padded = block_compose(
        gamma, BoolMatrix.zeros(n, t), BoolMatrix.zeros(t, n), BoolMatrix.zeros(t, t)
    )
    border = block_compose(
        deltas.delta1, transpose(deltas.delta2), deltas.delta2, deltas.delta3
    )
    return elementwise_or(padded, border)


def update_pi(pi: BoolMatrix, deltas: PiDeltas) -> BoolMatrix:
    """
    Meet the one-padded old Pi with the delta blocks:
    [[Pi, 1], [1, 1]] AND [[D1, D3], [D2, D4]].
    """
    n, t = pi.rows, deltas.delta4.rows
    _require_shape("update_pi", pi, (n, n))
    _require_shape("update_pi delta1", deltas.delta1, (n, n))
    _require_shape("update_pi delta2", deltas.delta2, (t, n))
    _require_shape("update_pi delta3", deltas.delta3, (n, t))
    _require_shape("update_pi delta4", deltas.delta4, (t, t))
    padded = block_compose(
        pi, BoolMatrix.ones(n, t), BoolMatrix.ones(t, n), BoolMatrix.ones(t, t)
    )
    border = block_compose(deltas.delta1, deltas.delta3, deltas.delta2, deltas.delta4)
    return elementwise_and(padded, border)


@dataclass
class CharStateUpdater(BatchSliceMixin):
    """
    Applies a batch to a state by the block formulas only; the old-old blocks
    of Gamma and Pi come from the stored matrices.
    """

    matrix_counter: OpCounter = field(default_factory=OpCounter, init=False)
    gamma_counter: OpCounter = field(default_factory=OpCounter, init=False)
    pi_counter: OpCounter = field(default_factory=OpCounter, init=False)

    def run(self) -> CharState:
        if self.batch.is_empty:
            self._ensure_valid()
            logger.info("empty batch, state unchanged")
            return self.state
        with count_word_ops(self.matrix_counter):
            self.prepare_slices()
        with count_word_ops(self.gamma_counter):
            gamma = update_gamma(self.state.gamma, self.gamma_deltas())
        with count_word_ops(self.pi_counter):
            pi = update_pi(self.state.pi, self.pi_deltas())
        logger.info(
            "applied batch t=%d l=%d: %d objects, %d elements",
            self.t,
            self.l,
            self.n + self.t,
            self.m + self.l,
        )
        return CharState(
            space=self.merged_space, membership=self.membership_plus, gamma=gamma, pi=pi
        )

    @property
    def report(self) -> UpdateReport:
        return UpdateReport(
            t=self.t,
            l=self.l,
            matrix_ops=self.matrix_counter.word_ops,
            gamma_ops=self.gamma_counter.word_ops,
            pi_ops=self.pi_counter.word_ops,
        )


def apply_update(
    state: CharState,
    batch: UpdateBatch,
    strict: bool = False,
    counter: Optional[OpCounter] = None,
) -> CharState:
    """Apply ``batch``; ``counter``, if given, also receives the word-op cost."""
    if counter is None:
        return CharStateUpdater(state, batch, strict=strict).run()
    with count_word_ops(counter):
        return CharStateUpdater(state, batch, strict=strict).run()


def merge_batches(
    space: CoveringSpace, first: UpdateBatch, second: UpdateBatch
) -> UpdateBatch:
    """The single batch equivalent to applying ``first`` and then ``second``."""
    extensions: dict[str, tuple[str, ...]] = {}
    for name in space.element_names:
        extra = first.extensions.get(name, ()) + second.extensions.get(name, ())
        if extra:
            extensions[name] = tuple(extra)
    new_elements = [
        CoveringElement(
            name=element.name,
            members=element.members + second.extensions.get(element.name, ()),
        )
        for element in first.new_elements
    ]
    new_elements.extend(second.new_elements)
    return UpdateBatch(
        new_objects=first.new_objects + second.new_objects,
        extensions=extensions,
        new_elements=tuple(new_elements),
    )
