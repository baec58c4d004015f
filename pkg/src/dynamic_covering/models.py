from typing import Any, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator

from dynamic_covering.boolmat import BoolMatrix
from dynamic_covering.constants import (
    Algorithm,
    ApproxOperator,
    Phase,
    ViolationKind,
)
from dynamic_covering.errors import UnknownObjectError


class CoveringElement(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    members: tuple[str, ...] = ()


class CoveringSpace(BaseModel):
    """A universe of named objects and a family of named elements over it."""

    model_config = ConfigDict(frozen=True)

    objects: tuple[str, ...]
    elements: tuple[CoveringElement, ...] = ()

    @property
    def n(self) -> int:
        return len(self.objects)

    @property
    def m(self) -> int:
        return len(self.elements)

    @property
    def element_names(self) -> tuple[str, ...]:
        return tuple(element.name for element in self.elements)

    _object_index: dict[str, int] = PrivateAttr(default_factory=dict)
    _element_index: dict[str, int] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context: Any) -> None:
        self._object_index = {name: i for i, name in enumerate(self.objects)}
        self._element_index = {e.name: j for j, e in enumerate(self.elements)}

    @property
    def object_index(self) -> dict[str, int]:
        return self._object_index

    @property
    def element_index(self) -> dict[str, int]:
        return self._element_index

    def index_of(self, name: str) -> int:
        try:
            return self.object_index[name]
        except KeyError:
            raise UnknownObjectError(name) from None

    def element(self, name: str) -> CoveringElement:
        try:
            return self.elements[self.element_index[name]]
        except KeyError:
            raise UnknownObjectError(name, what="element") from None

    def member_set(self, name: str) -> frozenset[str]:
        return frozenset(self.element(name).members)

    def simple_json(self) -> dict[str, Any]:
        return {
            "objects": list(self.objects),
            "elements": {e.name: list(e.members) for e in self.elements},
        }


class QuerySet(BaseModel):
    model_config = ConfigDict(frozen=True)

    members: frozenset[str] = frozenset()

    @classmethod
    def of(cls, *names: str) -> "QuerySet":
        return cls(members=frozenset(names))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, name: object) -> bool:
        return name in self.members


class Violation(BaseModel):
    kind: ViolationKind
    subject: str
    message: str


class ValidationReport(BaseModel):
    violations: list[Violation] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: ViolationKind, subject: str, message: str = "") -> None:
        self.violations.append(
            Violation(kind=kind, subject=subject, message=message or kind.value)
        )

    def kinds(self) -> set[ViolationKind]:
        return {v.kind for v in self.violations}

    def render(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(
            f"  {v.kind.value}: {v.subject}"
            + (f" ({v.message})" if v.message != v.kind.value else "")
            for v in self.violations
        )


class UpdateBatch(BaseModel):
    """New objects, extensions of existing elements, and new elements."""

    model_config = ConfigDict(frozen=True)

    new_objects: tuple[str, ...] = ()
    extensions: dict[str, tuple[str, ...]] = Field(default_factory=dict)
    new_elements: tuple[CoveringElement, ...] = ()

    @property
    def t(self) -> int:
        return len(self.new_objects)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.new_elements)

    @property
    def is_empty(self) -> bool:
        return not (self.new_objects or self.extensions or self.new_elements)

    def simple_json(self) -> dict[str, Any]:
        return {
            "add_objects": list(self.new_objects),
            "extend": {k: list(v) for k, v in self.extensions.items()},
            "new": {e.name: list(e.members) for e in self.new_elements},
        }


class CharState(BaseModel):
    """A covering space with its membership matrix and both characteristic
    matrices."""

    model_config = ConfigDict(
        arbitrary_types_allowed=True, frozen=True, populate_by_name=True
    )

    space: CoveringSpace
    membership: BoolMatrix = Field(alias="M")
    gamma: BoolMatrix
    pi: BoolMatrix

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def m(self) -> int:
        return self.space.m

    def same_matrices(self, other: "CharState") -> bool:
        return (
            self.space.objects == other.space.objects
            and self.space.element_names == other.space.element_names
            and self.membership == other.membership
            and self.gamma == other.gamma
            and self.pi == other.pi
        )

    def summary(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "m": self.m,
            "density_M": round(self.membership.density(), 6),
            "density_gamma": round(self.gamma.density(), 6),
            "density_pi": round(self.pi.density(), 6),
        }

    def summary_yaml(self) -> str:
        return yaml.safe_dump(self.summary(), sort_keys=False)


class GammaDeltas(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    delta1: BoolMatrix
    delta2: BoolMatrix
    delta3: BoolMatrix


class PiDeltas(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    delta1: BoolMatrix
    delta2: BoolMatrix
    delta3: BoolMatrix
    delta4: BoolMatrix


class ApproxResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    operator: ApproxOperator
    query: QuerySet
    vector: BoolMatrix
    members: tuple[str, ...]

    def render(self) -> str:
        return f"{self.operator.value}: {{{','.join(self.members)}}}"

    def render_vector(self) -> str:
        bits = "".join(str(row[0]) for row in self.vector.tolist())
        return f"{self.operator.value}: {bits}"

    def simple_json(self) -> dict[str, Any]:
        return {
            "operator": self.operator.value,
            "members": list(self.members),
            "vector": [row[0] for row in self.vector.tolist()],
        }


class UpdateReport(BaseModel):
    t: int
    l: int  # noqa: E741
    matrix_ops: int = 0
    gamma_ops: int = 0
    pi_ops: int = 0


class GenParams(BaseModel):
    """Parameters of a random dynamic covering benchmark."""

    n: int = Field(default=100, ge=1)
    m: int = Field(default=20, ge=1)
    density: float = Field(default=0.2, gt=0.0, le=1.0)
    t: int = Field(default=5, ge=0)
    l: int = Field(default=3, ge=0)  # noqa: E741
    ext_prob: float = Field(default=0.3, ge=0.0, le=1.0)
    batches: int = Field(default=1, ge=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    query_fraction: float = Field(default=0.5, gt=0.0, le=1.0)


class BenchRecord(BaseModel):
    model_config = ConfigDict(use_enum_values=False)

    algorithm: Algorithm
    trial: int = 0
    batch: int = 0
    n: int
    m: int
    t: int
    l: int  # noqa: E741
    ops: dict[Phase, int] = Field(default_factory=dict)
    nanos: dict[Phase, int] = Field(default_factory=dict)

    @field_validator("ops", "nanos")
    @classmethod
    def _non_negative(cls, value: dict[Phase, int]) -> dict[Phase, int]:
        if any(v < 0 for v in value.values()):
            raise ValueError("bench counters must be non-negative")
        return value

    @property
    def total_ops(self) -> int:
        return sum(self.ops.values())

    @property
    def total_nanos(self) -> int:
        return sum(self.nanos.values())

    def csv_rows(self, wall_time: bool = True) -> list[tuple[Any, ...]]:
        return [
            (
                self.algorithm.value,
                self.n,
                self.m,
                self.t,
                self.l,
                phase.value,
                self.ops.get(phase, 0),
                self.nanos.get(phase, 0) if wall_time else 0,
            )
            for phase in Phase
        ]


class VerifyCheck(BaseModel):
    name: str
    passed: bool
    detail: Optional[str] = None

    def render(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}" + (f": {self.detail}" if self.detail else "")
