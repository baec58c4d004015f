import pytest
import yaml
from pydantic import ValidationError

from dynamic_covering.constants import (
    Algorithm,
    ApproxOperator,
    Phase,
    ViolationKind,
)
from dynamic_covering.errors import UnknownObjectError
from dynamic_covering.models import (
    BenchRecord,
    CoveringElement,
    GenParams,
    QuerySet,
    UpdateBatch,
    ValidationReport,
    VerifyCheck,
)


def test_approx_operator_from_string():
    assert ApproxOperator.from_string("xh") == ApproxOperator.XH
    assert ApproxOperator.from_string(" Sl ") == ApproxOperator.SL
    with pytest.raises(ValueError):
        ApproxOperator.from_string("zz")


def test_approx_operator_properties():
    uppers = {op for op in ApproxOperator if op.is_upper}
    assert uppers == {ApproxOperator.SH, ApproxOperator.XH, ApproxOperator.IH}
    assert not ApproxOperator.IL.has_matrix_form
    assert ApproxOperator.XL.has_matrix_form


def test_algorithm_pairs():
    for algorithm in Algorithm:
        assert algorithm.counterpart.counterpart == algorithm
        assert algorithm.incremental != algorithm.counterpart.incremental
    assert Algorithm.NCX.counterpart == Algorithm.ICX


def test_validation_report_render():
    report = ValidationReport()
    assert report.ok
    assert report.render() == "ok"
    report.add(ViolationKind.EMPTY_ELEMENT, "C1")
    report.add(ViolationKind.UNKNOWN_MEMBER, "C2", "x9 is not an object")
    assert not report.ok
    assert report.kinds() == {ViolationKind.EMPTY_ELEMENT, ViolationKind.UNKNOWN_MEMBER}
    assert report.render().splitlines() == [
        "  empty element: C1",
        "  unknown member: C2 (x9 is not an object)",
    ]


def test_space_lookups(base_space):
    assert (base_space.n, base_space.m) == (4, 3)
    assert base_space.index_of("x3") == 2
    assert base_space.element("C3").members == ("x3", "x4")
    with pytest.raises(UnknownObjectError):
        base_space.index_of("x9")
    with pytest.raises(UnknownObjectError):
        base_space.element("C9")
    assert base_space.simple_json()["elements"]["C1"] == ["x1", "x4"]


def test_query_set():
    query = QuerySet.of("x1", "x2", "x1")
    assert len(query) == 2
    assert "x2" in query
    assert "x3" not in query
    assert len(QuerySet()) == 0


def test_update_batch_sizes(growth_batch):
    assert (growth_batch.t, growth_batch.l) == (2, 2)
    assert not growth_batch.is_empty
    assert UpdateBatch().is_empty
    only_extension = UpdateBatch(extensions={"C1": ("x5",)})
    assert not only_extension.is_empty
    assert (only_extension.t, only_extension.l) == (0, 0)
    assert growth_batch.simple_json()["new"] == {
        "C4": ["x3", "x5", "x6"],
        "C5": ["x1", "x6"],
    }


def test_models_are_frozen(base_space):
    element = CoveringElement(name="C1", members=("x1",))
    with pytest.raises(ValidationError):
        element.name = "C2"
    with pytest.raises(ValidationError):
        base_space.objects = ()


def test_char_state_summary(base_state):
    summary = base_state.summary()
    assert summary == {
        "n": 4,
        "m": 3,
        "density_M": round(7 / 12, 6),
        "density_gamma": 0.75,
        "density_pi": 0.5,
    }
    assert yaml.safe_load(base_state.summary_yaml()) == summary


def test_gen_params_constraints():
    assert GenParams().n == 100
    for bad in ({"n": 0}, {"m": 0}, {"density": 0.0}, {"t": -1}, {"ext_prob": 2}):
        with pytest.raises(ValidationError):
            GenParams(**bad)


def test_bench_record_rejects_negative_counters():
    with pytest.raises(ValidationError):
        BenchRecord(
            algorithm=Algorithm.NCS, n=1, m=1, t=0, l=0, ops={Phase.DELTA_BUILD: -1}
        )


def test_bench_record_rows():
    record = BenchRecord(
        algorithm=Algorithm.ICX,
        n=8,
        m=3,
        t=1,
        l=2,
        ops={Phase.MATRIX_BUILD: 4, Phase.APPROXIMATION: 6},
        nanos={Phase.APPROXIMATION: 50},
    )
    assert record.total_ops == 10
    assert record.total_nanos == 50
    rows = record.csv_rows()
    assert [row[5] for row in rows] == [phase.value for phase in Phase]
    assert rows[1] == ("ICX", 8, 3, 1, 2, "delta_build", 0, 0)
    assert rows[2][-1] == 50
    assert record.csv_rows(wall_time=False)[2][-1] == 0


def test_verify_check_render():
    assert VerifyCheck(name="pi from M", passed=True).render() == "PASS pi from M"
    failed = VerifyCheck(name="gamma from M", passed=False, detail="gamma[x1,x3]")
    assert failed.render() == "FAIL gamma from M: gamma[x1,x3]"
