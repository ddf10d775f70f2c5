import pytest
from hypothesis import given
from hypothesis import strategies as st

from decprune import CostContext, Op, Phase, solve
from decprune.costcount import OpCounts


def test_fresh_context_is_zero():
    report = CostContext().report()
    assert report.total == 0
    assert report.representation == OpCounts() == report.solution
    assert report.line() == "ops: representation=0 solution=0 total=0"


def test_joint_sized_record():
    ctx = CostContext()
    ctx.record(Op.MUL, Phase.REPRESENTATION, 12)
    assert ctx.report().representation.total == 12
    assert ctx.report().representation.mul == 12


def test_expected_utility_sized_record():
    ctx = CostContext()
    ctx.record("add", "solution", 7)
    ctx.record("mul", "solution", 8)
    assert ctx.report().solution.total == 15
    assert ctx.report().representation.total == 0


@pytest.mark.parametrize("count", [0, -3])
def test_record_rejects_non_positive(count):
    with pytest.raises(ValueError):
        CostContext().record(Op.ADD, Phase.SOLUTION, count)


def test_unknown_op_rejected():
    with pytest.raises(ValueError):
        CostContext().record("sqrt", "solution")


def test_report_is_a_snapshot():
    ctx = CostContext()
    ctx.record(Op.CMP, Phase.SOLUTION)
    first = ctx.report()
    assert ctx.report() == first
    ctx.record(Op.CMP, Phase.SOLUTION)
    assert first.solution.cmp == 1
    assert ctx.report().solution.cmp == 2


def test_notes_stay_out_of_totals():
    ctx = CostContext()
    ctx.note("coalesced_nodes", 13)
    report = ctx.report()
    assert report.total == 0
    assert report.info == {"coalesced_nodes": 13}
    assert report.as_dict()["info"] == {"coalesced_nodes": 13}


@pytest.mark.parametrize(
    "method, rep, sol",
    [("dt-rollback", 30, 41), ("gt-prune", 0, 49)],
)
def test_md_reports(md, method, rep, sol):
    report = solve(md, method).cost
    assert (report.representation.total, report.solution.total, report.total) == (
        rep,
        sol,
        rep + sol,
    )
    assert report.line() == f"ops: representation={rep} solution={sol} total={rep + sol}"


def test_md_breakdown_by_kind(md):
    # joint 12 muls; conditionals 6 adds + 12 divs
    rep = solve(md, "dt-rollback").cost.representation
    assert (rep.add, rep.mul, rep.div, rep.cmp) == (6, 12, 12, 0)
    matrix = solve(md, "matrix").cost.solution
    # 4 strategies x (8 muls + 7 adds) plus 3 comparisons
    assert (matrix.add, matrix.mul, matrix.cmp) == (28, 32, 3)


@pytest.mark.parametrize("method", ["matrix", "dt-rollback", "st-prune", "gt-rollback", "gt-prune"])
def test_counting_is_deterministic(md, method):
    assert solve(md, method).cost == solve(md, method).cost


@given(
    st.lists(
        st.tuples(st.sampled_from(list(Op)), st.sampled_from(list(Phase)), st.integers(1, 50)),
        max_size=30,
    )
)
def test_totals_add_up(records):
    ctx = CostContext()
    for op, phase, n in records:
        ctx.record(op, phase, n)
    report = ctx.report()
    assert report.total == sum(n for *_, n in records)
    assert report.total == report.representation.total + report.solution.total
    assert report.overall.total == report.total
    for phase in Phase:
        counts = ctx.counts(phase)
        assert min(counts.add, counts.mul, counts.div, counts.cmp) >= 0
