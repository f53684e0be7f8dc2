import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aapp.errors import CapacityExceeded, FunctionNotAllocated, InvariantViolation
from aapp.model import (
    Configuration,
    Done,
    Fail,
    GoalSpec,
    Registry,
    Start,
    WorkerState,
    apply_done,
    apply_start,
    canonicalize,
    check_invariants,
    trace_from_records,
    trace_to_records,
)

REG = Registry({"f": (8, "f_tag"), "g": (1, "g_tag")})
C0 = Configuration.empty({"w1": 10, "w2": 20})


def test_start_on_empty_worker():
    C1 = apply_start(C0, "f", "w1", REG)
    assert C1["w1"] == WorkerState((("f", 1),), 8, 10)
    assert C1["w2"] == WorkerState((), 0, 20)


def test_start_filling_to_exact_max():
    C = Configuration.empty({"w": 8})
    assert apply_start(C, "f", "w", REG)["w"].used == 8


def test_start_over_capacity():
    C2 = apply_start(C0, "f", "w1", REG)
    with pytest.raises(CapacityExceeded):
        apply_start(C2, "f", "w1", REG)


def test_done_inverse_and_multiset_subtraction():
    C1 = apply_start(C0, "f", "w1", REG)
    assert apply_done(C1, "f", "w1", REG) == C0
    C = Configuration.from_counts({"w1": 20}, {"w1": {"f": 2}}, REG)
    assert apply_done(C, "f", "w1", REG)["w1"] == WorkerState((("f", 1),), 8, 20)


def test_done_on_empty_worker():
    with pytest.raises(FunctionNotAllocated):
        apply_done(C0, "f", "w1", REG)


def test_canonical_form_ignores_insertion_order():
    a = Configuration({"w2": WorkerState((("f", 1),), 8, 20), "w1": WorkerState((), 0, 10)})
    b = Configuration({"w1": WorkerState((), 0, 10), "w2": WorkerState((("f", 1),), 8, 20)})
    assert canonicalize(a) == canonicalize(b)
    assert canonicalize(C0) == ()
    C = Configuration.from_counts({"w1": 30}, {"w1": {"f": 2, "g": 1}}, REG)
    assert canonicalize(C) == (("w1", "f", 2), ("w1", "g", 1))


def test_used_above_max_rejected():
    with pytest.raises(InvariantViolation):
        WorkerState((), 11, 10)


def test_occupancy_must_be_positive():
    with pytest.raises(ValueError):
        Registry({"f": (0, "t")})


def test_labels_render_in_tuple_notation():
    assert str(Start("f", "w")) == "(start, f, w)"
    assert str(Done("f", "w")) == "(done, f, w)"
    assert "fail" in str(Fail("f"))


def test_trace_records_round_trip():
    tr = (Start("f", "w1"), Fail("g"), Done("f", "w1"))
    recs = trace_to_records(tr)
    assert recs[1] == {"action": "fail", "function": "g", "worker": None}
    assert trace_from_records(recs) == tr


def test_goal_parse():
    g = GoalSpec.parse("local:f:1, local:g")
    assert g.constraints == (("local", "f", 1), ("local", "g", 1))
    with pytest.raises(ValueError):
        GoalSpec.parse("local:f:x")


moves = st.lists(st.tuples(st.booleans(), st.sampled_from(["f", "g"]), st.sampled_from(["w1", "w2"])), max_size=40)


@given(moves)
@settings(max_examples=200)
def test_conservation_and_round_trip(ops):
    C = C0
    for is_start, f, w in ops:
        try:
            D = apply_start(C, f, w, REG) if is_start else apply_done(C, f, w, REG)
        except (CapacityExceeded, FunctionNotAllocated):
            continue
        check_invariants(D, REG)
        # start and done undo each other
        back = apply_done(D, f, w, REG) if is_start else apply_start(D, f, w, REG)
        assert back == C
        C = D
    assert Configuration(dict(C.items())) == C


@given(moves)
@settings(max_examples=100)
def test_canonical_form_is_sound(ops):
    C = C0
    seen = {}
    for is_start, f, w in ops:
        try:
            C = apply_start(C, f, w, REG) if is_start else apply_done(C, f, w, REG)
        except (CapacityExceeded, FunctionNotAllocated):
            continue
        key = canonicalize(C)
        if key in seen:
            assert seen[key] == C
        seen[key] = C
