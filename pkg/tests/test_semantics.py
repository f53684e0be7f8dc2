import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aapp.encoder import encode
from aapp.errors import IllegalTransition
from aapp.model import (
    Block,
    CapacityUsed,
    Configuration,
    Done,
    EncodedPolicy,
    Fail,
    Registry,
    Start,
    Strategy,
    apply_start,
)
from aapp.parser import parse_script
from aapp.semantics import (
    Candidates,
    Chosen,
    Failed,
    enabled_labels,
    schedule,
    schedule_candidates,
    step,
    replay,
    valid,
)

from instances import instances
from oracle import oracle_moves, oracle_valid, state_of
from test_parser import EXAMPLE

REG = Registry({"f": (8, "f_tag")})
P = encode(parse_script(EXAMPLE))
C0 = Configuration.empty({"w1": 10, "w2": 20})
C1 = apply_start(C0, "f", "w1", REG)
C2 = apply_start(C1, "f", "w2", REG)
CAP80 = Block(("w1", "w2"), Strategy.BEST_FIRST, (CapacityUsed(80),))


def test_valid_examples():
    assert valid("f", "w1", C0, REG, CAP80)
    assert not valid("f", "w1", C1, REG, CAP80)
    reg = Registry({"f": (1, "f_tag"), "g": (1, "g_tag")})
    C = apply_start(Configuration.empty({"w": 10}), "f", "w", reg)
    assert not valid("g", "w", C, reg, Block(("w",), affine=("g_tag",)))
    assert valid("g", "w", Configuration.empty({"w": 10}), reg, Block(("w",), anti_affine=("h_tag",)))


def test_candidates_examples():
    assert schedule_candidates("f", C0, P, REG) == Candidates(0, Strategy.BEST_FIRST, ("w1", "w2"))
    assert schedule_candidates("f", C1, P, REG) == Candidates(0, Strategy.BEST_FIRST, ("w2",))
    C3 = apply_start(C2, "f", "w2", REG)
    assert schedule_candidates("f", C3, P, REG) is None


def test_schedule_examples():
    assert schedule("f", C0, P, REG) == Chosen(0, "w1")
    C3 = apply_start(C2, "f", "w2", REG)
    assert schedule("f", C3, P, REG) == Failed()
    any_p = EncodedPolicy({"default": [Block(("w1", "w2"))], "f_tag": [Block(("w1", "w2"))]})
    picks = {schedule("f", C0, any_p, REG, random.Random(s)).worker for s in range(20)}
    assert picks == {"w1", "w2"}
    assert schedule("f", C0, any_p, REG, random.Random(7)) == schedule("f", C0, any_p, REG, random.Random(7))


def test_step_and_replay_examples():
    assert step(C0, Start("f", "w1"), P, REG) == C1
    assert step(C1, Start("f", "w2"), P, REG) == C2
    with pytest.raises(IllegalTransition):
        step(C2, Start("f", "w1"), P, REG)
    assert replay(C0, [Start("f", "w1"), Start("f", "w2")], P, REG) == C2
    assert replay(C0, [], P, REG) == C0
    with pytest.raises(IllegalTransition) as exc:
        replay(C0, [Done("f", "w1")], P, REG)
    assert exc.value.index == 0 and "FunctionNotAllocated" in exc.value.reason


def test_strict_fail_needs_no_candidates():
    with pytest.raises(IllegalTransition):
        step(C0, Fail("f"), P, REG)
    assert step(apply_start(C2, "f", "w2", REG), Fail("f"), P, REG) == apply_start(C2, "f", "w2", REG)


def test_lenient_replay_only_checks_capacity():
    # w2 is not the best_first pick on C0, but lenient replay allows it
    assert replay(C0, [Start("f", "w2")], P, REG, strict=False)["w2"].used == 8


def _walk(policy, reg, C, seed, length):
    rng = random.Random(seed)
    trace = []
    for _ in range(length):
        labels = enabled_labels(C, policy, reg)
        label = rng.choice(labels)
        trace.append(label)
        C = step(C, label, policy, reg)
    return trace, C


@given(instances(), st.integers(0, 10**6))
@settings(max_examples=150, deadline=None)
def test_enabled_labels_match_oracle(inst, seed):
    policy, reg, C = inst
    maxima = {w: s.max for w, s in C.items()}
    trace, _ = _walk(policy, reg, C, seed, 10)
    for label in trace:
        labels = enabled_labels(C, policy, reg)
        mine = sorted((type(l).__name__.lower(), l.f, getattr(l, "w", None)) for l in labels if not isinstance(l, Fail))
        assert mine == sorted(oracle_moves(state_of(C, reg), policy, reg, maxima))
        for f in reg:
            for b in policy[reg.tag(f)]:
                for w in b.expand_workers(C):
                    assert valid(f, w, C, reg, b) == oracle_valid(f, w, state_of(C, reg), reg, maxima, b)
        C = step(C, label, policy, reg)


@given(instances(), st.integers(0, 10**6))
@settings(max_examples=150, deadline=None)
def test_first_block_discipline(inst, seed):
    policy, reg, C = inst
    _, C = _walk(policy, reg, C, seed, 8)
    for f in reg:
        cands = schedule_candidates(f, C, policy, reg)
        if cands is None:
            continue
        for b in policy[reg.tag(f)][: cands.block_index]:
            assert not any(valid(f, w, C, reg, b) for w in b.expand_workers(C))


@given(instances(), st.integers(0, 10**6))
@settings(max_examples=100, deadline=None)
def test_fail_labels_are_transparent(inst, seed):
    policy, reg, C = inst
    trace, final = _walk(policy, reg, C, seed, 12)
    stripped = [l for l in trace if not isinstance(l, Fail)]
    assert replay(C, stripped, policy, reg) == final
    assert replay(C, trace, policy, reg) == final


@given(instances(), st.integers(0, 10**6), st.integers(0, 10**6))
@settings(max_examples=100, deadline=None)
def test_schedule_is_deterministic(inst, walk_seed, seed):
    policy, reg, C = inst
    _, C = _walk(policy, reg, C, walk_seed, 5)
    for f in reg:
        assert schedule(f, C, policy, reg, random.Random(seed)) == schedule(f, C, policy, reg, random.Random(seed))
