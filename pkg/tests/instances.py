"""Random small scheduling instances shared by property and acceptance tests."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from aapp.model import (
    STAR,
    Block,
    CapacityUsed,
    Configuration,
    EncodedPolicy,
    MaxConcurrent,
    Registry,
    Strategy,
)

FRAGMENTS = ("PlainApp", "NegOnly", "PosOnly", "Full")


def random_block(rng: random.Random, workers: list[str], tags: list[str], fragment: str) -> Block:
    if rng.random() < 0.3:
        ws = STAR
    else:
        ws = tuple(rng.sample(workers, rng.randint(1, len(workers))))
    strategy = rng.choice([Strategy.ANY, Strategy.BEST_FIRST])
    inval = []
    if rng.random() < 0.7:
        inval.append(CapacityUsed(rng.choice([25, 50, 60, 75, 80, 100])))
    if rng.random() < 0.4:
        inval.append(MaxConcurrent(rng.randint(1, 4)))
    affine, anti = (), ()
    if fragment in ("NegOnly", "Full") and rng.random() < 0.6:
        anti = tuple(rng.sample(tags, rng.randint(1, len(tags))))
    if fragment in ("PosOnly", "Full") and rng.random() < 0.6:
        affine = tuple(rng.sample(tags, rng.randint(1, min(2, len(tags)))))
    return Block(ws, strategy, tuple(inval), affine, anti)


def random_instance(rng: random.Random, fragment: str = "PlainApp"):
    """Return ``(policy, registry, configuration)``; at most 3 workers, 4 functions, 3 blocks per tag."""
    workers = [f"w{i}" for i in range(rng.randint(1, 3))]
    nfun = rng.randint(1, 4)
    ntags = rng.randint(1, 3)
    tags = [f"t{i}" for i in range(ntags)]
    reg = Registry({f"f{i}": (rng.randint(1, 4), rng.choice(tags + ["default"])) for i in range(nfun)})
    C = Configuration.empty({w: rng.randint(1, 8) for w in workers})
    all_tags = tags + ["default"]
    policy = {}
    for t in all_tags:
        policy[t] = [random_block(rng, workers, all_tags, fragment) for _ in range(rng.randint(1, 3))]
    # make sure the intended fragment actually shows up
    if fragment in ("NegOnly", "Full") and not any(b.anti_affine for bs in policy.values() for b in bs):
        b = policy["default"][0]
        policy["default"][0] = Block(b.workers, b.strategy, b.invalidate, b.affine, (rng.choice(all_tags),))
    if fragment in ("PosOnly", "Full") and not any(b.affine for bs in policy.values() for b in bs):
        b = policy["default"][0]
        policy["default"][0] = Block(b.workers, b.strategy, b.invalidate, (rng.choice(all_tags),), b.anti_affine)
    return EncodedPolicy(policy), reg, C


@st.composite
def instances(draw, fragments=FRAGMENTS):
    fragment = draw(st.sampled_from(fragments))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_instance(random.Random(seed), fragment)
