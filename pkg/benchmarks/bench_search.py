"""Compare the compiled and pure-Python search kernels on exhaustive searches.

    python3 benchmarks/bench_search.py [--repeat N]
"""

from __future__ import annotations

import argparse
import time

from aapp import kernel
from aapp.analysis import goal_search
from aapp.model import STAR, Block, CapacityUsed, Configuration, EncodedPolicy, GoalSpec, Registry


def plain_instance(n_workers: int, n_functions: int, max_units: int):
    reg = Registry({f"f{i}": (1 + i % 2, "default") for i in range(n_functions)})
    policy = EncodedPolicy({"default": [Block(STAR, invalidate=(CapacityUsed(100),))]})
    C = Configuration.empty({f"w{i}": max_units for i in range(n_workers)})
    return policy, reg, C


def affinity_instance(n_workers: int, max_units: int):
    reg = Registry({"a": (1, "ta"), "b": (1, "tb"), "c": (2, "tc")})
    policy = EncodedPolicy(
        {
            "default": [Block(STAR)],
            "ta": [Block(STAR, anti_affine=("tc",))],
            "tb": [Block(STAR, affine=("ta",)), Block(STAR, anti_affine=("tb",))],
            "tc": [Block(STAR, anti_affine=("ta",))],
        }
    )
    C = Configuration.empty({f"w{i}": max_units for i in range(n_workers)})
    return policy, reg, C


CASES = {
    "plain 2w x 3f, max 8": lambda: plain_instance(2, 3, 8),
    "plain 3w x 3f, max 6": lambda: plain_instance(3, 3, 6),
    "affinity 3w, max 6": lambda: affinity_instance(3, 6),
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    backends = kernel.available_backends()
    if "cython" not in backends:
        print("compiled kernel not available; only the Python kernel will be timed")
    print(f"{'case':<24}{'states':>10}" + "".join(f"{name + ' (s)':>16}" for name in backends) + f"{'speedup':>10}")
    for label, build in CASES.items():
        policy, reg, C = build()
        # an unreachable goal forces the whole state space to be explored
        goal = GoalSpec(((sorted(C)[0], next(iter(reg)), 10**6),))
        times, states = {}, None
        for name, impl in backends.items():
            best = float("inf")
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                _, stats = goal_search(policy, reg, C, goal, backend=impl)
                best = min(best, time.perf_counter() - t0)
            times[name], states = best, stats.states_visited
        speedup = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:<24}{states:>10}" + "".join(f"{t:>16.4f}" for t in times.values()) + f"{speedup:>9.1f}x")


if __name__ == "__main__":
    main()
