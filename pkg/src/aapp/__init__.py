"""Static analysis for aAPP serverless scheduling scripts."""

from .analysis import (
    BoundExhausted,
    DoesNotHold,
    Holds,
    SearchStats,
    classify,
    cooccur,
    cooccur_linear,
    goal_search,
    reach,
    reach_linear,
    simplify,
)
from .encoder import encode, validate
from .model import (
    STAR,
    Block,
    CapacityUsed,
    Configuration,
    Done,
    EncodedPolicy,
    Fail,
    GoalSpec,
    MaxConcurrent,
    Polarity,
    Registry,
    Start,
    Strategy,
    WorkerState,
    apply_done,
    apply_start,
    canonicalize,
)
from .parser import parse_config, parse_script
from .semantics import replay, schedule, schedule_candidates, step, valid

__version__ = "0.1.0"
