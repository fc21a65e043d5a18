"""floorkit: vector-floorplan geometry kernel and evaluation toolkit."""

from .geometry import (
    DEFAULT_CHORD_TOL,
    DEFAULT_SNAP_TOL,
    MAX_CURVATURE,
    Floorplan,
    Opening,
    Point2,
    Polygon,
    Room,
    Wall,
    arc_point,
    external_boundary,
    is_manhattan,
    polygon_iou,
    room_polygon,
    wall_centerline_length,
    wall_footprint,
)
from .metrics import EvalReport, MatchConfig, eval_benchmark, eval_pair
from .reward import (
    GroupSample,
    RewardBreakdown,
    RewardWeights,
    compute_reward,
    gating_alpha,
    group_advantages,
    grpo_objective,
)
from .schema_io import NormalizationTransform, emit, normalize, parse
from .tokens import (
    CompressionDict,
    TokenSequence,
    compress,
    decompress,
    default_dict,
    plain_token_count,
    token_count,
)
from .validator import ValidityReport, validate, validity_rate

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CHORD_TOL",
    "DEFAULT_SNAP_TOL",
    "MAX_CURVATURE",
    "CompressionDict",
    "EvalReport",
    "Floorplan",
    "GroupSample",
    "MatchConfig",
    "NormalizationTransform",
    "Opening",
    "Point2",
    "Polygon",
    "RewardBreakdown",
    "RewardWeights",
    "Room",
    "TokenSequence",
    "ValidityReport",
    "Wall",
    "arc_point",
    "compress",
    "compute_reward",
    "decompress",
    "default_dict",
    "emit",
    "eval_benchmark",
    "eval_pair",
    "external_boundary",
    "gating_alpha",
    "group_advantages",
    "grpo_objective",
    "is_manhattan",
    "normalize",
    "parse",
    "plain_token_count",
    "polygon_iou",
    "room_polygon",
    "token_count",
    "validate",
    "validity_rate",
    "wall_centerline_length",
    "wall_footprint",
]
