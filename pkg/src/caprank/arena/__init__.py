"""Battle generation, Bradley-Terry ratings, and win-rate matrices."""

from .battles import (
    TIE_MARGIN,
    BattleRecord,
    BattleSet,
    TooFewCaptioners,
    decide_outcome,
    generate_battles,
    merge_battle_sets,
    read_battles_csv,
    write_battles_csv,
)
from .rating import (
    RATING_ANCHOR,
    RATING_SCALE,
    SMOOTHING,
    NoBattles,
    RatingEntry,
    RatingTable,
    bootstrap_ratings,
    fit_bradley_terry,
    rating_from_theta,
    read_ratings_csv,
    write_ratings_csv,
)
from .winrate import (
    AGGREGATE,
    EmptyScope,
    WinRateMatrix,
    win_rate_matrix,
    write_winrate_csv,
)

__all__ = [
    "AGGREGATE",
    "BattleRecord",
    "BattleSet",
    "EmptyScope",
    "NoBattles",
    "RATING_ANCHOR",
    "RATING_SCALE",
    "RatingEntry",
    "RatingTable",
    "SMOOTHING",
    "TIE_MARGIN",
    "TooFewCaptioners",
    "WinRateMatrix",
    "bootstrap_ratings",
    "decide_outcome",
    "fit_bradley_terry",
    "generate_battles",
    "merge_battle_sets",
    "rating_from_theta",
    "read_battles_csv",
    "read_ratings_csv",
    "win_rate_matrix",
    "write_battles_csv",
    "write_ratings_csv",
    "write_winrate_csv",
]
