"""Bradley-Terry ratings with bootstrap confidence intervals.

Battle outcomes are aggregated into pairwise win credits (ties worth half a
win, plus a small smoothing credit in both directions of every pair that
met, so an undefeated player keeps a finite rating).  Strengths are fitted
by the Zermelo fixed point, whose every iteration provably increases the
smoothed log-likelihood; the trace is kept so that property stays testable.
Log-strengths are mean-centered and displayed on an Elo-like scale.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ..store import IoFailure
from .battles import BattleSet

SMOOTHING = 0.01
THETA_TOL = 1e-8
MAX_ITERATIONS = 100_000
RATING_ANCHOR = 1000.0
RATING_SCALE = 400.0 / math.log(10.0)


class NoBattles(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class RatingEntry:
    captioner: str
    rating: float
    ci_low: float
    ci_high: float
    theta: float

    def __post_init__(self):
        if not (self.ci_low <= self.rating <= self.ci_high):
            raise ValueError(
                f"{self.captioner}: rating {self.rating} outside CI "
                f"[{self.ci_low}, {self.ci_high}]"
            )


@dataclass(frozen=True, slots=True)
class RatingTable:
    entries: tuple[RatingEntry, ...]
    log_likelihood_trace: tuple[float, ...] = ()

    def by_name(self) -> dict[str, RatingEntry]:
        return {entry.captioner: entry for entry in self.entries}

    def sorted_by_rating(self) -> tuple[RatingEntry, ...]:
        return tuple(
            sorted(self.entries, key=lambda e: (-e.rating, e.captioner))
        )


def rating_from_theta(theta: float) -> float:
    return RATING_ANCHOR + RATING_SCALE * theta


@dataclass(slots=True)
class _CodedBattles:
    """Array view of a BattleSet for cheap resampling and aggregation.

    Each battle is coded as pair_id * 3 + outcome, with outcome relative to
    the lower roster index (0: low wins, 1: high wins, 2: tie), so one
    bincount over a sample of battle indices yields all pair tallies.
    """

    names: tuple[str, ...]
    codes: np.ndarray  # (n_battles,) int64
    pair_lo: np.ndarray  # (n_pairs,) roster index of the lower-index player
    pair_hi: np.ndarray
    dataset_names: tuple[str, ...]
    battles_by_dataset: tuple[np.ndarray, ...]  # battle indices per dataset


def _code_battles(battle_set: BattleSet) -> _CodedBattles:
    names = battle_set.captioners
    index = {name: k for k, name in enumerate(names)}
    pair_ids: dict[tuple[int, int], int] = {}
    codes = np.empty(len(battle_set.battles), dtype=np.int64)
    by_dataset: dict[str, list[int]] = {}
    for k, record in enumerate(battle_set.battles):
        u = index[record.a]
        v = index[record.b]
        lo, hi = (u, v) if u < v else (v, u)
        pair = pair_ids.setdefault((lo, hi), len(pair_ids))
        if record.outcome == "tie":
            outcome = 2
        elif (record.outcome == "A") == (u == lo):
            outcome = 0
        else:
            outcome = 1
        codes[k] = pair * 3 + outcome
        by_dataset.setdefault(record.dataset, []).append(k)
    pair_lo = np.fromiter((p[0] for p in pair_ids), dtype=np.int64, count=len(pair_ids))
    pair_hi = np.fromiter((p[1] for p in pair_ids), dtype=np.int64, count=len(pair_ids))
    datasets = tuple(by_dataset)
    groups = tuple(np.asarray(by_dataset[d], dtype=np.int64) for d in datasets)
    return _CodedBattles(names, codes, pair_lo, pair_hi, datasets, groups)


def _fit_from_counts(
    n_players: int,
    pair_lo: np.ndarray,
    pair_hi: np.ndarray,
    wins_lo: np.ndarray,
    wins_hi: np.ndarray,
    ties: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Zermelo fixed point; returns (theta, present mask, likelihood trace)."""
    met = wins_lo + wins_hi + ties > 0
    lo = pair_lo[met]
    hi = pair_hi[met]
    w_lo = wins_lo[met] + 0.5 * ties[met] + SMOOTHING
    w_hi = wins_hi[met] + 0.5 * ties[met] + SMOOTHING
    present = np.zeros(n_players, dtype=bool)
    present[lo] = True
    present[hi] = True

    wins_total = np.zeros(n_players)
    np.add.at(wins_total, lo, w_lo)
    np.add.at(wins_total, hi, w_hi)
    n_pair = w_lo + w_hi

    log_pi = np.zeros(n_players)
    trace: list[float] = []
    for _ in range(MAX_ITERATIONS):
        pi = np.exp(log_pi)
        shared = n_pair / (pi[lo] + pi[hi])
        denom = np.zeros(n_players)
        np.add.at(denom, lo, shared)
        np.add.at(denom, hi, shared)
        new_log = np.where(present, np.log(np.where(present, wins_total, 1.0))
                           - np.log(np.where(present, denom, 1.0)), 0.0)
        new_log[present] -= new_log[present].mean()
        delta = np.max(np.abs(new_log - log_pi)) if n_players else 0.0
        log_pi = new_log
        gap = log_pi[lo] - log_pi[hi]
        trace.append(float(np.sum(w_lo * _log_sigmoid(gap) + w_hi * _log_sigmoid(-gap))))
        if delta < THETA_TOL:
            break
    return log_pi, present, trace


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -x)


def _counts_for_sample(coded: _CodedBattles, battle_indices: np.ndarray | None):
    codes = coded.codes if battle_indices is None else coded.codes[battle_indices]
    tally = np.bincount(codes, minlength=3 * coded.pair_lo.shape[0]).reshape(-1, 3)
    return tally[:, 0].astype(float), tally[:, 1].astype(float), tally[:, 2].astype(float)


def _table_from_fit(coded: _CodedBattles, theta, present, trace, cis=None) -> RatingTable:
    entries = []
    for k, name in enumerate(coded.names):
        t = float(theta[k]) if present[k] else 0.0
        rating = rating_from_theta(t)
        if cis is None:
            low = high = rating
        else:
            low = min(float(cis[0][k]), rating)
            high = max(float(cis[1][k]), rating)
        entries.append(RatingEntry(name, rating, low, high, t))
    return RatingTable(tuple(entries), tuple(trace))


def fit_bradley_terry(battle_set: BattleSet) -> RatingTable:
    """Point ratings from the full battle set (CIs collapse to the rating)."""
    if not battle_set.battles:
        raise NoBattles("battle set is empty")
    coded = _code_battles(battle_set)
    wins_lo, wins_hi, ties = _counts_for_sample(coded, None)
    theta, present, trace = _fit_from_counts(
        len(coded.names), coded.pair_lo, coded.pair_hi, wins_lo, wins_hi, ties
    )
    return _table_from_fit(coded, theta, present, trace)


def _sample_indices(
    coded: _CodedBattles, rng: np.random.Generator, per_round: int, stratified: bool
) -> np.ndarray:
    if not stratified or len(coded.battles_by_dataset) == 1:
        return rng.integers(0, coded.codes.shape[0], per_round)
    picks = rng.integers(0, len(coded.battles_by_dataset), per_round)
    sizes = np.array([g.shape[0] for g in coded.battles_by_dataset])
    within = (rng.random(per_round) * sizes[picks]).astype(np.int64)
    flat = np.concatenate(coded.battles_by_dataset)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    return flat[offsets[picks] + within]


def bootstrap_ratings(
    battle_set: BattleSet,
    rounds: int = 10,
    per_round: int = 250_000,
    seed: int = 0,
    stratified: bool = True,
) -> RatingTable:
    """Point ratings plus percentile CIs over resampled battle sets.

    Each round draws per_round battles with replacement -- by default a
    dataset is chosen uniformly first, then a battle uniformly within it --
    and refits.  CIs are interpolated 2.5/97.5 percentiles of the round
    ratings, widened if needed to contain the point rating.  A captioner
    absent from a round's sample scores the anchor rating for that round.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if per_round < 1:
        raise ValueError("per_round must be >= 1")
    if not battle_set.battles:
        raise NoBattles("battle set is empty")
    coded = _code_battles(battle_set)
    wins_lo, wins_hi, ties = _counts_for_sample(coded, None)
    theta, present, trace = _fit_from_counts(
        len(coded.names), coded.pair_lo, coded.pair_hi, wins_lo, wins_hi, ties
    )

    round_ratings = np.empty((rounds, len(coded.names)))
    for r in range(rounds):
        rng = np.random.default_rng((seed, r))
        idx = _sample_indices(coded, rng, per_round, stratified)
        s_lo, s_hi, s_ties = _counts_for_sample(coded, idx)
        r_theta, r_present, _ = _fit_from_counts(
            len(coded.names), coded.pair_lo, coded.pair_hi, s_lo, s_hi, s_ties
        )
        round_ratings[r] = [
            rating_from_theta(float(r_theta[k]) if r_present[k] else 0.0)
            for k in range(len(coded.names))
        ]
    low = np.percentile(round_ratings, 2.5, axis=0)
    high = np.percentile(round_ratings, 97.5, axis=0)
    return _table_from_fit(coded, theta, present, trace, cis=(low, high))


CSV_HEADER = ["captioner", "rating", "ci_low", "ci_high", "theta"]


def write_ratings_csv(table: RatingTable, path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for e in table.sorted_by_rating():
                writer.writerow(
                    [e.captioner, repr(e.rating), repr(e.ci_low), repr(e.ci_high), repr(e.theta)]
                )
    except OSError as exc:
        raise IoFailure(f"cannot write ratings file {path}: {exc}") from exc


def read_ratings_csv(path) -> RatingTable:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != CSV_HEADER:
                raise ValueError(f"bad ratings header in {path}: {header!r}")
            entries = []
            for parts in reader:
                if len(parts) != 5:
                    raise ValueError(f"bad ratings row in {path}: {parts!r}")
                entries.append(
                    RatingEntry(
                        parts[0], float(parts[1]), float(parts[2]), float(parts[3]), float(parts[4])
                    )
                )
    except OSError as exc:
        raise IoFailure(f"cannot read ratings file {path}: {exc}") from exc
    return RatingTable(tuple(entries))
