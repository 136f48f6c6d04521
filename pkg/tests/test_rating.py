import math

import numpy as np
import pytest

from caprank.arena import (
    BattleRecord,
    BattleSet,
    NoBattles,
    RatingEntry,
    bootstrap_ratings,
    fit_bradley_terry,
    read_ratings_csv,
    write_ratings_csv,
)

from helpers import simulate_bt_battles


def head_to_head_set(wins_a, wins_b, ties=0, a="alpha", b="beta"):
    records = []
    k = 0
    for _ in range(wins_a):
        records.append(BattleRecord("d", 0, f"m{k}", a, b, "A"))
        k += 1
    for _ in range(wins_b):
        records.append(BattleRecord("d", 0, f"m{k}", a, b, "B"))
        k += 1
    for _ in range(ties):
        records.append(BattleRecord("d", 0, f"m{k}", a, b, "tie"))
        k += 1
    return BattleSet(tuple(records), (a, b))


def test_two_player_closed_form():
    table = fit_bradley_terry(head_to_head_set(75, 25)).by_name()
    gap = table["alpha"].rating - table["beta"].rating
    assert abs(gap - 400.0 * math.log10(3.0)) < 0.5  # smoothing shifts < 0.5
    # smoothed MLE is exactly ln(75.01/25.01)
    assert table["alpha"].theta - table["beta"].theta == pytest.approx(
        math.log(75.01 / 25.01), abs=1e-7
    )


def test_all_pairs_even_gives_exactly_1000():
    names = ["a", "b", "c", "d"]
    records = []
    k = 0
    for i in range(4):
        for j in range(i + 1, 4):
            for _ in range(10):
                records.append(BattleRecord("d", 0, f"m{k}", names[i], names[j], "A"))
                k += 1
                records.append(BattleRecord("d", 0, f"m{k}", names[i], names[j], "B"))
                k += 1
    table = fit_bradley_terry(BattleSet(tuple(records), tuple(names)))
    for entry in table.entries:
        assert entry.rating == 1000.0
        assert entry.theta == 0.0


def test_ties_count_half():
    # all ties -> even strengths despite lopsided outcome labels being absent
    table = fit_bradley_terry(head_to_head_set(0, 0, ties=30)).by_name()
    assert table["alpha"].rating == pytest.approx(1000.0, abs=1e-9)
    # 60 wins + 40 "half-win ties" vs 40: equivalent to 70/30... check credit math:
    # w_ab = 60 + 0.5*20, w_ba = 20 + 0.5*20 -> gap ln(70.01/30.01)
    mixed = fit_bradley_terry(head_to_head_set(60, 20, ties=20)).by_name()
    gap = mixed["alpha"].theta - mixed["beta"].theta
    assert gap == pytest.approx(math.log(70.01 / 30.01), abs=1e-7)


def test_theta_mean_zero_and_scale():
    rng = np.random.default_rng(0)
    battles = simulate_bt_battles([0.8, 0.2, -0.3, -0.7], 2000, rng)
    table = fit_bradley_terry(battles)
    thetas = [e.theta for e in table.entries]
    assert abs(sum(thetas) / len(thetas)) < 1e-12
    for e in table.entries:
        assert e.rating == pytest.approx(1000.0 + (400.0 / math.log(10.0)) * e.theta)
        assert e.ci_low == e.rating == e.ci_high  # point fit collapses the CI


def test_log_likelihood_trace_monotone():
    rng = np.random.default_rng(1)
    battles = simulate_bt_battles([1.0, 0.5, 0.0, -0.5, -1.0], 3000, rng)
    table = fit_bradley_terry(battles)
    trace = table.log_likelihood_trace
    assert len(trace) >= 2
    for before, after in zip(trace, trace[1:]):
        assert after >= before - 1e-9 * (1.0 + abs(before))


def test_no_battles_rejected():
    with pytest.raises(NoBattles):
        fit_bradley_terry(BattleSet((), ("a", "b")))


def test_label_swap_covariance():
    rng = np.random.default_rng(2)
    battles = simulate_bt_battles([0.9, 0.0, -0.9], 1500, rng)
    renames = {"cap00": "zeta", "cap01": "eta", "cap02": "iota"}
    swapped_records = []
    for r in battles.battles:
        a, b = renames[r.a], renames[r.b]
        if a < b:
            swapped_records.append(BattleRecord(r.dataset, r.fold, r.molecule_id, a, b, r.outcome))
        else:
            flipped = {"A": "B", "B": "A", "tie": "tie"}[r.outcome]
            swapped_records.append(BattleRecord(r.dataset, r.fold, r.molecule_id, b, a, flipped))
    swapped = BattleSet(
        tuple(swapped_records), tuple(renames[n] for n in battles.captioners)
    )
    base = fit_bradley_terry(battles).by_name()
    renamed = fit_bradley_terry(swapped).by_name()
    for old, new in renames.items():
        assert renamed[new].rating == base[old].rating


def test_undefeated_player_finite_rating():
    table = fit_bradley_terry(head_to_head_set(50, 0)).by_name()
    assert math.isfinite(table["alpha"].rating)
    assert table["alpha"].rating > table["beta"].rating
    # smoothing pins the gap at ln(50.01/0.01)
    assert table["alpha"].theta - table["beta"].theta == pytest.approx(
        math.log(50.01 / 0.01), rel=1e-6
    )


def test_roster_member_without_battles_sits_at_anchor():
    records = tuple(
        BattleRecord("d", 0, f"m{k}", "alpha", "beta", "A") for k in range(10)
    )
    table = fit_bradley_terry(BattleSet(records, ("alpha", "beta", "ghost"))).by_name()
    assert table["ghost"].rating == 1000.0
    assert table["ghost"].theta == 0.0


def test_bootstrap_deterministic_and_cis_contain_point():
    rng = np.random.default_rng(3)
    battles = simulate_bt_battles([0.6, 0.1, -0.7], 800, rng)
    one = bootstrap_ratings(battles, rounds=8, per_round=500, seed=11)
    two = bootstrap_ratings(battles, rounds=8, per_round=500, seed=11)
    assert one == two
    point = fit_bradley_terry(battles).by_name()
    for entry in one.entries:
        assert entry.ci_low <= entry.rating <= entry.ci_high
        assert entry.rating == point[entry.captioner].rating
    # different seed moves the interval ends
    three = bootstrap_ratings(battles, rounds=8, per_round=500, seed=12)
    assert any(
        a.ci_low != b.ci_low or a.ci_high != b.ci_high
        for a, b in zip(one.entries, three.entries)
    )


def test_bootstrap_validates_knobs():
    battles = head_to_head_set(3, 1)
    with pytest.raises(ValueError):
        bootstrap_ratings(battles, rounds=0, per_round=10, seed=0)
    with pytest.raises(ValueError):
        bootstrap_ratings(battles, rounds=2, per_round=0, seed=0)


def test_bootstrap_stratified_vs_pooled_differ():
    # one tiny dataset + one large: stratification oversamples the tiny one
    rng = np.random.default_rng(4)
    big = simulate_bt_battles([0.8, -0.8], 2000, rng, dataset="big")
    small_records = tuple(
        BattleRecord("small", 0, f"s{k}", "cap00", "cap01", "B") for k in range(20)
    )
    merged = BattleSet(big.battles + small_records, big.captioners)
    strat = bootstrap_ratings(merged, rounds=6, per_round=400, seed=5, stratified=True)
    pooled = bootstrap_ratings(merged, rounds=6, per_round=400, seed=5, stratified=False)
    assert any(
        a.ci_low != b.ci_low or a.ci_high != b.ci_high
        for a, b in zip(strat.entries, pooled.entries)
    )


def test_planted_skill_recovery_small():
    rng = np.random.default_rng(6)
    planted = np.linspace(1.0, -1.0, 6)
    battles = simulate_bt_battles(planted, 30_000, rng)
    table = fit_bradley_terry(battles)
    fitted = [table.by_name()[f"cap{k:02d}"].theta for k in range(6)]
    order = np.argsort(fitted)[::-1]
    assert list(order) == list(range(6))  # planted order recovered exactly
    assert np.corrcoef(planted, fitted)[0, 1] > 0.99


def test_rating_entry_invariant():
    with pytest.raises(ValueError):
        RatingEntry("x", 1000.0, 1001.0, 1002.0, 0.0)


def test_ratings_csv_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    battles = simulate_bt_battles([0.4, -0.4], 300, rng)
    table = bootstrap_ratings(battles, rounds=5, per_round=200, seed=1)
    path = tmp_path / "ratings.csv"
    write_ratings_csv(table, path)
    text = path.read_text()
    assert text.splitlines()[0] == "captioner,rating,ci_low,ci_high,theta"
    back = read_ratings_csv(path)
    assert back.by_name() == table.by_name()
    # leaderboard order: rating descending
    ratings = [float(line.split(",")[1]) for line in text.splitlines()[1:]]
    assert ratings == sorted(ratings, reverse=True)
    write_ratings_csv(table, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()
