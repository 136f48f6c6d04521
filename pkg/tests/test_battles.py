import numpy as np
import pytest

from caprank.arena import (
    BattleRecord,
    BattleSet,
    TooFewCaptioners,
    decide_outcome,
    generate_battles,
    merge_battle_sets,
    read_battles_csv,
    write_battles_csv,
)
from caprank.chem.split import SplitAssignment
from caprank.store import ArenaInputs, CaptionerMeta, DatasetManifest, EmbeddingMatrix, Molecule


def test_decide_outcome_examples():
    assert decide_outcome(0.1, 0.3) == "A"
    assert decide_outcome(0.3, 0.1) == "B"
    assert decide_outcome(0.2, 0.2) == "tie"
    assert decide_outcome(0.2, 0.2 + 1e-13) == "tie"  # inside the margin
    assert decide_outcome(0.2, 0.2 + 1e-9) == "A"


def test_battle_record_validation():
    with pytest.raises(ValueError):
        BattleRecord("d", 0, "m", "b", "a", "A")  # names out of order
    with pytest.raises(ValueError):
        BattleRecord("d", 0, "m", "a", "a", "A")
    with pytest.raises(ValueError):
        BattleRecord("d", 0, "m", "a", "b", "win")


def test_battle_set_validation():
    record = BattleRecord("d", 0, "m", "a", "b", "tie")
    with pytest.raises(TooFewCaptioners):
        BattleSet((record,), ("a",))
    with pytest.raises(ValueError):
        BattleSet((record,), ("a", "c"))


def arena_inputs(n=20, n_captioners=3, task="binary_classification", seed=0):
    rng = np.random.default_rng(seed)
    labels = (np.arange(n) % 2).astype(float)
    if task == "regression":
        labels = rng.standard_normal(n)
    molecules = tuple(Molecule(f"m{i:03d}", "C", float(labels[i])) for i in range(n))
    names = [f"cap{k}" for k in range(n_captioners)]
    manifest = DatasetManifest("toy", task, molecules, tuple(CaptionerMeta(n) for n in names))
    mol = EmbeddingMatrix(rng.standard_normal((n, 5)).astype(np.float32))
    caps = {
        name: EmbeddingMatrix(rng.standard_normal((n, 3)).astype(np.float32))
        for name in names
    }
    return ArenaInputs(manifest, mol, caps)


def split_of(n, fold=0, n_test=4):
    names = {}
    for i in range(n):
        if i < n - n_test - 6:
            names[f"m{i:03d}"] = "train"
        elif i < n - n_test:
            names[f"m{i:03d}"] = "preference"
        else:
            names[f"m{i:03d}"] = "test"
    return SplitAssignment(fold, names, [])


def test_battle_count_pairs_times_molecules():
    inputs = arena_inputs(n=20, n_captioners=3)
    battles = generate_battles(inputs, [split_of(20, n_test=4)])
    assert len(battles.battles) == 3 * 4  # 3 pairs x 4 test molecules
    assert battles.captioners == ("cap0", "cap1", "cap2")
    for record in battles.battles:
        assert record.a < record.b
        assert record.molecule_id.startswith("m")


def test_battles_two_folds_count():
    inputs = arena_inputs(n=24, n_captioners=3)
    splits = [split_of(24, fold=0), split_of(24, fold=1)]
    battles = generate_battles(inputs, splits)
    assert len(battles.battles) == 2 * 3 * 4


def test_single_captioner_rejected():
    inputs = arena_inputs(n_captioners=1)
    with pytest.raises(TooFewCaptioners, match="at least two"):
        generate_battles(inputs, [split_of(20)])


def test_generate_battles_deterministic_across_threads():
    inputs = arena_inputs(n=20, n_captioners=4, seed=3)
    splits = [split_of(20)]
    one = generate_battles(inputs, splits, threads=1)
    four = generate_battles(inputs, splits, threads=4)
    again = generate_battles(inputs, splits, threads=4)
    assert one.battles == four.battles == again.battles


def test_battles_csv_round_trip(tmp_path):
    inputs = arena_inputs(n=20, n_captioners=3, seed=5)
    battles = generate_battles(inputs, [split_of(20)])
    path = tmp_path / "battles.csv"
    write_battles_csv(battles, path)
    text = path.read_text()
    assert text.splitlines()[0] == "dataset,fold,molecule_id,captioner_a,captioner_b,outcome"
    assert "\r" not in text
    back = read_battles_csv(path)
    assert back.battles == battles.battles
    assert set(back.captioners) == set(battles.captioners)
    write_battles_csv(battles, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()


def test_merge_battle_sets():
    r1 = BattleRecord("d1", 0, "m", "a", "b", "A")
    r2 = BattleRecord("d2", 0, "m", "b", "c", "B")
    merged = merge_battle_sets(
        [BattleSet((r1,), ("a", "b")), BattleSet((r2,), ("b", "c"))]
    )
    assert merged.battles == (r1, r2)
    assert merged.captioners == ("a", "b", "c")
    assert merged.datasets() == ("d1", "d2")
