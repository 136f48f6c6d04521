"""Battles: per-molecule pairwise outcomes between caption sources.

Every fold x unordered captioner pair runs one joint model; each test
molecule then contributes one battle decided by which caption variant got
the lower prediction error.  Error gaps below TIE_MARGIN count as ties.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ..chem.split import SplitAssignment
from ..fusion.pairs import PairErrorTable, head_to_head
from ..fusion.svm import SvmHyperparams
from ..store import ArenaInputs, IoFailure

TIE_MARGIN = 1e-12
OUTCOMES = ("A", "B", "tie")


class TooFewCaptioners(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class BattleRecord:
    dataset: str
    fold: int
    molecule_id: str
    a: str
    b: str
    outcome: str

    def __post_init__(self):
        if self.a >= self.b:
            raise ValueError(f"battle names must satisfy a < b, got {self.a!r} >= {self.b!r}")
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {self.outcome!r}")


@dataclass(frozen=True, slots=True)
class BattleSet:
    battles: tuple[BattleRecord, ...]
    captioners: tuple[str, ...]

    def __post_init__(self):
        if len(self.captioners) < 2:
            raise TooFewCaptioners("need at least two captioners")
        roster = set(self.captioners)
        for record in self.battles:
            if record.a not in roster or record.b not in roster:
                raise ValueError(
                    f"battle names {record.a!r}/{record.b!r} missing from roster"
                )

    def datasets(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for record in self.battles:
            seen.setdefault(record.dataset, None)
        return tuple(seen)


def decide_outcome(error_a: float, error_b: float) -> str:
    if error_a < error_b - TIE_MARGIN:
        return "A"
    if error_b < error_a - TIE_MARGIN:
        return "B"
    return "tie"


def generate_battles(
    inputs: ArenaInputs,
    splits: list[SplitAssignment],
    hp: SvmHyperparams = SvmHyperparams(),
    seed_base: int = 0,
    threads: int = 1,
) -> BattleSet:
    """All battles for one dataset: every fold, every pair, every test molecule."""
    roster = tuple(inputs.manifest.captioner_names())
    if len(roster) < 2:
        raise TooFewCaptioners("need at least two captioners")
    pairs = [
        tuple(sorted((roster[x], roster[y])))
        for x in range(len(roster))
        for y in range(x + 1, len(roster))
    ]
    jobs = [(split, pair) for split in splits for pair in pairs]

    def run(job) -> PairErrorTable:
        split, pair = job
        return head_to_head(pair, inputs, split, hp, seed_base)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            tables = list(pool.map(run, jobs))
    else:
        tables = [run(job) for job in jobs]

    records = []
    for (split, pair), table in zip(jobs, tables):
        for molecule_id in split.ids_in("test"):
            error_a, error_b = table.per_molecule[molecule_id]
            records.append(
                BattleRecord(
                    inputs.manifest.dataset,
                    split.fold,
                    molecule_id,
                    pair[0],
                    pair[1],
                    decide_outcome(error_a, error_b),
                )
            )
    return BattleSet(tuple(records), roster)


def merge_battle_sets(sets: list[BattleSet]) -> BattleSet:
    """Pool several datasets' battles under the union roster."""
    if not sets:
        raise TooFewCaptioners("need at least two captioners")
    battles: list[BattleRecord] = []
    roster: dict[str, None] = {}
    for battle_set in sets:
        battles.extend(battle_set.battles)
        for name in battle_set.captioners:
            roster.setdefault(name, None)
    return BattleSet(tuple(battles), tuple(roster))


CSV_HEADER = ["dataset", "fold", "molecule_id", "captioner_a", "captioner_b", "outcome"]


def write_battles_csv(battle_set: BattleSet, path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in battle_set.battles:
                writer.writerow([r.dataset, r.fold, r.molecule_id, r.a, r.b, r.outcome])
    except OSError as exc:
        raise IoFailure(f"cannot write battles file {path}: {exc}") from exc


def read_battles_csv(path) -> BattleSet:
    """Load battles; the roster is the sorted set of names seen in the file."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != CSV_HEADER:
                raise ValueError(f"bad battles header in {path}: {header!r}")
            records = []
            names: set[str] = set()
            for parts in reader:
                if len(parts) != 6:
                    raise ValueError(f"bad battles row in {path}: {parts!r}")
                dataset, fold, molecule_id, a, b, outcome = parts
                records.append(
                    BattleRecord(dataset, int(fold), molecule_id, a, b, outcome)
                )
                names.add(a)
                names.add(b)
    except OSError as exc:
        raise IoFailure(f"cannot read battles file {path}: {exc}") from exc
    return BattleSet(tuple(records), tuple(sorted(names)))
