"""Win-rate matrices: head-to-head scores per dataset and macro-aggregated.

M[i][j] is the share of battles captioner i took from captioner j (ties
half).  The lower triangle is mirrored as 1 - M[i][j], so antisymmetry holds
bit-exactly.  The aggregate matrix is the unweighted mean over the datasets
where a pair actually met.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ..store import IoFailure
from .battles import BattleSet

AGGREGATE = "aggregate"


class EmptyScope(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class WinRateMatrix:
    scope: str
    captioners: tuple[str, ...]
    values: np.ndarray  # (n, n); NaN marks pairs that never met (and the diagonal)

    def value(self, i: str, j: str) -> float:
        x = self.captioners.index(i)
        y = self.captioners.index(j)
        return float(self.values[x, y])


def _single_dataset_matrix(battle_set: BattleSet, dataset: str) -> np.ndarray:
    names = battle_set.captioners
    index = {name: k for k, name in enumerate(names)}
    credit: dict[tuple[int, int], list[float]] = {}  # (lo, hi) -> [lo credit, battles]
    seen_any = False
    for record in battle_set.battles:
        if record.dataset != dataset:
            continue
        seen_any = True
        u = index[record.a]
        v = index[record.b]
        lo, hi = (u, v) if u < v else (v, u)
        cell = credit.setdefault((lo, hi), [0.0, 0.0])
        if record.outcome == "tie":
            cell[0] += 0.5
        elif (record.outcome == "A") == (u == lo):
            cell[0] += 1.0
        cell[1] += 1.0
    if not seen_any:
        raise EmptyScope(f"no battles for dataset {dataset!r}")
    values = np.full((len(names), len(names)), np.nan)
    for (lo, hi), (credit_lo, total) in credit.items():
        values[lo, hi] = credit_lo / total
        values[hi, lo] = 1.0 - values[lo, hi]
    return values


def win_rate_matrix(battle_set: BattleSet, scope: str = AGGREGATE) -> WinRateMatrix:
    if scope != AGGREGATE:
        return WinRateMatrix(scope, battle_set.captioners, _single_dataset_matrix(battle_set, scope))
    datasets = battle_set.datasets()
    if not datasets:
        raise EmptyScope("no battles at all")
    per_dataset = [_single_dataset_matrix(battle_set, d) for d in datasets]
    n = len(battle_set.captioners)
    values = np.full((n, n), np.nan)
    for x in range(n):
        for y in range(x + 1, n):
            cells = [m[x, y] for m in per_dataset if not math.isnan(m[x, y])]
            if cells:
                values[x, y] = sum(cells) / len(cells)
                values[y, x] = 1.0 - values[x, y]
    return WinRateMatrix(AGGREGATE, battle_set.captioners, values)


def write_winrate_csv(matrix: WinRateMatrix, path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([""] + list(matrix.captioners))
            for x, name in enumerate(matrix.captioners):
                row: list[str] = [name]
                for y in range(len(matrix.captioners)):
                    cell = matrix.values[x, y]
                    row.append("" if math.isnan(cell) else f"{cell:.6f}")
                writer.writerow(row)
    except OSError as exc:
        raise IoFailure(f"cannot write win-rate file {path}: {exc}") from exc
