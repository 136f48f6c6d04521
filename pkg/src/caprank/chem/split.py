"""Scaffold-disjoint train/preference/valid/test splits."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .scaffold import scaffold_key_for

SPLIT_NAMES = ("train", "preference", "valid", "test")


class EmptyManifest(ValueError):
    pass


@dataclass(slots=True)
class SplitAssignment:
    fold: int
    assignment: dict[str, str]  # molecule id -> split name, manifest order
    warnings: list[str] = field(default_factory=list)

    def ids_in(self, split: str) -> list[str]:
        return [mid for mid, name in self.assignment.items() if name == split]


def scaffold_split(
    manifest,
    ratios: tuple[float, float, float, float] = (0.6, 0.2, 0.1, 0.1),
    base_seed: int = 0,
    folds: int = 1,
) -> list[SplitAssignment]:
    """Assign whole scaffold groups to splits, largest deficit first.

    Groups are shuffled with a fold-specific seed, then stable-sorted by
    descending size; each goes to the split whose expected count is furthest
    ahead of its current count (ties in train, preference, valid, test
    order).  Ties in the shuffle order therefore never reorder equal-size
    groups across folds with the same seed.
    """
    if len(ratios) != len(SPLIT_NAMES):
        raise ValueError(f"expected {len(SPLIT_NAMES)} ratios, got {len(ratios)}")
    if any(r < 0 for r in ratios):
        raise ValueError("split ratios must be non-negative")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {sum(ratios)!r}")
    if folds < 1:
        raise ValueError("folds must be >= 1")
    molecules = list(manifest.molecules)
    if not molecules:
        raise EmptyManifest(f"manifest {manifest.dataset!r} has no molecules")

    # Scaffold groups in first-appearance order; the key computation is the
    # expensive part, so do it once for all folds.
    groups: dict[str, list[str]] = {}
    for mol in molecules:
        groups.setdefault(scaffold_key_for(mol.smiles), []).append(mol.id)
    group_list = list(groups.values())

    total = len(molecules)
    expected = [r * total for r in ratios]
    out: list[SplitAssignment] = []
    for fold in range(folds):
        rng = np.random.default_rng(base_seed + fold)
        shuffled = [group_list[i] for i in rng.permutation(len(group_list))]
        shuffled.sort(key=len, reverse=True)  # stable: shuffle breaks ties

        counts = [0, 0, 0, 0]
        chosen: dict[str, str] = {}
        for group in shuffled:
            best = 0
            for k in range(1, len(SPLIT_NAMES)):
                if expected[k] - counts[k] > expected[best] - counts[best]:
                    best = k
            name = SPLIT_NAMES[best]
            counts[best] += len(group)
            for mid in group:
                chosen[mid] = name

        assignment = {mol.id: chosen[mol.id] for mol in molecules}
        warnings = [
            f"fold {fold}: split '{SPLIT_NAMES[k]}' is empty"
            for k in range(len(SPLIT_NAMES))
            if counts[k] == 0
        ]
        out.append(SplitAssignment(fold, assignment, warnings))
    return out


def write_split_file(path: str | Path, splits: list[SplitAssignment]) -> None:
    payload = [
        {"fold": s.fold, "assignment": s.assignment, "warnings": s.warnings}
        for s in splits
    ]
    text = json.dumps(payload, indent=2, ensure_ascii=True)
    Path(path).write_text(text + "\n", encoding="utf-8", newline="\n")


def read_split_file(path: str | Path) -> list[SplitAssignment]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        SplitAssignment(obj["fold"], dict(obj["assignment"]), list(obj["warnings"]))
        for obj in payload
    ]
