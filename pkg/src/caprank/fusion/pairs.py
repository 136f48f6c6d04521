"""Head-to-head joint models: one SVM scores two caption sources.

For a pair (i, j) the training set holds two rows per preference molecule,
x_ci + x_m and x_cj + x_m (concatenated), with the same label.  One model is
trained on the union and scores both caption variants of every test
molecule, so any error difference comes from the caption embedding alone.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from ..chem.split import SplitAssignment
from ..store import BINARY_CLASSIFICATION, ArenaInputs
from .standardize import FeatureStandardizer
from .svm import LinearModel, SvmHyperparams, predict_many, train_classifier, train_regressor


class EmptySplit(ValueError):
    def __init__(self, split: str):
        super().__init__(f"split {split!r} has no molecules")
        self.split = split


@dataclass(slots=True)
class PairErrorTable:
    pair: tuple[str, str]
    per_molecule: dict[str, tuple[float, float]]  # id -> (error_i, error_j)


@dataclass(slots=True)
class SingleSourceScores:
    captioner: str
    molecule_ids: tuple[str, ...]  # test split, manifest order
    scores: np.ndarray
    labels: np.ndarray


def pair_seed(dataset: str, fold: int, i: str, j: str, seed_base: int) -> int:
    """Stable per-pair seed, symmetric in the pair names."""
    a, b = sorted((i, j))
    text = f"{dataset}|{fold}|{a}|{b}|{seed_base}"
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def sigmoid(score: float) -> float:
    # stable in both tails
    if score >= 0.0:
        return 1.0 / (1.0 + math.exp(-score))
    z = math.exp(score)
    return z / (1.0 + z)


def per_molecule_error(task: str, score: float, label: float) -> float:
    if task == BINARY_CLASSIFICATION:
        return abs(sigmoid(score) - label)
    return abs(score - label)


def _errors_for_scores(task: str, scores: np.ndarray, labels: np.ndarray) -> np.ndarray:
    return np.array(
        [per_molecule_error(task, float(s), float(l)) for s, l in zip(scores, labels)]
    )


def head_to_head(
    pair: tuple[str, str],
    inputs: ArenaInputs,
    split: SplitAssignment,
    hp: SvmHyperparams = SvmHyperparams(),
    seed_base: int = 0,
) -> PairErrorTable:
    name_i, name_j = pair
    manifest = inputs.manifest
    emb_i = inputs.caption_embeddings[name_i].values
    emb_j = inputs.caption_embeddings[name_j].values
    emb_m = inputs.molecule_embeddings.values

    index = manifest.molecule_index()
    pref_ids = split.ids_in("preference")
    test_ids = split.ids_in("test")
    if not pref_ids:
        raise EmptySplit("preference")
    if not test_ids:
        raise EmptySplit("test")
    pref_rows = np.array([index[mid] for mid in pref_ids])
    test_rows = np.array([index[mid] for mid in test_ids])
    labels = manifest.labels()

    # Two training rows per molecule.  Their order is decided by the caption
    # bytes, not by the pair names, so swapping the two caption matrices
    # reproduces the identical training matrix and therefore the identical
    # model: the per-molecule errors swap exactly.
    cap_dim = emb_i.shape[1]
    X_train = np.empty((2 * len(pref_rows), cap_dim + emb_m.shape[1]))
    y_train = np.empty(2 * len(pref_rows))
    for k, row in enumerate(pref_rows):
        ci = emb_i[row]
        cj = emb_j[row]
        first, second = (ci, cj) if ci.tobytes() <= cj.tobytes() else (cj, ci)
        X_train[2 * k, :cap_dim] = first
        X_train[2 * k, cap_dim:] = emb_m[row]
        X_train[2 * k + 1, :cap_dim] = second
        X_train[2 * k + 1, cap_dim:] = emb_m[row]
        y_train[2 * k] = labels[row]
        y_train[2 * k + 1] = labels[row]

    standardizer = FeatureStandardizer().fit(X_train)
    seed = pair_seed(manifest.dataset, split.fold, name_i, name_j, seed_base)
    hp_pair = SvmHyperparams(hp.C, hp.epsilon, hp.tol, hp.max_epochs, seed)
    trainer = (
        train_classifier if manifest.task == BINARY_CLASSIFICATION else train_regressor
    )
    model: LinearModel = trainer(
        standardizer.transform(X_train), y_train, hp_pair, standardizer
    )

    X_test_i = np.hstack([emb_i[test_rows], emb_m[test_rows]])
    X_test_j = np.hstack([emb_j[test_rows], emb_m[test_rows]])
    scores_i = predict_many(model, X_test_i)
    scores_j = predict_many(model, X_test_j)
    test_labels = labels[test_rows]
    errors_i = _errors_for_scores(manifest.task, scores_i, test_labels)
    errors_j = _errors_for_scores(manifest.task, scores_j, test_labels)

    table = {
        mid: (float(errors_i[k]), float(errors_j[k])) for k, mid in enumerate(test_ids)
    }
    return PairErrorTable((name_i, name_j), table)


def single_source_scores(
    name: str,
    inputs: ArenaInputs,
    split: SplitAssignment,
    hp: SvmHyperparams = SvmHyperparams(),
    seed_base: int = 0,
) -> SingleSourceScores:
    """Train on one captioner's rows alone and score the test molecules.

    Same protocol as head_to_head minus the pairing: one row per preference
    molecule, x_c + x_m, used for leaderboard metrics of a single source.
    """
    manifest = inputs.manifest
    emb_c = inputs.caption_embeddings[name].values
    emb_m = inputs.molecule_embeddings.values

    index = manifest.molecule_index()
    pref_ids = split.ids_in("preference")
    test_ids = split.ids_in("test")
    if not pref_ids:
        raise EmptySplit("preference")
    if not test_ids:
        raise EmptySplit("test")
    pref_rows = np.array([index[mid] for mid in pref_ids])
    test_rows = np.array([index[mid] for mid in test_ids])
    labels = manifest.labels()

    X_train = np.hstack([emb_c[pref_rows], emb_m[pref_rows]])
    y_train = labels[pref_rows]
    standardizer = FeatureStandardizer().fit(X_train)
    seed = pair_seed(manifest.dataset, split.fold, name, name, seed_base)
    hp_one = SvmHyperparams(hp.C, hp.epsilon, hp.tol, hp.max_epochs, seed)
    trainer = (
        train_classifier if manifest.task == BINARY_CLASSIFICATION else train_regressor
    )
    model: LinearModel = trainer(
        standardizer.transform(X_train), y_train, hp_one, standardizer
    )
    scores = predict_many(model, np.hstack([emb_c[test_rows], emb_m[test_rows]]))
    return SingleSourceScores(name, tuple(test_ids), scores, labels[test_rows])
