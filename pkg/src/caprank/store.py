"""On-disk data model: manifests, captioner metadata, binary embeddings.

Embedding file layout: magic "EMB1" (4 ASCII bytes), rows (u32 LE), dim
(u32 LE), then rows x dim IEEE-754 binary32 values, little-endian,
row-major, no padding.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"EMB1"

BINARY_CLASSIFICATION = "binary_classification"
REGRESSION = "regression"
TASKS = (BINARY_CLASSIFICATION, REGRESSION)

REPRESENTATIONS = ("smiles", "fragments", "none")


class StoreError(ValueError):
    pass


class MalformedJson(StoreError):
    pass


class DuplicateMoleculeId(StoreError):
    pass


class BadLabel(StoreError):
    def __init__(self, task: str, molecule_id: str, label):
        super().__init__(f"bad label {label!r} for task {task!r} on molecule {molecule_id!r}")
        self.task = task
        self.molecule_id = molecule_id


class BadMagic(StoreError):
    pass


class RowCountMismatch(StoreError):
    def __init__(self, found: int, expected: int, path=""):
        super().__init__(f"embedding file has {found} rows, expected {expected} ({path})")
        self.found = found
        self.expected = expected


class NonFiniteValue(StoreError):
    def __init__(self, row: int, col: int, path=""):
        super().__init__(f"non-finite value at row {row}, col {col} ({path})")
        self.row = row
        self.col = col


class IoFailure(OSError):
    pass


class MissingCaptionerEmbedding(StoreError):
    def __init__(self, name: str):
        super().__init__(f"no embedding matrix for captioner {name!r}")
        self.name = name


class UnknownCaptioner(StoreError):
    def __init__(self, name: str):
        super().__init__(f"embedding matrix for unknown captioner {name!r}")
        self.name = name


class DimMismatch(StoreError):
    pass


@dataclass(frozen=True, slots=True)
class Molecule:
    id: str
    smiles: str
    label: float


@dataclass(frozen=True, slots=True)
class CaptionerMeta:
    name: str
    model_family: str = ""
    prompt_variant: str = ""
    representation: str = "smiles"
    size_label: str | None = None


@dataclass(frozen=True, slots=True)
class DatasetManifest:
    dataset: str
    task: str
    molecules: tuple[Molecule, ...]
    captioners: tuple[CaptionerMeta, ...]

    def labels(self) -> np.ndarray:
        return np.array([m.label for m in self.molecules], dtype=np.float64)

    def molecule_index(self) -> dict[str, int]:
        return {m.id: i for i, m in enumerate(self.molecules)}

    def captioner_names(self) -> list[str]:
        return [c.name for c in self.captioners]


@dataclass(frozen=True, slots=True)
class EmbeddingMatrix:
    values: np.ndarray  # float32, shape (rows, dim), C-contiguous

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.dtype != np.float32:
            raise StoreError(f"embedding matrix must be 2-D float32, got {v.dtype} ndim={v.ndim}")
        if not np.isfinite(v).all():
            bad = np.argwhere(~np.isfinite(v))[0]
            raise NonFiniteValue(int(bad[0]), int(bad[1]))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, slots=True)
class ArenaInputs:
    manifest: DatasetManifest
    molecule_embeddings: EmbeddingMatrix
    caption_embeddings: dict[str, EmbeddingMatrix] = field(default_factory=dict)


def _require(condition: bool, exc: Exception) -> None:
    if not condition:
        raise exc


def parse_manifest(payload: dict) -> DatasetManifest:
    if not isinstance(payload, dict):
        raise MalformedJson("manifest root must be a JSON object")
    try:
        dataset = payload["dataset"]
        task = payload["task"]
        raw_molecules = payload["molecules"]
        raw_captioners = payload["captioners"]
    except KeyError as missing:
        raise MalformedJson(f"manifest missing key {missing}") from None
    _require(isinstance(dataset, str) and dataset != "", MalformedJson("dataset must be a non-empty string"))
    _require(task in TASKS, MalformedJson(f"task must be one of {TASKS}, got {task!r}"))
    _require(isinstance(raw_molecules, list), MalformedJson("molecules must be a list"))
    _require(isinstance(raw_captioners, list), MalformedJson("captioners must be a list"))

    molecules = []
    seen_ids: set[str] = set()
    for entry in raw_molecules:
        try:
            mid, smiles, label = entry["id"], entry["smiles"], entry["label"]
        except (KeyError, TypeError):
            raise MalformedJson(f"molecule entry missing id/smiles/label: {entry!r}") from None
        _require(isinstance(mid, str) and mid != "", MalformedJson("molecule id must be a non-empty string"))
        _require(isinstance(smiles, str), MalformedJson(f"smiles must be a string on {mid!r}"))
        if mid in seen_ids:
            raise DuplicateMoleculeId(f"duplicate molecule id {mid!r}")
        seen_ids.add(mid)
        if isinstance(label, bool) or not isinstance(label, (int, float)):
            raise BadLabel(task, mid, label)
        label = float(label)
        if task == BINARY_CLASSIFICATION and label not in (0.0, 1.0):
            raise BadLabel(task, mid, label)
        if not math.isfinite(label):
            raise BadLabel(task, mid, label)
        molecules.append(Molecule(mid, smiles, label))

    captioners = []
    seen_names: set[str] = set()
    for entry in raw_captioners:
        try:
            name = entry["name"]
        except (KeyError, TypeError):
            raise MalformedJson(f"captioner entry missing name: {entry!r}") from None
        _require(isinstance(name, str) and name != "", MalformedJson("captioner name must be a non-empty string"))
        _require(name not in seen_names, MalformedJson(f"duplicate captioner name {name!r}"))
        seen_names.add(name)
        representation = entry.get("representation", "smiles")
        _require(
            representation in REPRESENTATIONS,
            MalformedJson(f"representation must be one of {REPRESENTATIONS}, got {representation!r}"),
        )
        captioners.append(
            CaptionerMeta(
                name=name,
                model_family=entry.get("model_family", ""),
                prompt_variant=entry.get("prompt_variant", ""),
                representation=representation,
                size_label=entry.get("size_label"),
            )
        )
    return DatasetManifest(dataset, task, tuple(molecules), tuple(captioners))


def load_manifest(path: str | Path) -> DatasetManifest:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read manifest {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"manifest {path} is not valid JSON: {exc}") from exc
    return parse_manifest(payload)


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    payload = {
        "dataset": manifest.dataset,
        "task": manifest.task,
        "molecules": [
            {"id": m.id, "smiles": m.smiles, "label": m.label} for m in manifest.molecules
        ],
        "captioners": [
            {
                "name": c.name,
                "model_family": c.model_family,
                "prompt_variant": c.prompt_variant,
                "representation": c.representation,
                **({"size_label": c.size_label} if c.size_label is not None else {}),
            }
            for c in manifest.captioners
        ],
    }
    Path(path).write_text(
        json.dumps(payload, indent=2, ensure_ascii=True) + "\n", encoding="utf-8", newline="\n"
    )


def load_embeddings(path: str | Path, expected_rows: int | None = None) -> EmbeddingMatrix:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read embeddings {path}: {exc}") from exc
    if len(blob) < 12 or blob[:4] != MAGIC:
        raise BadMagic(f"{path}: expected magic {MAGIC!r}, found {blob[:4]!r}")
    rows, dim = struct.unpack_from("<II", blob, 4)
    want = 12 + 4 * rows * dim
    if len(blob) != want:
        raise StoreError(f"{path}: expected {want} bytes for {rows}x{dim}, found {len(blob)}")
    if expected_rows is not None and rows != expected_rows:
        raise RowCountMismatch(rows, expected_rows, str(path))
    values = np.frombuffer(blob, dtype="<f4", count=rows * dim, offset=12).reshape(rows, dim)
    values = np.ascontiguousarray(values.astype(np.float32, copy=True))
    if not np.isfinite(values).all():
        bad = np.argwhere(~np.isfinite(values))[0]
        raise NonFiniteValue(int(bad[0]), int(bad[1]), str(path))
    return EmbeddingMatrix(values)


def write_embeddings(matrix: EmbeddingMatrix, path: str | Path) -> None:
    header = MAGIC + struct.pack("<II", matrix.rows, matrix.dim)
    body = np.ascontiguousarray(matrix.values, dtype="<f4").tobytes()
    try:
        Path(path).write_bytes(header + body)
    except OSError as exc:
        raise IoFailure(f"cannot write embeddings {path}: {exc}") from exc


def align(
    manifest: DatasetManifest,
    molecule_emb: EmbeddingMatrix,
    caption_embs: dict[str, EmbeddingMatrix],
) -> ArenaInputs:
    """Bind matrices to a manifest, failing loudly on any inconsistency."""
    names = set(manifest.captioner_names())
    for name in sorted(caption_embs):
        if name not in names:
            raise UnknownCaptioner(name)
    for name in manifest.captioner_names():
        if name not in caption_embs:
            raise MissingCaptionerEmbedding(name)

    n = len(manifest.molecules)
    if molecule_emb.rows != n:
        raise RowCountMismatch(molecule_emb.rows, n, "molecule embeddings")
    dims = set()
    for name in manifest.captioner_names():
        emb = caption_embs[name]
        if emb.rows != n:
            raise RowCountMismatch(emb.rows, n, f"caption embeddings for {name!r}")
        dims.add(emb.dim)
    if len(dims) > 1:
        raise DimMismatch(f"caption embeddings disagree on dim: {sorted(dims)}")
    return ArenaInputs(manifest, molecule_emb, dict(caption_embs))
