"""Turn manifests and caption files into embedding matrices on disk.

Rows always follow the manifest's molecule order; files are written
atomically (temp file + rename) in the binary format the ranking engine's
store reads back.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from caprank.chem import SmilesError
from caprank.store import DatasetManifest, EmbeddingMatrix, write_embeddings

from .encoders import TextEncoder, load_molecule_encoder, load_text_encoder


class SmilesRejectedByEncoder(ValueError):
    def __init__(self, molecule_id: str, reason: str):
        super().__init__(f"encoder rejected SMILES of molecule {molecule_id!r}: {reason}")
        self.molecule_id = molecule_id


class MissingCaption(ValueError):
    def __init__(self, molecule_id: str, captioner: str):
        super().__init__(
            f"no caption for molecule {molecule_id!r} from captioner {captioner!r} "
            "(pass --fill-missing-with-zeros to substitute zero rows)"
        )
        self.molecule_id = molecule_id
        self.captioner = captioner


class DuplicateCaption(ValueError):
    pass


class UnknownMoleculeId(ValueError):
    pass


class RowOrderMismatch(AssertionError):
    pass


@dataclass(frozen=True, slots=True)
class CaptionRecord:
    molecule_id: str
    captioner: str
    text: str


def read_caption_file(path) -> list[CaptionRecord]:
    """JSONL, one record per line: {"molecule_id", "captioner", "text"}."""
    records = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ValueError(f"{path}:{lineno}: caption record must be an object")
        missing = {"molecule_id", "captioner", "text"} - set(payload)
        if missing:
            raise ValueError(f"{path}:{lineno}: missing fields {sorted(missing)}")
        records.append(
            CaptionRecord(
                str(payload["molecule_id"]), str(payload["captioner"]), str(payload["text"])
            )
        )
    return records


def _atomic_write(matrix: EmbeddingMatrix, path: Path) -> None:
    tmp = path.with_name(path.name + ".tmp")
    write_embeddings(matrix, tmp)
    os.replace(tmp, path)


def extract_molecule_embeddings(manifest: DatasetManifest, encoder_id: str, out_path) -> Path:
    """One embedding row per manifest molecule, in manifest order."""
    encoder = load_molecule_encoder(encoder_id)
    rows = []
    for mol in manifest.molecules:
        try:
            rows.append(encoder.encode(mol.smiles))
        except SmilesError as exc:
            raise SmilesRejectedByEncoder(mol.id, str(exc)) from exc
    out_path = Path(out_path)
    _atomic_write(EmbeddingMatrix(np.vstack(rows)), out_path)
    return out_path


@dataclass(frozen=True, slots=True)
class ExtractionReport:
    files: dict[str, Path]  # captioner -> written file
    truncated: dict[str, int]  # captioner -> captions cut to the context window
    rows: int


def _captions_by_captioner(
    records: list[CaptionRecord], manifest: DatasetManifest
) -> dict[str, dict[str, str]]:
    known = set(manifest.molecule_index())
    table: dict[str, dict[str, str]] = {}
    for record in records:
        if record.molecule_id not in known:
            raise UnknownMoleculeId(
                f"caption references molecule {record.molecule_id!r} not in manifest "
                f"{manifest.dataset!r}"
            )
        per = table.setdefault(record.captioner, {})
        if record.molecule_id in per:
            raise DuplicateCaption(
                f"duplicate caption for (molecule {record.molecule_id!r}, "
                f"captioner {record.captioner!r})"
            )
        per[record.molecule_id] = record.text
    return table


def _verify_row_order(manifest: DatasetManifest, encoder: TextEncoder) -> None:
    """Embed a sentinel caption per molecule and check each row fingerprint."""
    sentinels = {m.id: f"row check {m.id}" for m in manifest.molecules}
    matrix = np.vstack([encoder.encode(sentinels[m.id])[0] for m in manifest.molecules])
    for i, mol in enumerate(manifest.molecules):
        expected = encoder.encode(f"row check {mol.id}")[0]
        if not np.array_equal(matrix[i], expected):
            raise RowOrderMismatch(f"row {i} does not belong to molecule {mol.id!r}")


def extract_caption_embeddings(
    captions: list[CaptionRecord],
    manifest: DatasetManifest,
    encoder_id: str,
    out_dir,
    fill_missing_with_zeros: bool = False,
    debug_row_order: bool = False,
) -> ExtractionReport:
    """One EMB1 file per captioner seen in `captions`, rows in manifest order.

    Empty caption text maps to an all-zeros row. Missing (molecule,
    captioner) pairs are an error unless fill_missing_with_zeros is set.
    """
    encoder = load_text_encoder(encoder_id)
    table = _captions_by_captioner(captions, manifest)
    if not table:
        raise ValueError("caption file contains no records")

    if debug_row_order:
        _verify_row_order(manifest, encoder)

    # Validate completeness for every captioner before writing anything.
    if not fill_missing_with_zeros:
        for captioner in sorted(table):
            for mol in manifest.molecules:
                if mol.id not in table[captioner]:
                    raise MissingCaption(mol.id, captioner)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files: dict[str, Path] = {}
    truncated: dict[str, int] = {}
    for captioner in sorted(table):
        rows = []
        cut = 0
        for mol in manifest.molecules:
            text = table[captioner].get(mol.id, "")
            if not text:
                rows.append(np.zeros(encoder.hidden, dtype=np.float32))
                continue
            vector, was_cut = encoder.encode(text)
            cut += int(was_cut)
            rows.append(vector)
        path = out_dir / f"{manifest.dataset}.{captioner}.emb"
        _atomic_write(EmbeddingMatrix(np.vstack(rows)), path)
        files[captioner] = path
        truncated[captioner] = cut
    return ExtractionReport(files, truncated, len(manifest.molecules))
