"""Shipped format-conformance check for the embedding exporter."""

from __future__ import annotations

import hashlib
import json

import numpy as np

from capembed.cli import main
from caprank.store import (
    CaptionerMeta,
    DatasetManifest,
    Molecule,
    load_embeddings,
    write_manifest,
)

SMILES = [
    "C1CC1",
    "C1CCC1",
    "C1CCCC1",
    "C1CCCCC1",
    "O=C1CCCC1",
    "c1ccccc1",
    "CCO",
    "CC(=O)O",
    "C1CC1CCN",
    "CCCCC",
]


def test_exported_files_conform_to_store_format(tmp_path, capsys):
    molecules = tuple(Molecule(f"m{i}", SMILES[i], float(i % 2)) for i in range(10))
    captioners = tuple(CaptionerMeta(c) for c in ("verbose", "terse", "blankcap"))
    manifest = DatasetManifest("toy", "binary_classification", molecules, captioners)
    manifest_path = tmp_path / "toy.manifest.json"
    write_manifest(manifest, manifest_path)

    lines = []
    for mol in molecules:
        lines.append({"molecule_id": mol.id, "captioner": "verbose",
                      "text": f"molecule {mol.id} is a small carbon ring system"})
        lines.append({"molecule_id": mol.id, "captioner": "terse",
                      "text": f"ring {mol.id}"})
        lines.append({"molecule_id": mol.id, "captioner": "blankcap", "text": ""})
    captions_path = tmp_path / "captions.jsonl"
    captions_path.write_text(
        "\n".join(json.dumps(line) for line in lines), encoding="utf-8"
    )

    def run(out):
        assert main(["molecules", "--manifest", str(manifest_path), "--out", str(out)]) == 0
        assert main(
            ["captions", "--manifest", str(manifest_path),
             "--captions", str(captions_path), "--out", str(out)]
        ) == 0
        return {
            p.name: hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(out.iterdir())
        }

    first = run(tmp_path / "run1")
    second = run(tmp_path / "run2")
    capsys.readouterr()

    expected = {"toy.mol.emb", "toy.verbose.emb", "toy.terse.emb", "toy.blankcap.emb"}
    assert set(first) == expected
    for name in expected:
        matrix = load_embeddings(tmp_path / "run1" / name, expected_rows=10)
        assert matrix.rows == 10
    blank = load_embeddings(tmp_path / "run1" / "toy.blankcap.emb").values
    assert np.all(blank == 0.0)
    identical = first == second
    assert identical
    print(
        f"adapter conformance: 4 files load with 10 rows, blank captioner all-zero, "
        f"run hashes identical={identical}"
    )
