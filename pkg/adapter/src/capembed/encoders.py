"""Frozen deterministic encoders, loaded from a registry by id.

Weights are derived from the encoder id through a seeded generator, so an
encoder behaves like a fixed pretrained checkpoint: loading the same id
always yields the same parameters, and inference is deterministic.

Two kinds exist: molecule encoders run message passing over the parsed
molecular graph; text encoders map hashed tokens through a small MLP and
mean-pool the final-layer token states.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass

import numpy as np

from caprank.chem import BondOrder, parse_smiles


class EncoderLoadFailure(ValueError):
    pass


def _weights(encoder_id: str, tag: str, shape: tuple[int, ...]) -> np.ndarray:
    digest = hashlib.blake2b(f"{encoder_id}/{tag}".encode(), digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    return rng.standard_normal(shape) / math.sqrt(shape[-1])


_ELEMENT_BUCKETS = 24
_BOND_WEIGHT = {
    BondOrder.SINGLE: 1.0,
    BondOrder.DOUBLE: 2.0,
    BondOrder.TRIPLE: 3.0,
    BondOrder.AROMATIC: 1.5,
}


def _element_bucket(element: str) -> int:
    digest = hashlib.blake2b(element.encode(), digest_size=4).digest()
    return int.from_bytes(digest, "little") % _ELEMENT_BUCKETS


@dataclass(frozen=True, slots=True)
class MoleculeEncoder:
    encoder_id: str
    hidden: int
    layers: int

    def encode(self, smiles: str) -> np.ndarray:
        """Graph-level embedding; raises caprank.chem.SmilesError on bad input."""
        mol = parse_smiles(smiles)
        adjacency = mol.neighbors()
        features = np.zeros((len(mol.atoms), _ELEMENT_BUCKETS + 4))
        for i, atom in enumerate(mol.atoms):
            features[i, _element_bucket(atom.element)] = 1.0
            features[i, _ELEMENT_BUCKETS] = 1.0 if atom.aromatic else 0.0
            features[i, _ELEMENT_BUCKETS + 1] = float(atom.formal_charge)
            features[i, _ELEMENT_BUCKETS + 2] = float(len(adjacency[i]))
            features[i, _ELEMENT_BUCKETS + 3] = float(atom.explicit_h or 0)
        w_in = _weights(self.encoder_id, "input", (features.shape[1], self.hidden))
        h = np.tanh(features @ w_in)
        for layer in range(self.layers):
            messages = np.zeros_like(h)
            for i, neigh in enumerate(adjacency):
                for j, order in neigh:
                    messages[i] += _BOND_WEIGHT[order] * h[j]
            eps = float(_weights(self.encoder_id, f"eps{layer}", (1,))[0])
            w = _weights(self.encoder_id, f"layer{layer}", (self.hidden, self.hidden))
            b = _weights(self.encoder_id, f"bias{layer}", (self.hidden,))
            h = np.tanh(((1.0 + eps) * h + messages) @ w + b)
        # Sum readout: mean pooling cannot tell a C3 ring from a C4 ring
        # (every atom state is identical in a homogeneous ring).
        pooled = h.sum(axis=0)
        w_out = _weights(self.encoder_id, "output", (self.hidden, self.hidden))
        b_out = _weights(self.encoder_id, "output_bias", (self.hidden,))
        return (pooled @ w_out + b_out).astype(np.float32)


_TOKEN = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True, slots=True)
class TextEncoder:
    encoder_id: str
    hidden: int
    vocab: int
    context: int

    def tokenize(self, text: str) -> list[int]:
        return [
            int.from_bytes(hashlib.blake2b(t.encode(), digest_size=4).digest(), "little")
            % self.vocab
            for t in _TOKEN.findall(text.lower())
        ]

    def encode(self, text: str) -> tuple[np.ndarray, bool]:
        """Mean of final-layer token states; (zeros, False) for empty text.

        The flag reports whether the caption was truncated to the context
        window.
        """
        tokens = self.tokenize(text)
        if not tokens:
            return np.zeros(self.hidden, dtype=np.float32), False
        truncated = len(tokens) > self.context
        tokens = tokens[: self.context]
        table = _weights(self.encoder_id, "tokens", (self.vocab, self.hidden))
        positions = _weights(self.encoder_id, "positions", (self.context, self.hidden))
        x = table[tokens] + positions[: len(tokens)]
        w1 = _weights(self.encoder_id, "mlp1", (self.hidden, self.hidden))
        b1 = _weights(self.encoder_id, "mlp1_bias", (self.hidden,))
        w2 = _weights(self.encoder_id, "mlp2", (self.hidden, self.hidden))
        b2 = _weights(self.encoder_id, "mlp2_bias", (self.hidden,))
        states = np.tanh(np.tanh(x @ w1 + b1) @ w2 + b2)
        return states.mean(axis=0).astype(np.float32), truncated


_MOLECULE_ENCODERS = {
    "gin-small": {"hidden": 64, "layers": 3},
}
_TEXT_ENCODERS = {
    "textmean-base": {"hidden": 96, "vocab": 2048, "context": 128},
}


def load_molecule_encoder(encoder_id: str) -> MoleculeEncoder:
    if encoder_id in _TEXT_ENCODERS:
        raise EncoderLoadFailure(f"{encoder_id!r} is a text encoder, not a molecule encoder")
    layout = _MOLECULE_ENCODERS.get(encoder_id)
    if layout is None:
        raise EncoderLoadFailure(
            f"unknown molecule encoder {encoder_id!r}; available: {sorted(_MOLECULE_ENCODERS)}"
        )
    return MoleculeEncoder(encoder_id, **layout)


def load_text_encoder(encoder_id: str) -> TextEncoder:
    if encoder_id in _MOLECULE_ENCODERS:
        raise EncoderLoadFailure(f"{encoder_id!r} is a molecule encoder, not a text encoder")
    layout = _TEXT_ENCODERS.get(encoder_id)
    if layout is None:
        raise EncoderLoadFailure(
            f"unknown text encoder {encoder_id!r}; available: {sorted(_TEXT_ENCODERS)}"
        )
    return TextEncoder(encoder_id, **layout)
