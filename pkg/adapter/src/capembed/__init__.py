"""Embedding exporter for the caption-ranking engine's input files."""

from .encoders import (
    EncoderLoadFailure,
    MoleculeEncoder,
    TextEncoder,
    load_molecule_encoder,
    load_text_encoder,
)
from .extract import (
    CaptionRecord,
    DuplicateCaption,
    ExtractionReport,
    MissingCaption,
    RowOrderMismatch,
    SmilesRejectedByEncoder,
    UnknownMoleculeId,
    extract_caption_embeddings,
    extract_molecule_embeddings,
    read_caption_file,
)

__version__ = "0.1.0"

__all__ = [
    "CaptionRecord",
    "DuplicateCaption",
    "EncoderLoadFailure",
    "ExtractionReport",
    "MissingCaption",
    "MoleculeEncoder",
    "RowOrderMismatch",
    "SmilesRejectedByEncoder",
    "TextEncoder",
    "UnknownMoleculeId",
    "extract_caption_embeddings",
    "extract_molecule_embeddings",
    "load_molecule_encoder",
    "load_text_encoder",
    "read_caption_file",
]
