"""Molecular graph parsing, scaffolds, and scaffold-disjoint splits."""

from .graph import Atom, Bond, BondOrder, GraphInvariantError, MoleculeGraph
from .scaffold import canonical_form, murcko_scaffold, scaffold_key, scaffold_key_for
from .smiles import (
    EmptyInput,
    SmilesError,
    UnbalancedParenthesis,
    UnclosedRingBond,
    UnknownElement,
    canonical_ranks,
    parse_smiles,
    write_smiles,
)
from .split import (
    SPLIT_NAMES,
    EmptyManifest,
    SplitAssignment,
    read_split_file,
    scaffold_split,
    write_split_file,
)

__all__ = [
    "Atom",
    "Bond",
    "BondOrder",
    "EmptyInput",
    "EmptyManifest",
    "GraphInvariantError",
    "MoleculeGraph",
    "SPLIT_NAMES",
    "SmilesError",
    "SplitAssignment",
    "UnbalancedParenthesis",
    "UnclosedRingBond",
    "UnknownElement",
    "canonical_form",
    "canonical_ranks",
    "murcko_scaffold",
    "parse_smiles",
    "read_split_file",
    "scaffold_key",
    "scaffold_key_for",
    "scaffold_split",
    "write_smiles",
    "write_split_file",
]
