"""Molecular graph data model shared by the parser, scaffold and split code."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class BondOrder(Enum):
    SINGLE = "single"
    DOUBLE = "double"
    TRIPLE = "triple"
    AROMATIC = "aromatic"


@dataclass(frozen=True, slots=True)
class Atom:
    element: str
    aromatic: bool = False
    formal_charge: int = 0
    explicit_h: int | None = None
    isotope: int | None = None


@dataclass(frozen=True, slots=True)
class Bond:
    a: int
    b: int
    order: BondOrder

    def key(self) -> tuple[int, int]:
        """Unordered endpoint pair, smaller index first."""
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)


class GraphInvariantError(ValueError):
    """A MoleculeGraph violated one of its structural invariants."""


@dataclass(frozen=True, slots=True)
class MoleculeGraph:
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    source_text: str = ""

    def __post_init__(self) -> None:
        n = len(self.atoms)
        seen: set[tuple[int, int]] = set()
        for bond in self.bonds:
            if not (0 <= bond.a < n and 0 <= bond.b < n):
                raise GraphInvariantError(
                    f"bond endpoint out of range: ({bond.a}, {bond.b}) with {n} atoms"
                )
            if bond.a == bond.b:
                raise GraphInvariantError(f"self-bond on atom {bond.a}")
            key = bond.key()
            if key in seen:
                raise GraphInvariantError(f"duplicate bond between atoms {key}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.atoms)

    def neighbors(self) -> list[list[tuple[int, BondOrder]]]:
        """Adjacency list: for each atom, its (neighbor index, bond order) pairs."""
        adj: list[list[tuple[int, BondOrder]]] = [[] for _ in self.atoms]
        for bond in self.bonds:
            adj[bond.a].append((bond.b, bond.order))
            adj[bond.b].append((bond.a, bond.order))
        return adj

    def fragments(self) -> list[list[int]]:
        """Connected components as atom-index lists, in order of lowest member."""
        adj = self.neighbors()
        seen = [False] * len(self.atoms)
        out: list[list[int]] = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            stack = [start]
            seen[start] = True
            comp = []
            while stack:
                i = stack.pop()
                comp.append(i)
                for j, _ in adj[i]:
                    if not seen[j]:
                        seen[j] = True
                        stack.append(j)
            out.append(sorted(comp))
        return out

    def induced_subgraph(self, keep: list[int], source_text: str = "") -> "MoleculeGraph":
        """Subgraph on `keep` (old indices, order preserved) with bonds reindexed."""
        index = {old: new for new, old in enumerate(keep)}
        atoms = tuple(self.atoms[i] for i in keep)
        bonds = tuple(
            Bond(index[b.a], index[b.b], b.order)
            for b in self.bonds
            if b.a in index and b.b in index
        )
        return MoleculeGraph(atoms, bonds, source_text)


EMPTY_GRAPH = MoleculeGraph((), (), "")
