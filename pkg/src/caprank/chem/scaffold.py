"""Bemis-Murcko scaffolds and their canonical string keys."""

from __future__ import annotations

from .graph import EMPTY_GRAPH, BondOrder, MoleculeGraph
from .smiles import parse_smiles, write_smiles

# Canonical string for a scaffold graph; "" marks acyclic molecules.
ScaffoldKey = str


def murcko_scaffold(mol: MoleculeGraph) -> MoleculeGraph:
    """Ring systems plus the linkers between them, side chains removed.

    Multi-fragment inputs use the fragment with the most atoms.  Atoms
    attached to the kept set by double or triple bonds stay in the scaffold.
    Acyclic input yields the empty graph.
    """
    if len(mol.atoms) == 0:
        return EMPTY_GRAPH
    fragment = max(mol.fragments(), key=len)

    # Iteratively pruning degree<=1 atoms leaves exactly the rings and the
    # paths that connect them.
    adj = mol.neighbors()
    kept = set(fragment)
    degree = {i: sum(j in kept for j, _ in adj[i]) for i in kept}
    queue = [i for i in kept if degree[i] <= 1]
    while queue:
        i = queue.pop()
        if i not in kept:
            continue
        kept.remove(i)
        for j, _ in adj[i]:
            if j in kept:
                degree[j] -= 1
                if degree[j] <= 1:
                    queue.append(j)
    if not kept:
        return EMPTY_GRAPH

    exocyclic = set()
    for bond in mol.bonds:
        if bond.order in (BondOrder.DOUBLE, BondOrder.TRIPLE):
            if bond.a in kept and bond.b not in kept:
                exocyclic.add(bond.b)
            elif bond.b in kept and bond.a not in kept:
                exocyclic.add(bond.a)
    return mol.induced_subgraph(sorted(kept | exocyclic))


def canonical_form(mol: MoleculeGraph) -> ScaffoldKey:
    """Canonical key: identical graphs up to atom reordering share a key."""
    return write_smiles(mol)


def scaffold_key(mol: MoleculeGraph) -> ScaffoldKey:
    return canonical_form(murcko_scaffold(mol))


def scaffold_key_for(smiles: str) -> ScaffoldKey:
    return scaffold_key(parse_smiles(smiles))
