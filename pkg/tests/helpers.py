"""Shared test utilities: graph oracles built on networkx, generators."""

from __future__ import annotations

import math

import networkx as nx
import numpy as np

from caprank.chem import Atom, Bond, BondOrder, MoleculeGraph

ELEMENT_CHOICES = ["C", "N", "O", "S", "P", "B", "F", "Cl", "Br", "I"]
AROMATIC_OK = {"B", "C", "N", "O", "P", "S"}


def atom_signature(atom: Atom) -> tuple:
    return (atom.element, atom.aromatic, atom.formal_charge, atom.explicit_h, atom.isotope)


def to_networkx(mol: MoleculeGraph) -> nx.Graph:
    g = nx.Graph()
    for i, atom in enumerate(mol.atoms):
        g.add_node(i, sig=atom_signature(atom))
    for bond in mol.bonds:
        g.add_edge(bond.a, bond.b, order=bond.order)
    return g


def graphs_isomorphic(a: MoleculeGraph, b: MoleculeGraph) -> bool:
    return nx.is_isomorphic(
        to_networkx(a),
        to_networkx(b),
        node_match=lambda x, y: x["sig"] == y["sig"],
        edge_match=lambda x, y: x["order"] == y["order"],
    )


def permute_graph(mol: MoleculeGraph, perm: list[int]) -> MoleculeGraph:
    """Relabel atoms so old index i becomes perm[i]."""
    atoms: list[Atom | None] = [None] * len(mol.atoms)
    for i, atom in enumerate(mol.atoms):
        atoms[perm[i]] = atom
    bonds = tuple(Bond(perm[b.a], perm[b.b], b.order) for b in mol.bonds)
    return MoleculeGraph(tuple(atoms), bonds, mol.source_text)


def murcko_oracle_atoms(mol: MoleculeGraph) -> set[int]:
    """Brute-force scaffold membership for small graphs.

    Keeps ring atoms, atoms interior to any simple path between ring atoms,
    and atoms double/triple-bonded to that set.  Works on the largest
    fragment only, mirroring the contract.
    """
    if len(mol.atoms) == 0:
        return set()
    g = to_networkx(mol)
    fragment = max(nx.connected_components(g), key=len)
    sub = g.subgraph(fragment)
    ring_atoms: set[int] = set()
    for cycle in nx.cycle_basis(sub):
        ring_atoms.update(cycle)
    kept = set(ring_atoms)
    ring_list = sorted(ring_atoms)
    for i, u in enumerate(ring_list):
        for v in ring_list[i + 1 :]:
            for path in nx.all_simple_paths(sub, u, v):
                kept.update(path)
    extra = set()
    for bond in mol.bonds:
        if bond.order in (BondOrder.DOUBLE, BondOrder.TRIPLE):
            if bond.a in kept and bond.b not in kept:
                extra.add(bond.b)
            elif bond.b in kept and bond.a not in kept:
                extra.add(bond.a)
    return kept | extra


def random_molecule(rng: np.random.Generator, max_atoms: int = 12) -> MoleculeGraph:
    """Random connected molecular graph; attribute-rich but chemistry-free."""
    n = int(rng.integers(1, max_atoms + 1))
    atoms = []
    for _ in range(n):
        element = ELEMENT_CHOICES[rng.integers(0, len(ELEMENT_CHOICES))]
        aromatic = element in AROMATIC_OK and rng.random() < 0.2
        charge = int(rng.integers(-1, 2)) if rng.random() < 0.15 else 0
        explicit_h = int(rng.integers(0, 3)) if rng.random() < 0.2 else None
        isotope = int(rng.integers(2, 40)) if rng.random() < 0.1 else None
        if (charge != 0 or isotope is not None) and explicit_h is None:
            explicit_h = 0  # bracket atoms always carry a concrete H count
        atoms.append(Atom(element, aromatic, charge, explicit_h, isotope))

    orders = [BondOrder.SINGLE, BondOrder.DOUBLE, BondOrder.TRIPLE, BondOrder.AROMATIC]

    def pick_order() -> BondOrder:
        return orders[rng.integers(0, 4)] if rng.random() < 0.3 else BondOrder.SINGLE

    bonds = []
    seen = set()
    for i in range(1, n):  # random spanning tree keeps the graph connected
        j = int(rng.integers(0, i))
        bonds.append(Bond(j, i, pick_order()))
        seen.add((j, i))
    extra = int(rng.integers(0, 4)) if n > 2 else 0
    for _ in range(extra):
        a, b = int(rng.integers(0, n)), int(rng.integers(0, n))
        key = (min(a, b), max(a, b))
        if a != b and key not in seen:
            seen.add(key)
            bonds.append(Bond(key[0], key[1], pick_order()))
    return MoleculeGraph(tuple(atoms), tuple(bonds))


SMILES_CORPUS = [
    "C",
    "CC",
    "CCO",
    "C#N",
    "O=C=O",
    "c1ccccc1",
    "C1CC1",
    "C1CC1C",
    "C1(CC1)",
    "c1ccccc1CC(=O)O",
    "CC(=O)Oc1ccccc1C(=O)O",
    "Cn1cnc2c1c(=O)n(C)c(=O)n2C",
    "NS(=O)(=O)c1cc2c(cc1Cl)NC(C(Cl)Cl)NS2(=O)=O",
    "c1ccc(cc1)-c1ccccc1",
    "c1ccc2ccccc2c1",
    "C1CCC2(CC1)CCCC2",
    "C1CC2CCC1CC2",
    "C=1CCCCC=1",
    "C1=CC=CC=C1",
    "[NH4+]",
    "[13CH4]",
    "[C]",
    "[CH3][CH2][OH]",
    "C[N+](=O)[O-]",
    "O=C([O-])c1ccccc1",
    "C(=O)O.[Na+]",
    "[O-]S(=O)(=O)[O-].[K+].[K+]",
    "F/C=C/F",
    "N[C@@H](C)C(=O)O",
    "CCN(CC)CC",
    "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
    "Clc1ccc(cc1)C(c1ccccc1)N1CCN(CC1)CCOCCO",
    "C%10CCCCC%10",
    "c1ccc2c(c1)Cc1ccccc1-2",
    "OCC(O)C(O)C(O)C(O)CO",
    "CSc1nnc(n1C)C(C)(C)C",
]


# ---------------------------------------------------------------------------
# Brute-force metric oracles: small, independent re-derivations used to pin
# the metric suite down to 1e-12.


def auc_pairwise_oracle(scores, labels):
    pos = [float(s) for s, y in zip(scores, labels) if y > 0.5]
    neg = [float(s) for s, y in zip(scores, labels) if y <= 0.5]
    total = 0.0
    for a in pos:
        for b in neg:
            if a > b:
                total += 1.0
            elif a == b:
                total += 0.5
    return total / (len(pos) * len(neg))


def ap_rank_walk_oracle(scores, labels):
    order = sorted(range(len(scores)), key=lambda k: (-float(scores[k]), k))
    hits = 0
    walked = []
    for rank, idx in enumerate(order, start=1):
        if labels[idx] > 0.5:
            hits += 1
            walked.append(hits / rank)
    return sum(walked) / sum(1 for y in labels if y > 0.5)


def average_ranks_oracle(values):
    order = sorted(range(len(values)), key=lambda k: float(values[k]))
    out = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            out[order[k]] = (i + j) / 2 + 1
        i = j + 1
    return out


def pearson_oracle(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    num = sum((a - mx) * (b - my) for a, b in zip(x, y))
    dx = math.sqrt(sum((a - mx) ** 2 for a in x))
    dy = math.sqrt(sum((b - my) ** 2 for b in y))
    return num / (dx * dy)


def spearman_oracle(x, y):
    return pearson_oracle(average_ranks_oracle(list(x)), average_ranks_oracle(list(y)))


def r2_oracle(preds, labels):
    mean = sum(labels) / len(labels)
    ss_res = sum((p - y) ** 2 for p, y in zip(preds, labels))
    ss_tot = sum((y - mean) ** 2 for y in labels)
    return 1 - ss_res / ss_tot


def bce_oracle(scores, labels):
    total = 0.0
    for s, y in zip(scores, labels):
        p = 1.0 / (1.0 + math.exp(-float(s))) if s >= 0 else math.exp(float(s)) / (1.0 + math.exp(float(s)))
        p = min(max(p, 1e-7), 1.0 - 1e-7)
        total += -(y * math.log(p) + (1 - y) * math.log(1.0 - p))
    return total / len(scores)


def simulate_bt_battles(thetas, n_battles, rng, dataset="synth", fold=0):
    """Draw battles from the Bradley-Terry model with planted log-strengths."""
    from caprank.arena import BattleRecord, BattleSet

    names = [f"cap{k:02d}" for k in range(len(thetas))]
    records = []
    for t in range(n_battles):
        i = int(rng.integers(0, len(names)))
        j = int(rng.integers(0, len(names) - 1))
        if j >= i:
            j += 1
        p = 1.0 / (1.0 + math.exp(-(thetas[i] - thetas[j])))
        i_wins = rng.random() < p
        a, b = (names[i], names[j]) if names[i] < names[j] else (names[j], names[i])
        a_is_i = a == names[i]
        outcome = "A" if (i_wins == a_is_i) else "B"
        records.append(BattleRecord(dataset, fold, f"m{t}", a, b, outcome))
    return BattleSet(tuple(records), tuple(names))
