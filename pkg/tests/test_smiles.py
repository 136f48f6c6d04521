"""Parser and canonical writer behavior, including the round-trip property."""

from __future__ import annotations

import numpy as np
import pytest

from caprank.chem import (
    Atom,
    BondOrder,
    EmptyInput,
    MoleculeGraph,
    SmilesError,
    UnbalancedParenthesis,
    UnclosedRingBond,
    UnknownElement,
    parse_smiles,
    write_smiles,
)
from helpers import SMILES_CORPUS, graphs_isomorphic, random_molecule


def test_single_atom():
    mol = parse_smiles("C")
    assert len(mol.atoms) == 1
    assert mol.atoms[0] == Atom("C")
    assert mol.bonds == ()


def test_benzene():
    mol = parse_smiles("c1ccccc1")
    assert len(mol.atoms) == 6
    assert all(a.element == "C" and a.aromatic for a in mol.atoms)
    assert len(mol.bonds) == 6
    assert all(b.order is BondOrder.AROMATIC for b in mol.bonds)


def test_trichlormethiazide_atom_count():
    mol = parse_smiles("NS(=O)(=O)c1cc2c(cc1Cl)NC(C(Cl)Cl)NS2(=O)=O")
    assert len(mol.atoms) == 20
    ring_bonds = len(mol.bonds) - (len(mol.atoms) - 1)
    assert ring_bonds == 2


def test_unclosed_ring_bond():
    with pytest.raises(UnclosedRingBond) as err:
        parse_smiles("C1CC")
    assert err.value.offset == 1


def test_empty_input():
    for text in ("", "   ", "\n"):
        with pytest.raises(EmptyInput):
            parse_smiles(text)


def test_unknown_element():
    with pytest.raises(UnknownElement) as err:
        parse_smiles("CXx")
    assert err.value.offset == 1
    with pytest.raises(UnknownElement):
        parse_smiles("[Xx]")
    with pytest.raises(UnknownElement):
        parse_smiles("CH")  # bare hydrogen needs brackets


def test_unbalanced_parenthesis():
    with pytest.raises(UnbalancedParenthesis) as err:
        parse_smiles("CC(C")
    assert err.value.offset == 2
    with pytest.raises(UnbalancedParenthesis) as err:
        parse_smiles("CC)C")
    assert err.value.offset == 2


@pytest.mark.parametrize(
    "text",
    [
        "C==C",  # doubled bond symbol
        "=C",  # bond with no left atom
        "C=",  # dangling bond
        "C(=)O",  # bond then ')'
        "C..C",  # bond context is fine but '.' clears prev; '..' still parses?
        "C1C1",  # ring closure duplicates the chain bond
        "C11",  # ring closes on its own atom
        "(C)C",  # branch before any atom
        "C%1C",  # '%' needs two digits
        "C C",  # inner whitespace
        "C[C",  # unterminated bracket
        "[]",  # bracket without symbol
        "C=1CCCCC#1",  # conflicting ring bond orders
    ],
)
def test_syntax_errors(text):
    if text == "C..C":  # consecutive dots are legal: empty fragment boundary
        mol = parse_smiles(text)
        assert len(mol.atoms) == 2 and mol.bonds == ()
        return
    with pytest.raises(SmilesError):
        parse_smiles(text)


def test_bracket_atom_fields():
    mol = parse_smiles("[13C@H3+2]")
    atom = mol.atoms[0]
    assert atom == Atom("C", aromatic=False, formal_charge=2, explicit_h=3, isotope=13)
    assert parse_smiles("[NH4+]").atoms[0].formal_charge == 1
    assert parse_smiles("[O--]").atoms[0].formal_charge == -2
    assert parse_smiles("[O-2]").atoms[0].formal_charge == -2
    assert parse_smiles("[C:7]").atoms[0] == Atom("C", explicit_h=0)


def test_stereo_markers_discarded():
    mol = parse_smiles("F/C=C/F")
    assert [b.order for b in mol.bonds] == [
        BondOrder.SINGLE,
        BondOrder.DOUBLE,
        BondOrder.SINGLE,
    ]


def test_dot_fragments():
    mol = parse_smiles("C(=O)O.[Na+]")
    assert len(mol.fragments()) == 2
    assert mol.atoms[3].element == "Na"


def test_ring_bond_order_resolution():
    # explicit order on one side of the closure applies to the bond
    mol = parse_smiles("C=1CCCCC1")
    orders = {b.key(): b.order for b in mol.bonds}
    assert orders[(0, 5)] is BondOrder.DOUBLE
    # matching explicit orders on both sides accepted
    mol2 = parse_smiles("C=1CCCCC=1")
    assert {b.key(): b.order for b in mol2.bonds}[(0, 5)] is BondOrder.DOUBLE


def test_percent_ring_closure():
    mol = parse_smiles("C%10CCCCC%10")
    assert len(mol.bonds) == 6


def test_ring_digit_then_branch_on_first_atom():
    assert graphs_isomorphic(parse_smiles("C1(CC1)"), parse_smiles("C1CC1"))


def test_aromatic_bond_inference():
    # single bond between aromatic rings stays single (biphenyl)
    mol = parse_smiles("c1ccc(cc1)-c1ccccc1")
    singles = [b for b in mol.bonds if b.order is BondOrder.SINGLE]
    assert len(singles) == 1


@pytest.mark.parametrize("text", SMILES_CORPUS)
def test_round_trip_corpus(text):
    first = parse_smiles(text)
    emitted = write_smiles(first)
    second = parse_smiles(emitted)
    assert graphs_isomorphic(first, second)
    # the writer is a fixed point: emitting again reproduces the string
    assert write_smiles(second) == emitted


def test_round_trip_random_graphs():
    rng = np.random.default_rng(20240817)
    for _ in range(200):
        mol = random_molecule(rng)
        emitted = write_smiles(mol)
        assert graphs_isomorphic(mol, parse_smiles(emitted))


def test_writer_rejects_aromatic_without_lowercase_form():
    with pytest.raises(ValueError):
        write_smiles(MoleculeGraph((Atom("Cl", aromatic=True),), ()))


def test_offsets_are_bytes():
    err = None
    try:
        parse_smiles("CCéC")
    except SmilesError as exc:
        err = exc
    assert err is not None and err.offset == 2
