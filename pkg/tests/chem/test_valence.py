# pylint: disable=redefined-outer-name, missing-function-docstring
import itertools

import numpy as np
import pytest

from molforge.chem import Atom, Bond, BondOrder, MoleculeGraph, check_valence, parse_smiles
from molforge.chem.valence import DEFAULT_VALENCES, allowed_valences, organic_hydrogens

from tests.utils import toy_corpus


@pytest.mark.parametrize(
    "text",
    ["c1ccccc1", "c1ccncc1", "c1cc[nH]c1", "c1ccoc1", "c1ccc2ncsc2c1", "O=c1cccc[nH]1", "C[N+](C)(C)C"],
)
def test_valid(text):
    report = check_valence(parse_smiles(text))
    assert report.valid
    assert not report.failures


@pytest.mark.parametrize(
    "text, atom_index",
    [
        ("C(C)(C)(C)(C)C", 0),
        ("c1ccc1", 0),
        ("c1cccc1", 0),
        ("O=O=O", 1),
        ("c1ccccc1-c", 6),
    ],
    ids=["pentavalent_carbon", "antiaromatic_ring", "odd_ring", "trivalent_oxygen", "aromatic_chain"],
)
def test_invalid(text, atom_index):
    report = check_valence(parse_smiles(text))
    assert not report.valid
    assert atom_index in [failure.atom_index for failure in report.failures]


def test_hydrogens():
    report = check_valence(parse_smiles("CC(=O)O"))
    assert report.hydrogens == (3, 0, 0, 1)
    report = check_valence(parse_smiles("c1ccncc1"))
    assert report.hydrogens == (1, 1, 1, 0, 1, 1)


def test_kekule_assignment_is_perfect():
    mol = parse_smiles("c1ccc2ccccc2c1")
    report = check_valence(mol)
    assert len(report.double_bonds) == 5
    covered = [idx for pair in report.double_bonds for idx in pair]
    assert sorted(covered) == list(range(10))


def test_allowed_valences():
    assert allowed_valences("N", 1) == (4,)
    assert allowed_valences("O", -1) == (1,)
    assert allowed_valences("P") == (3, 5)


def test_organic_hydrogens():
    assert organic_hydrogens("C", False, 1) == (3, False)
    assert organic_hydrogens("C", True, 2) == (1, True)
    assert organic_hydrogens("N", True, 2) == (0, True)
    assert organic_hydrogens("C", False, 5) is None


def test_every_valid_molecule_has_complete_hydrogens(toy_corpus):
    for _, text in toy_corpus:
        mol = parse_smiles(text)
        report = check_valence(mol)
        assert report.valid, text
        for idx, atom in enumerate(mol.atoms):
            total = sum(bond.order.sigma for _, bond in mol.adjacency[idx]) + report.hydrogens[idx]
            total += int(any(idx in pair for pair in report.double_bonds))
            assert total in allowed_valences(atom.element, atom.formal_charge), (text, idx)


def _random_molecules(count, seed):
    rng = np.random.default_rng(seed)
    elements = ["C", "N", "O"]
    orders = [BondOrder.SINGLE, BondOrder.DOUBLE, BondOrder.TRIPLE]
    for _ in range(count):
        size = int(rng.integers(1, 7))
        edges = {(int(rng.integers(child)), child) for child in range(1, size)}
        for first, second in itertools.combinations(range(size), 2):
            if (first, second) not in edges and rng.random() < 0.15:
                edges.add((first, second))
        atoms = tuple(Atom(elements[rng.integers(3)]) for _ in range(size))
        bonds = tuple(Bond(first, second, orders[rng.choice(3, p=[0.7, 0.2, 0.1])]) for first, second in edges)
        yield MoleculeGraph(atoms, bonds)


def test_matches_brute_force_enumeration():
    for mol in _random_molecules(500, seed=3):
        expected = all(
            sum(bond.order.value for _, bond in mol.adjacency[idx]) <= max(DEFAULT_VALENCES[atom.element])
            for idx, atom in enumerate(mol.atoms)
        )
        assert check_valence(mol).valid == expected
