# pylint: disable=redefined-outer-name, missing-function-docstring
import numpy as np
import pytest

from molforge.chem import Scaffold, cosine_similarity, fingerprint, parse_smiles, randomize_smiles, scaffold_similarity
from molforge.chem.fingerprints import FINGERPRINT_WIDTH, Fingerprint, _paths, path_label

from tests.utils import toy_corpus


def test_width_and_single_atom():
    bits = fingerprint(parse_smiles("C"))
    assert bits.bits.shape == (FINGERPRINT_WIDTH,)
    assert bits.popcount >= 1


def test_independent_of_serialization():
    mol = parse_smiles("c1ccccc1")
    for seed in range(5):
        assert fingerprint(parse_smiles(randomize_smiles(mol, seed))) == fingerprint(mol)


def test_shared_ring_paths():
    toluene, benzene = fingerprint(parse_smiles("Cc1ccccc1")), fingerprint(parse_smiles("c1ccccc1"))
    shared = toluene & benzene
    assert shared.popcount >= 1
    assert set(shared.on_bits()) <= set(toluene.on_bits())
    assert len(shared.on_bits()) == shared.popcount


def test_similarity_bounds(toy_corpus):
    benzene = Scaffold.from_smiles("c1ccccc1")
    for _, text in toy_corpus:
        value = scaffold_similarity(parse_smiles(text), benzene)
        assert 0.0 <= value <= 1.0


def test_identity_similarity():
    benzene = Scaffold.from_smiles("c1ccccc1")
    assert scaffold_similarity(parse_smiles("c1ccccc1"), benzene) == 1.0


def test_aromatic_overlap_dominates():
    benzene = Scaffold.from_smiles("c1ccccc1")
    toluene = scaffold_similarity(parse_smiles("Cc1ccccc1"), benzene)
    cyclohexane = scaffold_similarity(parse_smiles("C1CCCCC1"), benzene)
    assert toluene > cyclohexane


def test_empty_vector():
    empty = Fingerprint(np.zeros(FINGERPRINT_WIDTH, dtype=bool))
    assert cosine_similarity(empty, fingerprint(parse_smiles("CCO"))) == 0.0


@pytest.mark.parametrize(
    "text, max_bonds, count",
    [("C", 7, 1), ("CCC", 7, 9), ("CCCCCC", 2, 24), ("CCCCCC", 0, 6), ("C1CC1", 7, 15)],
    ids=["methane", "propane", "hexane_cutoff", "atoms_only", "cyclopropane"],
)
def test_path_enumeration(text, max_bonds, count):
    paths = list(_paths(parse_smiles(text), max_bonds))
    assert len(paths) == count
    assert len(set(paths)) == count
    assert all(len(path) - 1 <= max_bonds for path in paths)


def test_path_labels_read_both_ways():
    mol = parse_smiles("CCO")
    assert {path_label(mol, path) for path in _paths(mol, 7)} == {"C", "O", "C-C", "C-O", "C-C-O"}
