# pylint: disable=redefined-outer-name, missing-function-docstring
import pytest

from molforge.chem import canonical_ranks, canonical_smiles, is_isomorphic, parse_smiles, randomize_smiles
from molforge.errors import InvalidMolecule

from tests.utils import toy_corpus


def canon(text):
    return canonical_smiles(parse_smiles(text))


@pytest.mark.parametrize(
    "first, second",
    [
        ("OCC", "CCO"),
        ("C1CNCCN1", "N1CCNCC1"),
        ("c1ccncc1", "n1ccccc1"),
        ("Cc1ccccc1", "c1ccc(C)cc1"),
        ("CC(=O)O", "OC(C)=O"),
    ],
)
def test_same_molecule_same_canonical(first, second):
    assert canon(first) == canon(second)


def test_different_molecules_differ():
    assert canon("c1ccncc1") != canon("c1ccccc1")
    assert canon("CCO") != canon("COC")


def test_idempotent(toy_corpus):
    for _, text in toy_corpus:
        once = canon(text)
        assert canon(once) == once, text


def test_ranks_are_a_permutation():
    mol = parse_smiles("CC(C)Cc1ccc(cc1)C(C)C(=O)O")
    assert sorted(canonical_ranks(mol)) == list(range(len(mol)))


def test_invalid_molecule():
    with pytest.raises(InvalidMolecule):
        canon("C(C)(C)(C)(C)C")


def test_piperazine_serializations_share_one_class():
    mol = parse_smiles("N1CCNCC1")
    forms = {randomize_smiles(mol, seed) for seed in range(50)}
    assert {canon(form) for form in forms} == {canon("N1CCNCC1")}


def test_randomize_is_deterministic():
    mol = parse_smiles("Cc1ccccc1")
    assert randomize_smiles(mol, 11) == randomize_smiles(mol, 11)


def test_randomize_gives_several_forms():
    mol = parse_smiles("Cc1ccccc1")
    assert len({randomize_smiles(mol, seed) for seed in range(100)}) >= 2


def test_augmentation_soundness(toy_corpus):
    for _, text in toy_corpus:
        mol = parse_smiles(text)
        expected = canonical_smiles(mol)
        for seed in range(20):
            randomized = parse_smiles(randomize_smiles(mol, seed))
            assert is_isomorphic(randomized, mol), (text, seed)
            assert canonical_smiles(randomized) == expected, (text, seed)
