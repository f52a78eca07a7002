# pylint: disable=redefined-outer-name, missing-function-docstring
import pytest

from molforge.chem import BondOrder, is_isomorphic, parse_smiles, read_smiles_file, tokenize_smiles, write_smiles
from molforge.chem.canon import canonical_ranks
from molforge.errors import InvalidMolecule, SmilesSyntaxError, UnsupportedFeature

from tests.utils import toy_corpus, toy_corpus_path


def test_benzene():
    mol = parse_smiles("c1ccccc1")
    assert len(mol) == 6
    assert all(atom.aromatic and atom.ring_member for atom in mol.atoms)
    assert [bond.order for bond in mol.bonds] == [BondOrder.AROMATIC] * 6


def test_acetic_acid():
    mol = parse_smiles("CC(=O)O")
    assert [atom.element for atom in mol.atoms] == ["C", "C", "O", "O"]
    orders = {bond.pair: bond.order for bond in mol.bonds}
    assert orders == {
        (0, 1): BondOrder.SINGLE,
        (1, 2): BondOrder.DOUBLE,
        (1, 3): BondOrder.SINGLE,
    }
    assert not any(atom.ring_member for atom in mol.atoms)


def test_bracket_atoms():
    mol = parse_smiles("C[NH3+]")
    assert mol.atoms[1].formal_charge == 1
    assert mol.atoms[1].explicit_h == 3
    mol = parse_smiles("CC(=O)[O-]")
    assert mol.atoms[3].formal_charge == -1
    assert mol.atoms[3].explicit_h == 0


def test_two_digit_ring_label():
    mol = parse_smiles("C%12CCCCC%12")
    assert len(mol.bonds) == 6
    assert all(atom.ring_member for atom in mol.atoms)


def test_biphenyl_link_is_single():
    mol = parse_smiles("c1ccc(cc1)c1ccccc1")
    link = mol.bond_between(3, 6)
    assert link.order is BondOrder.SINGLE


def test_tokenizer_longest_match():
    assert [text for _, text, _ in tokenize_smiles("ClCBr[nH]")] == ["Cl", "C", "Br", "[nH]"]


@pytest.mark.parametrize(
    "text",
    ["C1CC", "CC(C", "CC)C", "C(=)C", "CC=", "C()C", "C11", "C%1", "1CC", "C?C", "[NH5]C", ""],
    ids=[
        "unclosed_ring",
        "open_branch",
        "close_branch",
        "dangling_bond_branch",
        "dangling_bond",
        "empty_branch",
        "self_loop",
        "short_label",
        "leading_ring",
        "unknown_symbol",
        "too_many_h",
        "empty",
    ],
)
def test_syntax_errors(text):
    with pytest.raises(SmilesSyntaxError):
        parse_smiles(text)


def test_syntax_error_position():
    with pytest.raises(SmilesSyntaxError) as error:
        parse_smiles("CC?")
    assert error.value.position == 2


@pytest.mark.parametrize(
    "text",
    ["CC.O", "C*", "F/C=C/F", "[13CH4]", "N[C@@H](C)C(=O)O", "[CH3:1]C", "[Xe]"],
)
def test_unsupported(text):
    with pytest.raises(UnsupportedFeature):
        parse_smiles(text)


def test_conflicting_ring_bonds():
    with pytest.raises(SmilesSyntaxError):
        parse_smiles("C=1CCCCC#1")


def test_ring_bond_symbol_on_either_side():
    first = parse_smiles("C=1CCCCC1")
    second = parse_smiles("C1CCCCC=1")
    assert is_isomorphic(first, second)


def test_write_requires_valid_molecule():
    mol = parse_smiles("C(C)(C)(C)(C)C")
    with pytest.raises(InvalidMolecule):
        write_smiles(mol, list(range(len(mol))))


def test_write_brackets_only_when_needed():
    assert write_smiles(parse_smiles("[CH4]"), [0]) == "C"
    assert "[nH]" in write_smiles(parse_smiles("c1cc[nH]c1"), [0, 1, 2, 3, 4])
    assert write_smiles(parse_smiles("CC(=O)[O-]"), [0, 1, 2, 3]) == "CC(=O)[O-]"


def test_roundtrip_corpus(toy_corpus):
    for _, text in toy_corpus:
        mol = parse_smiles(text)
        written = write_smiles(mol, canonical_ranks(mol))
        assert is_isomorphic(parse_smiles(written), mol), text


def test_read_smiles_file(tmp_path):
    path = tmp_path / "corpus.smi"
    path.write_text("# header\nCCO  \n\n  # comment\nc1ccccc1\n", encoding="utf-8")
    assert list(read_smiles_file(path)) == [(2, "CCO"), (5, "c1ccccc1")]


def test_read_toy_corpus(toy_corpus_path):
    lines = list(read_smiles_file(toy_corpus_path))
    assert len(lines) > 100
    assert all(not text.startswith("#") for _, text in lines)
