"""
Crippen-style logP: reduced atom typing against the bundled contribution table
"""
from functools import lru_cache
from pathlib import Path
from typing import Dict, List

import pandas as pd

from molforge.chem.graph import HALOGENS, BondOrder, MoleculeGraph
from molforge.errors import InvalidMolecule

CRIPPEN_TABLE = Path(__file__).parent / "resources" / "crippen_contributions.tsv"
TABLE_VERSION = "1"
HYDROGEN_TYPES = {"C": "H_on_C", "N": "H_on_N", "O": "H_on_O"}


@lru_cache(maxsize=None)
def load_contributions(path: str = str(CRIPPEN_TABLE)) -> Dict[str, float]:
    """
    Read the contribution table.

    The first line must be ``# version: <n>`` with the supported version.

    :param path: tab separated file with ``type`` and ``contribution`` columns
    :return: contribution by atom type
    """
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().strip()
    if header != f"# version: {TABLE_VERSION}":
        raise ValueError(f"unsupported Crippen table header {header!r} in {path}")
    table = pd.read_csv(path, sep="\t", comment="#")
    return dict(zip(table["type"], table["contribution"].astype(float)))


def _carbon_type(mol: MoleculeGraph, idx: int) -> str:
    atom = mol.atoms[idx]
    neighbours = mol.adjacency[idx]
    if atom.aromatic:
        if any(bond.order is BondOrder.DOUBLE for _, bond in neighbours):
            return "c_exo_double"
        substituents = [
            mol.atoms[other] for other, bond in neighbours if bond.order is not BondOrder.AROMATIC
        ]
        aromatic_neighbours = [other for other, bond in neighbours if bond.order is BondOrder.AROMATIC]
        for element, label in (("N", "c_sub_n"), ("O", "c_sub_o"), ("S", "c_sub_s")):
            if any(sub.element == element for sub in substituents):
                return label
        if any(sub.element in HALOGENS for sub in substituents):
            return "c_sub_halogen"
        if substituents:
            return "c_sub_c"
        if len(aromatic_neighbours) == 3:
            return "c_bridge"
        return "c_h"
    orders = [bond.order for _, bond in neighbours]
    if BondOrder.TRIPLE in orders:
        return "C_triple"
    doubles = [mol.atoms[other].element for other, bond in neighbours if bond.order is BondOrder.DOUBLE]
    if any(element in ("N", "O", "S") for element in doubles):
        return "C_double_hetero"
    if doubles:
        return "C_double_carbon"
    if any(mol.atoms[other].aromatic for other, _ in neighbours):
        return "C_sp3_aryl"
    if any(mol.atoms[other].element != "C" for other, _ in neighbours):
        return "C_sp3_hetero"
    return "C_sp3_hc" if len(neighbours) <= 2 else "C_sp3_branched"


def _nitrogen_type(mol: MoleculeGraph, idx: int, hydrogens: int) -> str:
    atom = mol.atoms[idx]
    if atom.formal_charge:
        return "N_charged"
    if atom.aromatic:
        return "n_h" if hydrogens else "n_aromatic"
    orders = [bond.order for _, bond in mol.adjacency[idx]]
    if BondOrder.TRIPLE in orders:
        return "N_nitrile"
    if BondOrder.DOUBLE in orders:
        return "N_unsaturated"
    if any(mol.atoms[other].aromatic for other, _ in mol.adjacency[idx]):
        return "N_aniline"
    return {2: "N_primary", 1: "N_secondary"}.get(hydrogens, "N_tertiary")


def _oxygen_type(mol: MoleculeGraph, idx: int, hydrogens: int) -> str:
    atom = mol.atoms[idx]
    if atom.formal_charge:
        return "O_charged"
    if atom.aromatic:
        return "o_aromatic"
    if any(bond.order is BondOrder.DOUBLE for _, bond in mol.adjacency[idx]):
        return "O_carbonyl"
    if hydrogens:
        return "O_hydroxyl"
    if any(mol.atoms[other].aromatic for other, _ in mol.adjacency[idx]):
        return "O_aryl_ether"
    return "O_ether"


def atom_types(mol: MoleculeGraph) -> List[str]:
    """
    Contribution type of every atom, an explicit hydrogen atom is typed by its neighbour.

    >>> from molforge.chem.smiles import parse_smiles
    >>> atom_types(parse_smiles("CCO"))
    ['C_sp3_hc', 'C_sp3_hetero', 'O_hydroxyl']
    """
    hydrogens = mol.hydrogens
    types = []
    for idx, atom in enumerate(mol.atoms):
        if atom.element == "C":
            types.append(_carbon_type(mol, idx))
        elif atom.element == "N":
            types.append(_nitrogen_type(mol, idx, hydrogens[idx]))
        elif atom.element == "O":
            types.append(_oxygen_type(mol, idx, hydrogens[idx]))
        elif atom.element == "S":
            if atom.aromatic:
                types.append("s_aromatic")
            elif any(bond.order is BondOrder.DOUBLE for _, bond in mol.adjacency[idx]):
                types.append("S_oxidized")
            else:
                types.append("S_aliphatic")
        elif atom.element == "H":
            neighbours = [mol.atoms[other].element for other, _ in mol.adjacency[idx]]
            types.append(HYDROGEN_TYPES.get(neighbours[0], "H_other") if neighbours else "H_other")
        else:
            types.append(atom.element)
    return types


def crippen_logp(mol: MoleculeGraph) -> float:
    """
    Sum of heavy atom and hydrogen contributions.

    >>> from molforge.chem.smiles import parse_smiles
    >>> round(crippen_logp(parse_smiles("c1ccccc1")), 4)
    1.6866
    """
    table = load_contributions()
    mol = mol.fold_hydrogens()
    total = 0.0
    for atom, atom_type, count in zip(mol.atoms, atom_types(mol), mol.hydrogens):
        total += _contribution(table, atom_type)
        total += count * _contribution(table, HYDROGEN_TYPES.get(atom.element, "H_other"))
    return total


def _contribution(table: Dict[str, float], atom_type: str) -> float:
    if atom_type not in table:
        raise InvalidMolecule(f"no Crippen contribution for atom type {atom_type!r}")
    return table[atom_type]
