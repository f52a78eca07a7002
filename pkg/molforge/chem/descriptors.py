"""
Property descriptors used as guidance targets and evaluation columns
"""
from abc import ABC, abstractmethod
from itertools import combinations
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Sequence, Type

import networkx as nx
import pandas as pd

from molforge.chem.crippen import crippen_logp
from molforge.chem.graph import ELEMENTS, BondOrder, MoleculeGraph
from molforge.errors import MissingStats, UnknownDescriptor

if TYPE_CHECKING:
    from molforge.chem.stats import CorpusStats

MAXIMIZE = "maximize"
MINIMIZE = "minimize"
TARGET = "target"
DIRECTIONS = (MAXIMIZE, MINIMIZE, TARGET)


def smallest_rings(mol: MoleculeGraph) -> List[List[int]]:
    """Smallest set of smallest rings, each ring as sorted atom indices, ordered by size then indices"""
    return sorted((sorted(ring) for ring in nx.minimum_cycle_basis(mol.graph)), key=lambda ring: (len(ring), ring))


class Descriptor(ABC):
    """Real-valued molecular property"""

    direction: str = MAXIMIZE

    def __str__(self):
        return type(self).__name__

    def __call__(self, mol: MoleculeGraph) -> float:
        """
        :param mol: valid molecule, explicit hydrogen atoms are folded into their neighbours first
        :return: descriptor value
        """
        return self._value(mol.fold_hydrogens())

    @abstractmethod
    def _value(self, mol: MoleculeGraph) -> float:
        """Value on the folded graph"""


class HBD(Descriptor):
    """Hydrogen bond donors: N and O atoms bearing at least one hydrogen

    >>> from molforge.chem.smiles import parse_smiles
    >>> HBD()(parse_smiles("CCO"))
    1.0
    """

    def _value(self, mol: MoleculeGraph) -> float:
        hydrogens = mol.hydrogens
        return float(
            sum(atom.element in ("N", "O") and hydrogens[idx] > 0 for idx, atom in enumerate(mol.atoms))
        )


class HBA(Descriptor):
    """Hydrogen bond acceptors: N and O atoms except amide N and aromatic N bearing hydrogen"""

    @staticmethod
    def _is_amide_nitrogen(mol: MoleculeGraph, idx: int) -> bool:
        for neighbour, bond in mol.adjacency[idx]:
            if bond.order is not BondOrder.SINGLE or mol.atoms[neighbour].element != "C":
                continue
            for second, second_bond in mol.adjacency[neighbour]:
                if second_bond.order is BondOrder.DOUBLE and mol.atoms[second].element == "O":
                    return True
        return False

    def _value(self, mol: MoleculeGraph) -> float:
        hydrogens = mol.hydrogens
        count = 0
        for idx, atom in enumerate(mol.atoms):
            if atom.element == "O":
                count += 1
            elif atom.element == "N":
                if atom.aromatic and hydrogens[idx] > 0:
                    continue
                if not atom.aromatic and self._is_amide_nitrogen(mol, idx):
                    continue
                count += 1
        return float(count)


class CrippenLogP(Descriptor):
    """Octanol-water partition coefficient from atom contributions"""

    def _value(self, mol: MoleculeGraph) -> float:
        return crippen_logp(mol)


class CyclePenalty(Descriptor):
    """
    Atoms by which the largest smallest ring exceeds six

    >>> from molforge.chem.smiles import parse_smiles
    >>> CyclePenalty()(parse_smiles("C1CCCCCCC1"))
    2.0
    """

    direction = MINIMIZE

    def _value(self, mol: MoleculeGraph) -> float:
        rings = smallest_rings(mol)
        if not rings:
            return 0.0
        return float(max(0, max(len(ring) for ring in rings) - 6))


class MolWeight(Descriptor):
    """Molecular weight including hydrogens"""

    direction = TARGET

    def _value(self, mol: MoleculeGraph) -> float:
        heavy = sum(ELEMENTS[atom.element][1] for atom in mol.atoms)
        return heavy + sum(mol.hydrogens) * ELEMENTS["H"][1]


class SASProxy(Descriptor):
    """
    Synthetic accessibility proxy, lower is easier:
    0.5 per cycle penalty unit, 0.1 per heavy atom, 1.0 per pair of rings sharing two or more atoms.
    """

    direction = MINIMIZE

    def _value(self, mol: MoleculeGraph) -> float:
        rings = [set(ring) for ring in smallest_rings(mol)]
        fused = sum(len(first & second) >= 2 for first, second in combinations(rings, 2))
        return 0.5 * CyclePenalty()(mol) + 0.1 * len(mol) + 1.0 * fused


class PLogP(Descriptor):
    """
    Penalized logP: sum of the corpus z-scores of CrippenLogP, SASProxy and CyclePenalty.

    :param stats: corpus statistics with the three components
    """

    components = ("CrippenLogP", "SASProxy", "CyclePenalty")

    def __init__(self, stats: "CorpusStats"):
        missing = [name for name in self.components if name not in stats]
        if missing:
            raise MissingStats(f"corpus statistics lack {', '.join(missing)} needed for PLogP")
        stats.check_positive(self.components)
        self.stats = stats

    def _value(self, mol: MoleculeGraph) -> float:
        return sum(
            self.stats.zscore(name, REGISTRY[name]()(mol)) for name in self.components
        )


REGISTRY: Dict[str, Type[Descriptor]] = {
    cls.__name__: cls for cls in (HBA, HBD, CrippenLogP, CyclePenalty, MolWeight, SASProxy, PLogP)
}


def get_descriptor(name: str, stats: Optional["CorpusStats"] = None) -> Descriptor:
    """
    Descriptor instance by id.

    :param name: registered id
    :param stats: corpus statistics, required by PLogP
    """
    if name not in REGISTRY:
        raise UnknownDescriptor(f"unknown descriptor {name!r}, expected one of {sorted(REGISTRY)}")
    if REGISTRY[name] is PLogP:
        if stats is None:
            raise MissingStats("PLogP needs corpus statistics")
        return PLogP(stats)
    return REGISTRY[name]()


def descriptor(mol: MoleculeGraph, name: str, stats: Optional["CorpusStats"] = None) -> float:
    """Value of one registered descriptor"""
    return get_descriptor(name, stats)(mol)


def default_direction(name: str) -> str:
    if name not in REGISTRY:
        raise UnknownDescriptor(f"unknown descriptor {name!r}, expected one of {sorted(REGISTRY)}")
    return REGISTRY[name].direction


def compute_descriptors(
    molecules: Iterable[MoleculeGraph],
    names: Sequence[str],
    stats: Optional["CorpusStats"] = None,
) -> pd.DataFrame:
    """
    Descriptor table.

    :param molecules: valid molecules
    :param names: descriptor ids, one column each
    :param stats: corpus statistics for PLogP
    :return: DataFrame with one row per molecule
    """
    functions = {name: get_descriptor(name, stats) for name in names}
    rows = [{name: func(mol) for name, func in functions.items()} for mol in molecules]
    return pd.DataFrame(rows, columns=list(names))

