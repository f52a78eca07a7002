"""
Ring-framework scaffolds and substructure search
"""
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping

import pandas as pd
from networkx.algorithms.isomorphism import GraphMatcher

from molforge.chem.canon import canonical_smiles
from molforge.chem.graph import BondOrder, MoleculeGraph
from molforge.chem.smiles import parse_smiles
from molforge.errors import AcyclicMolecule, InvalidMolecule
from molforge.chem.valence import check_valence

# scaffolds held out for structure-controlled generation
VALIDATION_SCAFFOLDS: Dict[str, str] = {
    "Piperazine": "N1CCNCC1",
    "Pyrimidine": "c1cncnc1",
    "Pyrazine": "c1cnccn1",
    "Pyridine": "c1ccncc1",
    "Benzene": "c1ccccc1",
    "Furan": "c1ccoc1",
    "Phenol": "c1ccccc1O",
    "Benzothiazole": "c1ccc2ncsc2c1",
    "Thiazole": "c1cscn1",
    "Naphthalene": "c1ccc2ccccc2c1",
}


@dataclass(frozen=True)
class Scaffold:
    """Structural constraint: a molecular graph and its canonical SMILES"""

    graph: MoleculeGraph
    smiles: str

    @classmethod
    def from_smiles(cls, text: str) -> "Scaffold":
        """
        Use a SMILES string as it is, without removing side chains.

        :param text: scaffold SMILES
        """
        graph = parse_smiles(text)
        report = check_valence(graph)
        if not report.valid:
            raise InvalidMolecule(f"scaffold {text!r} is not a valid molecule: {report.failures[0].reason}")
        return cls(graph, canonical_smiles(graph))

    def __len__(self) -> int:
        return len(self.graph)


def _removable(mol: MoleculeGraph, idx: int, keep: set) -> bool:
    if mol.atoms[idx].ring_member:
        return False
    kept = [(neighbour, bond) for neighbour, bond in mol.adjacency[idx] if neighbour in keep]
    if len(kept) > 1:
        return False
    if len(kept) == 1:
        neighbour, bond = kept[0]
        if bond.order is BondOrder.DOUBLE and mol.atoms[neighbour].ring_member:
            return False
    return True


def extract_scaffold(mol: MoleculeGraph) -> Scaffold:
    """
    Ring systems plus linkers: non-ring atoms of degree one are removed until none is left,
    except atoms double bonded to a ring atom.

    >>> extract_scaffold(parse_smiles("Cc1ccccc1")).smiles
    'c1ccccc1'
    """
    if not any(atom.ring_member for atom in mol.atoms):
        raise AcyclicMolecule(f"molecule {mol.source!r} has no ring")
    keep = set(range(len(mol)))
    changed = True
    while changed:
        removable = [idx for idx in sorted(keep) if _removable(mol, idx, keep)]
        changed = bool(removable)
        keep.difference_update(removable)
    graph = mol.subgraph(sorted(keep))
    smiles = canonical_smiles(graph)
    return Scaffold(MoleculeGraph(graph.atoms, graph.bonds, smiles), smiles)


def _matcher(mol: MoleculeGraph, scaffold: Scaffold) -> GraphMatcher:
    return GraphMatcher(
        mol.graph,
        scaffold.graph.graph,
        node_match=lambda a, b: a["element"] == b["element"] and a["aromatic"] == b["aromatic"],
        edge_match=lambda a, b: a["order"] == b["order"],
    )


def has_substructure(mol: MoleculeGraph, scaffold: Scaffold) -> bool:
    """
    Whether scaffold atoms map injectively onto molecule atoms keeping
    element, aromaticity and bond order; extra bonds in the molecule are allowed.
    """
    if len(scaffold) > len(mol):
        return False
    return _matcher(mol, scaffold).subgraph_is_monomorphic()


def scaffold_prevalence(molecules: Iterable[MoleculeGraph], scaffolds: Mapping[str, Scaffold]) -> pd.Series:
    """
    Fraction of molecules containing each scaffold.

    :param molecules: corpus molecules
    :param scaffolds: scaffolds by name
    :return: series indexed by scaffold name
    """
    molecules = list(molecules)
    if not molecules:
        return pd.Series(0.0, index=list(scaffolds), name="prevalence")
    return pd.Series(
        {
            name: sum(has_substructure(mol, scaffold) for mol in molecules) / len(molecules)
            for name, scaffold in scaffolds.items()
        },
        name="prevalence",
    )
