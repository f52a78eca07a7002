"""
Scaffold existence and scaffold similarity of a sample set
"""
from typing import Union

from molforge.chem import MoleculeGraph, Scaffold, has_substructure, scaffold_similarity
from molforge.metrics.base_metric import ValidMoleculeMetric


def _as_scaffold(scaffold: Union[str, Scaffold]) -> Scaffold:
    return scaffold if isinstance(scaffold, Scaffold) else Scaffold.from_smiles(scaffold)


class ScaffoldExistence(ValidMoleculeMetric):
    """
    Share of valid samples that contain the scaffold as a substructure.

    >>> from molforge.metrics.base_metric import SampleSet
    >>> ScaffoldExistence("c1ccccc1")(SampleSet.from_smiles(["Cc1ccccc1", "CCO"]))
    0.5
    """

    def __init__(self, scaffold: Union[str, Scaffold]):
        self.scaffold = _as_scaffold(scaffold)

    def _get_value_by_molecule(self, mol: MoleculeGraph) -> float:
        return float(has_substructure(mol, self.scaffold))


class ScaffoldSimilarity(ValidMoleculeMetric):
    """Mean fingerprint cosine similarity between valid samples and the scaffold"""

    def __init__(self, scaffold: Union[str, Scaffold]):
        self.scaffold = _as_scaffold(scaffold)

    def _get_value_by_molecule(self, mol: MoleculeGraph) -> float:
        return scaffold_similarity(mol, self.scaffold)
