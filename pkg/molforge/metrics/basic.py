"""
Validity, novelty and diversity of a sample set
"""
from typing import Iterable

from molforge.chem import MoleculeGraph, canonical_smiles
from molforge.metrics.base_metric import Metric, SampleSet


class Validity(Metric):
    """
    Share of distinct samples that parse and pass the valence check.

    >>> Validity()(SampleSet.from_smiles(["CCO", "CCO", "C1CC", "c1ccccc1"]))
    0.6666666666666666
    """

    def _get_metric_value(self, samples: SampleSet) -> float:
        return len(samples.valid) / len(samples)


class Novelty(Metric):
    """
    Share of valid samples whose canonical form is absent from the training corpus.

    >>> from molforge.chem import parse_smiles
    >>> Novelty([parse_smiles("OCC")])(SampleSet.from_smiles(["CCO", "CCN"]))
    0.5
    """

    def __init__(self, corpus: Iterable[MoleculeGraph]):
        """
        :param corpus: training molecules
        """
        self.known = {canonical_smiles(mol) for mol in corpus}

    def _get_metric_value(self, samples: SampleSet) -> float:
        if not samples.valid:
            return 0.0
        return sum(1 for text in samples.canonical if text not in self.known) / len(samples.canonical)


class Diversity(Metric):
    """
    Distinct canonical forms over valid samples, the uniqueness reading of diversity.

    >>> Diversity()(SampleSet.from_smiles(["CCO", "OCC", "CCN"]))
    0.6666666666666666
    """

    def __str__(self):
        return "DiversityUnique"

    def _get_metric_value(self, samples: SampleSet) -> float:
        if not samples.valid:
            return 0.0
        return len(set(samples.canonical)) / len(samples.canonical)
