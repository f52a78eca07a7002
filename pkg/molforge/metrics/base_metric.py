"""
Base classes for sample set metrics.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Optional, Sequence

import numpy as np
from scipy.stats import norm

from molforge.chem import MoleculeGraph, canonical_smiles, check_valence, parse_smiles
from molforge.errors import EmptySampleSet, MolforgeError


@dataclass
class SampleSet:
    """
    Generated SMILES after duplicate removal, parsed once for every metric.

    :param raw_count: number of samples before duplicate removal
    :param texts: distinct sample strings in first-seen order
    :param molecules: parsed molecule per text, ``None`` when parsing or the valence check failed
    """

    raw_count: int
    texts: List[str]
    molecules: List[Optional[MoleculeGraph]]

    @classmethod
    def from_smiles(cls, samples: Iterable[str]) -> "SampleSet":
        """
        :param samples: generated SMILES, blank entries are ignored
        """
        samples = [text.strip() for text in samples if text.strip()]
        if not samples:
            raise EmptySampleSet("no samples to evaluate")
        texts = list(dict.fromkeys(samples))
        molecules = []
        for text in texts:
            try:
                mol = parse_smiles(text)
            except MolforgeError:
                molecules.append(None)
                continue
            molecules.append(mol if check_valence(mol) else None)
        return cls(len(samples), texts, molecules)

    def __len__(self) -> int:
        return len(self.texts)

    @property
    def valid(self) -> List[MoleculeGraph]:
        return [mol for mol in self.molecules if mol is not None]

    @cached_property
    def canonical(self) -> List[str]:
        """Canonical SMILES of every valid sample"""
        return [canonical_smiles(mol) for mol in self.valid]


def conf_interval(values: Sequence[float], alpha: float = 0.95) -> float:
    """
    Half width of the normal approximation confidence interval of the mean.

    >>> conf_interval([1.0, 1.0, 1.0])
    0.0
    >>> round(conf_interval([0.0, 2.0], 0.95), 4)
    1.96
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return 0.0
    quantile = norm.ppf((1 + alpha) / 2)
    return float(quantile * values.std(ddof=1) / np.sqrt(values.size))


class Metric(ABC):
    """Base metric class"""

    _logger: Optional[logging.Logger] = None

    @property
    def logger(self) -> logging.Logger:
        """
        :returns: get library logger
        """
        if self._logger is None:
            self._logger = logging.getLogger("molforge")
        return self._logger

    def __str__(self):
        return type(self).__name__

    def __call__(self, samples: SampleSet) -> float:
        """
        :param samples: prepared sample set
        :return: metric value
        """
        return self._get_metric_value(samples)

    @abstractmethod
    def _get_metric_value(self, samples: SampleSet) -> float:
        """
        Metric calculation for a sample set.

        :param samples: prepared sample set
        :return: metric value
        """


class ValidMoleculeMetric(Metric):
    """Mean of a per-molecule value over valid samples, ``nan`` when none is valid"""

    def __call__(self, samples: SampleSet) -> float:
        if not samples.valid:
            self.logger.warning("%s is undefined without valid samples", self)
            return float("nan")
        return self._get_metric_value(samples)

    def _get_metric_value(self, samples: SampleSet) -> float:
        return float(np.mean(self.distribution(samples)))

    def distribution(self, samples: SampleSet) -> List[float]:
        return [self._get_value_by_molecule(mol) for mol in samples.valid]

    def conf_interval(self, samples: SampleSet, alpha: float = 0.95) -> float:
        return conf_interval(self.distribution(samples), alpha)

    @abstractmethod
    def _get_value_by_molecule(self, mol: MoleculeGraph) -> float:
        """
        :param mol: valid sample
        :return: metric value of one molecule
        """
