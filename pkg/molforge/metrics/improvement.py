"""
Descriptor means and their direction-aware improvement over a corpus baseline
"""
import logging
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from molforge.chem import (
    MAXIMIZE,
    MINIMIZE,
    TARGET,
    CorpusStats,
    MoleculeGraph,
    Scaffold,
    get_descriptor,
    has_substructure,
)
from molforge.errors import ConfigError, ZeroBaseline
from molforge.metrics.base_metric import ValidMoleculeMetric

logger = logging.getLogger("molforge")


def improvement(m_a: float, m_b: float, direction: str = MAXIMIZE) -> float:
    """
    Relative change of a mean in percent, positive when it moves the desired way.

    ``sign * (m_a - m_b) / |m_b| * 100`` with sign ``+1`` to maximize and ``-1`` to minimize.

    >>> round(improvement(0.863, 0.5), 1)
    72.6
    >>> round(improvement(-6.69, -7.89), 1)
    15.2
    >>> round(improvement(2.02, 2.61, "minimize"), 1)
    22.6

    :param m_a: mean of the generated molecules
    :param m_b: baseline mean
    :param direction: ``maximize`` or ``minimize``
    """
    if direction not in (MAXIMIZE, MINIMIZE):
        raise ConfigError(f"improvement needs maximize or minimize, got {direction!r}")
    if m_b == 0:
        raise ZeroBaseline("improvement is undefined for a zero baseline")
    sign = 1.0 if direction == MAXIMIZE else -1.0
    return sign * (m_a - m_b) / abs(m_b) * 100


def target_improvement(m_a: float, m_b: float, value: float) -> float:
    """
    Reduction in percent of the distance between the mean and a set point.

    >>> target_improvement(180.0, 200.0, 160.0)
    50.0
    """
    return improvement(abs(m_a - value), abs(m_b - value), MINIMIZE)


class DescriptorMean(ValidMoleculeMetric):
    """
    Mean descriptor value over valid samples.

    >>> from molforge.metrics.base_metric import SampleSet
    >>> DescriptorMean("HBD")(SampleSet.from_smiles(["CCO", "OCCO"]))
    1.5
    """

    def __init__(self, descriptor: str, stats: Optional[CorpusStats] = None):
        self.descriptor = descriptor
        self.func = get_descriptor(descriptor, stats)

    def __str__(self):
        return self.descriptor

    def _get_value_by_molecule(self, mol: MoleculeGraph) -> float:
        return float(self.func(mol))


def baseline_molecules(
    corpus: Sequence[MoleculeGraph], scaffold: Optional[Union[str, Scaffold]] = None
) -> Tuple[List[MoleculeGraph], bool]:
    """
    Corpus molecules the generated set is compared with.

    :param corpus: training molecules
    :param scaffold: when given, only molecules containing it
    :return: molecules and whether the scaffold filter was applied
    """
    if scaffold is None:
        return list(corpus), False
    scaffold = scaffold if isinstance(scaffold, Scaffold) else Scaffold.from_smiles(scaffold)
    matching = [mol for mol in corpus if has_substructure(mol, scaffold)]
    if not matching:
        logger.warning("no corpus molecule contains %s, the whole corpus is the baseline", scaffold.smiles)
        return list(corpus), False
    return matching, True


def baseline_mean(molecules: Iterable[MoleculeGraph], descriptor: str, stats: Optional[CorpusStats] = None) -> float:
    func = get_descriptor(descriptor, stats)
    values = [func(mol) for mol in molecules]
    return float(np.mean(values)) if values else float("nan")


def directed_improvement(m_a: float, m_b: float, direction: str, value: Optional[float] = None) -> Optional[float]:
    """
    Improvement for any direction, ``None`` when undefined.

    A zero baseline or a set-point direction without a value gives ``None`` and a warning.
    """
    if np.isnan(m_a) or np.isnan(m_b):
        return None
    try:
        if direction == TARGET:
            if value is None:
                return None
            return target_improvement(m_a, m_b, value)
        return improvement(m_a, m_b, direction)
    except ZeroBaseline:
        logger.warning("baseline of %s is zero, improvement is not reported", direction)
        return None
