"""
Corpus descriptor statistics and the penalized logP built on them
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Mapping, Sequence

import numpy as np

from molforge.chem.descriptors import PLogP, get_descriptor
from molforge.chem.graph import MoleculeGraph
from molforge.data import PathLike
from molforge.errors import DegenerateStats, MissingStats

DEFAULT_STATS_DESCRIPTORS = ("HBA", "HBD", "CrippenLogP", "CyclePenalty", "MolWeight", "SASProxy")


@dataclass(frozen=True)
class DescriptorStats:
    """Mean, population standard deviation and sample count of one descriptor"""

    mean: float
    std: float
    count: int


class CorpusStats(Mapping[str, DescriptorStats]):
    """
    Immutable per-descriptor statistics.

    :param entries: statistics by descriptor id, every ``std`` must be positive
    """

    def __init__(self, entries: Mapping[str, DescriptorStats]):
        self._entries: Dict[str, DescriptorStats] = dict(entries)
        self.check_positive(self._entries)

    def __getitem__(self, name: str) -> DescriptorStats:
        if name not in self._entries:
            raise MissingStats(f"no corpus statistics for {name!r}")
        return self._entries[name]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"CorpusStats({self._entries!r})"

    def check_positive(self, names: Iterable[str]) -> None:
        degenerate = [name for name in names if not self[name].std > 0]
        if degenerate:
            raise DegenerateStats(f"zero standard deviation for {', '.join(degenerate)}")

    def zscore(self, name: str, value: float) -> float:
        entry = self[name]
        return (value - entry.mean) / entry.std

    @classmethod
    def from_values(cls, values: Mapping[str, Sequence[float]], skip_degenerate: bool = False) -> "CorpusStats":
        """
        :param values: descriptor values by id
        :param skip_degenerate: leave out constant descriptors with a warning instead of raising
        """
        entries = {}
        for name, column in values.items():
            column = np.asarray(column, dtype=np.float64)
            if column.size == 0:
                raise DegenerateStats(f"no values for {name}")
            if skip_degenerate and not column.std() > 0:
                logging.getLogger("molforge").warning("%s is constant over the corpus and has no statistics", name)
                continue
            entries[name] = DescriptorStats(float(column.mean()), float(column.std()), int(column.size))
        return cls(entries)

    @classmethod
    def from_molecules(
        cls,
        molecules: Iterable[MoleculeGraph],
        names: Sequence[str] = DEFAULT_STATS_DESCRIPTORS,
        skip_degenerate: bool = False,
    ) -> "CorpusStats":
        """
        Statistics of descriptors over a corpus.

        :param molecules: valid molecules
        :param names: descriptor ids, PLogP is not allowed here
        :param skip_degenerate: leave out constant descriptors with a warning instead of raising
        """
        functions = {name: get_descriptor(name) for name in names}
        values: Dict[str, list] = {name: [] for name in names}
        for mol in molecules:
            for name, func in functions.items():
                values[name].append(func(mol))
        return cls.from_values(values, skip_degenerate)

    def to_dict(self) -> Dict[str, Dict[str, float]]:
        return {name: {"mean": e.mean, "std": e.std, "count": e.count} for name, e in self._entries.items()}

    def save(self, path: PathLike) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: PathLike) -> "CorpusStats":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            {
                name: DescriptorStats(float(item["mean"]), float(item["std"]), int(item["count"]))
                for name, item in raw.items()
            }
        )


def plogp(mol: MoleculeGraph, stats: CorpusStats) -> float:
    """
    Penalized logP of one molecule.

    :param mol: valid molecule
    :param stats: statistics with CrippenLogP, SASProxy and CyclePenalty entries
    """
    return PLogP(stats)(mol)
