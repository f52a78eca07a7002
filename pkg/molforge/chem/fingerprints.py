"""
Hashed path fingerprints and cosine similarity
"""
import zlib
from dataclasses import dataclass, field
from typing import Iterator, List, Tuple

import networkx as nx
import numpy as np

from molforge.chem.graph import MoleculeGraph
from molforge.chem.scaffolds import Scaffold

FINGERPRINT_WIDTH = 2048
MAX_PATH_LENGTH = 7


@dataclass(frozen=True)
class Fingerprint:
    """Fixed-width bit vector"""

    bits: np.ndarray = field(compare=False)
    path_length_max: int = MAX_PATH_LENGTH

    def __eq__(self, other) -> bool:
        return isinstance(other, Fingerprint) and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())

    def __and__(self, other: "Fingerprint") -> "Fingerprint":
        return Fingerprint(self.bits & other.bits, self.path_length_max)

    @property
    def popcount(self) -> int:
        return int(self.bits.sum())

    def on_bits(self) -> List[int]:
        return np.flatnonzero(self.bits).tolist()


def _atom_label(mol: MoleculeGraph, idx: int) -> str:
    atom = mol.atoms[idx]
    return atom.element.lower() if atom.aromatic else atom.element


_BOND_LABELS = {1: "-", 2: "=", 3: "#", 4: ":"}


def _paths(mol: MoleculeGraph, max_bonds: int) -> Iterator[Tuple[int, ...]]:
    """Simple paths with up to ``max_bonds`` bonds, each reported from both ends"""
    for source in mol.graph:
        yield (source,)
        if max_bonds == 0:
            continue
        targets = set(mol.graph) - {source}
        for path in nx.all_simple_paths(mol.graph, source, targets, cutoff=max_bonds):
            yield tuple(path)


def path_label(mol: MoleculeGraph, path: Tuple[int, ...]) -> str:
    """Direction independent text for a path: element and bond symbols, smaller of both readings"""
    forward = [_atom_label(mol, path[0])]
    for first, second in zip(path, path[1:]):
        forward.append(_BOND_LABELS[mol.bond_between(first, second).order.value])
        forward.append(_atom_label(mol, second))
    backward = forward[::-1]
    return "".join(min(forward, backward))


def fingerprint(
    mol: MoleculeGraph, width: int = FINGERPRINT_WIDTH, path_length_max: int = MAX_PATH_LENGTH
) -> Fingerprint:
    """
    Set one bit per distinct labelled path of 0 to ``path_length_max`` bonds.

    :param mol: valid molecule
    :param width: number of bits
    :param path_length_max: longest path in bonds
    """
    bits = np.zeros(width, dtype=bool)
    labels = {path_label(mol, path) for path in _paths(mol, path_length_max)}
    for label in labels:
        bits[zlib.crc32(label.encode("ascii")) % width] = True
    return Fingerprint(bits, path_length_max)


def cosine_similarity(first: Fingerprint, second: Fingerprint) -> float:
    """Cosine between two bit vectors, 0 when either is empty"""
    norm = np.sqrt(first.popcount * second.popcount)
    if norm == 0:
        return 0.0
    return float(min(1.0, (first & second).popcount / norm))


def scaffold_similarity(mol: MoleculeGraph, scaffold: Scaffold) -> float:
    """
    Fingerprint cosine similarity between a molecule and a scaffold.

    :return: value in [0, 1]
    """
    return cosine_similarity(fingerprint(mol), fingerprint(scaffold.graph))
